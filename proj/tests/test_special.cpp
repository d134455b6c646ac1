#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "pottspair/special.hpp"

using namespace pottspair;

namespace {

// Arrow-head count straight off the medial graph: a canonical bit points the
// arrow at the medial quad's second endpoint. Independent of the corner
// arithmetic inside ice_rule_holds.
bool two_in_two_out(const EmbeddedGraph& medial_graph, const ArrowConfig& ac) {
    for (int m = 0; m < medial_graph.n_vertices; ++m) {
        REQUIRE(medial_graph.degree(m) == 4);
        int in = 0;
        for (int c : medial_graph.vertex_rotation[m]) {
            int head = ac.along[c] ? medial_graph.quads[c].v2 : medial_graph.quads[c].v1;
            if (head == m) ++in;
        }
        if (in != 2) return false;
    }
    return true;
}

// Admissible pair with uniform vertex spins and face spins drawn uniformly
// per component of the vertex-spin contour, so no quad carries two jumps.
SpinPair random_admissible_pair(const EmbeddedGraph& g, std::mt19937_64& rng) {
    std::vector<double> sigma(g.n_vertices);
    for (double& s : sigma) s = (rng() & 1) ? 1.0 : -1.0;
    EdgeSet walls = contours(g, sigma, Side::primal);
    ClusterPartition cp = clusters(g, walls);
    std::vector<double> sigma_p(g.n_faces);
    std::vector<double> pick(g.n_faces, 0.0);
    for (int u = 0; u < g.n_faces; ++u)
        if (cp.find(u) == u) pick[u] = (rng() & 1) ? 1.0 : -1.0;
    for (int u = 0; u < g.n_faces; ++u) sigma_p[u] = pick[cp.find(u)];
    SpinPair sp(g, std::move(sigma), std::move(sigma_p));
    REQUIRE(sp.admissible());
    return sp;
}

ArrowConfig uniform_arrows(const EmbeddedGraph& g, int bit) {
    ArrowConfig ac;
    ac.along.assign(g.n_corners(), static_cast<uint8_t>(bit));
    return ac;
}

}  // namespace

TEST_CASE("constant pairs map to the uniform arrow fields") {
    EmbeddedGraph g = build_box(1);

    SpinPair plus(g, {1, 1, 1, 1}, {1, 1});
    ArrowConfig ac_plus = spins_to_arrows(g, plus);
    CHECK(ac_plus.along == uniform_arrows(g, 0).along);
    CHECK(ice_rule_holds(g, ac_plus));
    VertexTypes t = classify_arrows(g, ac_plus);
    CHECK(t.n1 == 0);
    CHECK(t.n2 == 0);
    CHECK(t.n3 == g.n_edges());
    CHECK(arrow_weight(g, ac_plus, Params(2, 2, 0.3, 0.7)) == 1.0);

    // The opposite-sign pair is the other preimage of the same field.
    SpinPair minus(g, {-1, -1, -1, -1}, {-1, -1});
    CHECK(spins_to_arrows(g, minus).along == ac_plus.along);

    // Mixed constants give the other uniform field, still all type 3.
    SpinPair mixed(g, {1, 1, 1, 1}, {-1, -1});
    ArrowConfig ac_mixed = spins_to_arrows(g, mixed);
    CHECK(ac_mixed.along == uniform_arrows(g, 1).along);
    VertexTypes tm = classify_arrows(g, ac_mixed);
    CHECK(tm.n1 == 0);
    CHECK(tm.n2 == 0);

    // A lone face-spin island forces every edge into the face contour.
    SpinPair island(g, {1, 1, 1, 1}, {-1, 1});
    ArrowConfig ac_island = spins_to_arrows(g, island);
    CHECK(ice_rule_holds(g, ac_island));
    VertexTypes ti = classify_arrows(g, ac_island);
    CHECK(ti.n1 == g.n_edges());
    CHECK(ti.n2 == 0);
    Params p(2, 2, 0.35, 0.55);
    CHECK(arrow_weight(g, ac_island, p) == doctest::Approx(std::pow(0.35, 4)).epsilon(1e-14));
}

TEST_CASE("ice rule equals a direct head count on random pairs") {
    EmbeddedGraph g = build_box(2);
    EmbeddedGraph mg = medial(g);
    std::mt19937_64 rng(20260814);
    for (int trial = 0; trial < 1000; ++trial) {
        SpinPair sp = random_admissible_pair(g, rng);
        ArrowConfig ac = spins_to_arrows(g, sp);
        CHECK(ice_rule_holds(g, ac));
        CHECK(two_in_two_out(mg, ac));

        // One flipped bit unbalances the flipped edge's medial vertex.
        ArrowConfig bad = ac;
        int c = static_cast<int>(rng() % bad.along.size());
        bad.along[c] ^= 1;
        CHECK_FALSE(ice_rule_holds(g, bad));
        CHECK_FALSE(two_in_two_out(mg, bad));
    }
}

TEST_CASE("ice enumeration matches half the admissible pair count") {
    EmbeddedGraph g = build_box(1);
    std::vector<ArrowConfig> ice = enumerate_ice(g);
    CHECK(ice.size() == 18);

    SigmaLaw sl = enumerate_sigma(g, Params(2, 2, 0.5, 0.5));
    CHECK(sl.joint.size() == 36);
    CHECK(2 * ice.size() == sl.joint.size());

    // Uniform fields bracket the enumeration order.
    CHECK(ice.front().along == uniform_arrows(g, 0).along);
    CHECK(ice.back().along == uniform_arrows(g, 1).along);

    for (const ArrowConfig& ac : ice) {
        SpinPair hi = arrows_to_spins(g, ac, 1);
        SpinPair lo = arrows_to_spins(g, ac, -1);
        CHECK(spins_to_arrows(g, hi).along == ac.along);
        CHECK(spins_to_arrows(g, lo).along == ac.along);
        for (int v = 0; v < g.n_vertices; ++v) CHECK(hi.sigma[v] == -lo.sigma[v]);
        for (int u = 0; u < g.n_faces; ++u) CHECK(hi.sigma_p[u] == -lo.sigma_p[u]);

        ArrowConfig back = arrows_from_text(g, arrows_to_text(ac));
        CHECK(back.along == ac.along);
    }

    CHECK_THROWS_AS(arrows_from_text(g, "0101"), std::invalid_argument);
    CHECK_THROWS_AS(arrows_from_text(g, "0101010x"), std::invalid_argument);
}

TEST_CASE("arrow weights reproduce the pair weights") {
    EmbeddedGraph g = build_box(1);
    for (Params p : {Params(2, 2, 0.3, 0.7), Params(2, 2, 0.6, 0.8)}) {
        for (const ArrowConfig& ac : enumerate_ice(g)) {
            SpinPair sp = arrows_to_spins(g, ac, 1);
            VertexTypes t = classify_arrows(g, ac);
            CHECK(t.n1 == sp.eta_p.count());
            CHECK(t.n2 == sp.eta.count());
            CHECK(t.n1 + t.n2 + t.n3 == g.n_edges());
            double w = arrow_weight(g, ac, p);
            CHECK(w == doctest::Approx(weight(sp, p)).epsilon(1e-13));
        }
    }
}

TEST_CASE("arrow height equals the pair height after one odd shift") {
    EmbeddedGraph g = build_box(1);
    Params p(2, 2, 0.35, 0.45);
    for_each_admissible(g, p, [&](const SpinPair& sp, double) {
        ArrowConfig ac = spins_to_arrows(g, sp);
        int sign = sp.sigma_p[g.outer_face] > 0 ? 1 : -1;

        SpinPair back = arrows_to_spins(g, ac, sign);
        CHECK(back.sigma == sp.sigma);
        CHECK(back.sigma_p == sp.sigma_p);

        HeightField ha = arrow_height(g, ac, sign);
        HeightField hm = height(g, sp, Side::dual, g.outer_face, 0.0);
        for (int v = 0; v < g.n_vertices; ++v) {
            CHECK(ha.vertex_value[v] == hm.vertex_value[v] + sign);
            CHECK(std::fmod(std::fabs(ha.vertex_value[v]), 2.0) == 0.0);
        }
        for (int u = 0; u < g.n_faces; ++u) {
            CHECK(ha.face_value[u] == hm.face_value[u] + sign);
            CHECK(std::fmod(std::fabs(ha.face_value[u]), 2.0) == 1.0);
        }
    });
}

TEST_CASE("six-vertex correspondence bundle") {
    EmbeddedGraph g = build_box(1);
    for (Params p : {Params(2, 2, 0.3, 0.4), Params(2, 2, 0.6, 0.8), Params(2, 2, 0.5, 0.5)}) {
        Report r = check_six_vertex(g, p);
        INFO(r.detail, " ", r.counterexample);
        CHECK(r.pass);
        CHECK(r.max_error <= 1e-10);
        CHECK(r.detail.find("ice=18") != std::string::npos);
    }

    CHECK_THROWS_AS(check_six_vertex(g, Params(3, 2, 0.3, 0.4)), std::invalid_argument);
    CHECK_THROWS_AS(check_six_vertex(g, Params(2, 3, 0.3, 0.4)), std::invalid_argument);
    CHECK_THROWS_AS(
        check_six_vertex(g, Params(2, 2, 0.3, 0.4, {-2.0, 2.0}, {-1.0, 1.0})),
        std::invalid_argument);
    CHECK_THROWS_AS(check_six_vertex(build_torus(2), Params(2, 2, 0.3, 0.4)),
                    std::invalid_argument);

    // Ill-formed inputs to the conversions themselves.
    SpinPair wide(g, {2, 2, 2, 2}, {1, 1});
    CHECK_THROWS_AS(spins_to_arrows(g, wide), std::invalid_argument);
    ArrowConfig broken = uniform_arrows(g, 0);
    broken.along[3] = 1;
    CHECK_FALSE(ice_rule_holds(g, broken));
    CHECK_THROWS_AS(classify_arrows(g, broken), std::invalid_argument);
    CHECK_THROWS_AS(arrows_to_spins(g, broken, 1), std::invalid_argument);
    CHECK_THROWS_AS(arrows_to_spins(g, uniform_arrows(g, 0), 2), std::invalid_argument);
    CHECK_THROWS_AS(arrow_height(g, uniform_arrows(g, 0), 0), std::invalid_argument);
}

TEST_CASE("current trace laws on the box") {
    EmbeddedGraph g = build_box(1);
    const double a = 0.6, b = 0.8;

    for (int q : {1, 2}) {
        Params p(q, 2, a, b);

        // Test-side law of (odd part, support), with the trace accessor
        // validating every visit.
        Distribution law;
        for_each_joint(g, p,
                       [&](const SpinPair& sp, const EdgeSet& omega, const EdgeSet&, double w) {
                           CurrentTrace ct = current_trace(g, sp, omega);
                           CHECK(ct.eta.subset_of(ct.omega));
                           law.add(key_edges(ct.eta) + ";" + key_edges(ct.omega), w);
                       });
        // Even subgraphs of the 4-cycle: empty and the full cycle, so 16 + 1
        // traces in total.
        CHECK(law.size() == 17);

        EdgeSet none(Side::primal, g.n_edges());
        EdgeSet full = EdgeSet::full(Side::primal, g.n_edges());
        std::string empty_key = key_edges(none) + ";" + key_edges(none);
        std::string full_key = key_edges(full) + ";" + key_edges(full);
        if (q == 1) {
            double z = 1.0 + std::pow(a, 4);
            CHECK(law.prob(empty_key) == doctest::Approx(std::pow(b, 4) / z).epsilon(1e-12));
            CHECK(law.prob(full_key) == doctest::Approx(std::pow(a, 4) / z).epsilon(1e-12));
        } else {
            CHECK(law.prob(empty_key) == doctest::Approx(1024.0 / 1681.0).epsilon(1e-12));
            CHECK(law.prob(full_key) == doctest::Approx(81.0 / 3362.0).epsilon(1e-12));
        }

        Report r = check_current_law(g, p);
        INFO(r.detail, " ", r.counterexample);
        CHECK(r.pass);
        CHECK(r.max_error <= 1e-10);
        CHECK(r.detail.find("traces=17") != std::string::npos);
        if (q == 1)
            CHECK(r.detail.find("form=single-current") != std::string::npos);
        else
            CHECK(r.detail.find("x=0.333") != std::string::npos);
    }

    // Sampled couplings carry valid traces too.
    Params p2(2, 2, a, b);
    std::mt19937_64 rng(7);
    SpinPair sp = random_admissible_pair(g, rng);
    for (int i = 0; i < 50; ++i) {
        PercolationPair pp = couple_percolation(g, sp, p2, rng);
        CurrentTrace ct = current_trace(g, sp, pp.omega);
        CHECK(ct.omega == pp.omega);
        CHECK(ct.eta == sp.eta_p);
    }

    CHECK_THROWS_AS(check_current_law(g, Params(3, 2, a, b)), std::invalid_argument);
    CHECK_THROWS_AS(check_current_law(g, Params(1, 3, a, b)), std::invalid_argument);
    CHECK_THROWS_AS(check_current_law(g, Params(1, 2, 0.5, 0.5)), std::invalid_argument);

    SpinPair island(g, {1, 1, 1, 1}, {-1, 1});
    CHECK_THROWS_AS(current_trace(g, island, EdgeSet(Side::primal, 4)), std::invalid_argument);
    CHECK_THROWS_AS(current_trace(g, island, EdgeSet::full(Side::dual, 4)),
                    std::invalid_argument);
    SpinPair lopsided(g, {1, 1, 1, 1}, {0, 2});
    CHECK_THROWS_AS(current_trace(g, lopsided, EdgeSet::full(Side::primal, 4)),
                    std::invalid_argument);
}

TEST_CASE("loop marginal on the prism") {
    EmbeddedGraph g = build_prism();
    Params p(2, 2, 0.5, 1.0);

    Distribution law = loop_marginal(g, p);
    // The loop configs are the even subgraphs: 2^(9 - 6 + 1) of them.
    CHECK(law.size() == 16);

    // Every 3-edge loop config is a triangle: against the empty config its
    // odds are n x^3 with n = 2 and x = a/n = 1/4.
    EdgeSet none(Side::primal, g.n_edges());
    int triangles = 0;
    for (uint64_t m = 0; m < (uint64_t(1) << g.n_edges()); ++m) {
        std::vector<int> deg(g.n_vertices, 0);
        EdgeSet eta = EdgeSet::from_mask(Side::primal, g.n_edges(), m);
        for (int e : eta.elements()) {
            ++deg[g.quads[e].v1];
            ++deg[g.quads[e].v2];
        }
        bool loops = true;
        for (int v = 0; v < g.n_vertices; ++v)
            if (deg[v] != 0 && deg[v] != 2) loops = false;
        if (!loops) continue;
        if (eta.count() == 3) {
            ++triangles;
            CHECK(law.prob(key_edges(eta)) / law.prob(key_edges(none)) ==
                  doctest::Approx(2.0 * std::pow(0.25, 3)).epsilon(1e-12));
        }
        if (eta.count() == 6 && clusters(g, eta).k == g.n_vertices - 6 + 2) {
            // Two disjoint triangles: odds n^2 x^6.
            CHECK(law.prob(key_edges(eta)) / law.prob(key_edges(none)) ==
                  doctest::Approx(4.0 * std::pow(0.25, 6)).epsilon(1e-12));
        }
    }
    CHECK(triangles == 2);

    for (Params pn : {Params(2, 2, 0.5, 1.0), Params(1, 2, 0.7, 1.0), Params(3, 2, 0.9, 1.0)}) {
        Report r = check_loop_marginal(g, pn);
        INFO(r.detail, " ", r.counterexample);
        CHECK(r.pass);
        CHECK(r.max_error <= 1e-10);
        CHECK(r.detail.find("loop-configs=16") != std::string::npos);
    }

    CHECK_THROWS_AS(loop_marginal(build_box(1), p), std::invalid_argument);
    CHECK_THROWS_AS(loop_marginal(g, Params(2, 2, 0.5, 0.9)), std::invalid_argument);
    CHECK_THROWS_AS(loop_marginal(g, Params(2, 3, 0.5, 1.0)), std::invalid_argument);
}
