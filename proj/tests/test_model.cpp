#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "pottspair/model.hpp"
#include "pottspair/rng.hpp"

using namespace pottspair;

namespace {

// Vertex spins uniform, then face spins uniform per block that the vertex
// contours force to be constant. Produces admissible pairs (not the target
// law; good enough for property tests).
SpinPair random_admissible(const EmbeddedGraph& g, const Params& p, std::mt19937_64& rng) {
    std::vector<double> sv(g.n_vertices);
    for (auto& s : sv) s = p.Q[rng() % p.q];
    EdgeSet eta = contours(g, sv, Side::primal);
    std::vector<double> fv(g.n_faces);
    for (const auto& comp : clusters(g, eta).components()) {
        double s = p.Qp[rng() % p.qp];
        for (int u : comp) fv[u] = s;
    }
    return SpinPair(g, std::move(sv), std::move(fv));
}

// Reference value for cluster_increment: build the contour-restricted face
// configuration explicitly by erasing all face contours outside the cluster,
// pin each resulting block by a face beside the cluster, and subtract.
double increment_by_erasure(const EmbeddedGraph& g, const SpinPair& sp, const EdgeSet& omega,
                            const ClusterPartition& cl, int root, int u1, int u2) {
    UnionFind uf(g.n_faces);
    auto in_cluster = [&](int e) { return omega.has(e) && cl.find(g.quads[e].v1) == root; };
    for (int e = 0; e < g.n_edges(); ++e)
        if (!(sp.eta_p.has(e) && in_cluster(e))) uf.unite(g.quads[e].u1, g.quads[e].u2);

    std::vector<double> value(g.n_faces);
    std::vector<char> pinned(g.n_faces, 0);
    for (int e = 0; e < g.n_edges(); ++e) {
        if (!in_cluster(e)) continue;
        for (int u : {g.quads[e].u1, g.quads[e].u2}) {
            int r = uf.find(u);
            if (pinned[r]) CHECK(value[r] == sp.sigma_p[u]);
            value[r] = sp.sigma_p[u];
            pinned[r] = 1;
        }
    }
    if (!pinned[uf.find(u1)] || !pinned[uf.find(u2)]) {
        CHECK(uf.find(u1) == uf.find(u2));
        return 0.0;
    }
    return value[uf.find(u2)] - value[uf.find(u1)];
}

}  // namespace

TEST_CASE("parameter validation and derived quantities") {
    CHECK(default_alphabet(1) == std::vector<double>{0});
    CHECK(default_alphabet(2) == std::vector<double>{-1, 1});
    CHECK(default_alphabet(3) == std::vector<double>{-2, 0, 2});

    Params p(2, 2, 0.5, 0.5);
    CHECK(p.sum_le_one());
    CHECK(p.sum_ge_one());
    CHECK(p.p_fk() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(p.alpha() == doctest::Approx(0.0));
    CHECK(p.beta() == doctest::Approx(std::log(3.0)).epsilon(1e-15));
    CHECK(p.x() == 0.0);
    CHECK(!p.has_x_star());
    CHECK_THROWS_AS(p.x_star(), std::domain_error);

    Params hi(2, 2, 0.6, 0.8);
    CHECK(!hi.sum_le_one());
    CHECK(hi.x() == doctest::Approx(-2.0 / 3.0).epsilon(1e-15));
    CHECK(hi.x_star() == doctest::Approx(-3.0).epsilon(1e-15));

    Params edge(2, 2, 1.0, 0.5);
    CHECK(!edge.has_alpha_beta());
    CHECK_THROWS_AS(edge.alpha(), std::domain_error);
    CHECK_THROWS_AS(edge.beta(), std::domain_error);

    CHECK(Params(2, 3, 0.5, 0.5).max_jump() == 4.0);
    CHECK(Params(3, 2, 0.5, 0.5).moment_Q(2) == doctest::Approx(8.0 / 3.0));
    CHECK(Params(2, 2, 0.5, 0.5).moment_Q(1) == 0.0);
    CHECK(Params(2, 2, 0.5, 0.5).moment_Q(2) == 1.0);

    CHECK_THROWS_AS(Params(0, 2, 0.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(Params(2, 2, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(Params(2, 2, 0.5, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(Params(2, 2, 0.5, 0.5, {1, 2}, {-1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Params(3, 2, 0.5, 0.5, {1, -1, 1}, {-1, 1}), std::invalid_argument);
    CHECK_NOTHROW(Params(3, 2, 0.5, 0.5, {-0.5, 0.0, 0.5}, {-2, 2}));
}

TEST_CASE("contours and weights on the smallest box") {
    EmbeddedGraph g = build_box(1);
    Params p(2, 2, 0.25, 0.5);

    SpinPair flat(g, {1, 1, 1, 1}, {1, 1});
    CHECK(flat.eta.count() == 0);
    CHECK(flat.eta_p.count() == 0);
    CHECK(weight(flat, p) == 1.0);

    SpinPair split(g, {1, 1, 1, 1}, {1, -1});
    CHECK(split.eta_p.count() == 4);  // every edge separates the two faces
    CHECK(split.eta.count() == 0);
    CHECK(weight(split, p) == doctest::Approx(std::pow(0.25, 4)).epsilon(1e-15));

    SpinPair corner(g, {1, 1, 1, -1}, {1, 1});
    CHECK(corner.eta.count() == 2);  // the flipped corner has two neighbors
    CHECK(weight(corner, p) == doctest::Approx(0.25).epsilon(1e-15));

    SpinPair bad(g, {1, 1, 1, -1}, {1, -1});
    CHECK(!bad.admissible());
    CHECK_THROWS_AS(weight(bad, p), std::invalid_argument);
}

TEST_CASE("admissibility depends only on the equality pattern") {
    EmbeddedGraph g = build_box(1);
    std::vector<double> two{-1, 1};
    for (int sm = 0; sm < 16; ++sm)
        for (int fm = 0; fm < 4; ++fm) {
            std::vector<double> sv(4), fv(2);
            for (int v = 0; v < 4; ++v) sv[v] = two[(sm >> v) & 1];
            for (int u = 0; u < 2; ++u) fv[u] = two[(fm >> u) & 1];
            SpinPair sp(g, sv, fv);

            auto flipped = sv;
            for (auto& s : flipped) s = -s;
            CHECK(SpinPair(g, flipped, fv).admissible() == sp.admissible());
            auto relabeled = fv;
            for (auto& s : relabeled) s = s > 0 ? 3.0 : -3.0;  // bijective relabeling
            SpinPair rel(g, sv, relabeled);
            CHECK(rel.admissible() == sp.admissible());
            CHECK(rel.eta_p == sp.eta_p);
        }
}

TEST_CASE("height integration on the smallest box") {
    EmbeddedGraph g = build_box(1);
    int outer = g.outer_face;

    SpinPair flat(g, {1, 1, 1, 1}, {1, 1});
    HeightField hf = height(g, flat, Side::dual, outer, 0.0);
    for (double v : hf.vertex_value) CHECK(v == -1.0);
    for (double u : hf.face_value) CHECK(u == 0.0);

    // Global sign flip leaves the height unchanged.
    SpinPair neg(g, {-1, -1, -1, -1}, {-1, -1});
    HeightField hneg = height(g, neg, Side::dual, outer, 0.0);
    CHECK(hneg.vertex_value == hf.vertex_value);
    CHECK(hneg.face_value == hf.face_value);

    // Split faces: all vertices one step above the outer face, inner face two.
    SpinPair split(g, {1, 1, 1, 1}, {1, -1});
    HeightField hs = height(g, split, Side::dual, outer, 0.0);
    for (double v : hs.vertex_value) CHECK(v == 1.0);
    CHECK(hs.face_value[0] == 2.0);
    CHECK(hs.face_value[outer] == 0.0);
}

TEST_CASE("height is constant on equal-spin blocks") {
    EmbeddedGraph g = build_box(2);
    Params p(3, 2, 0.4, 0.4);
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        SpinPair sp = random_admissible(g, p, rng);
        HeightField hf = height(g, sp, Side::dual, g.outer_face, 0.0);
        for (int e = 0; e < g.n_edges(); ++e) {
            const Quad& q = g.quads[e];
            if (sp.sigma[q.v1] == sp.sigma[q.v2])
                CHECK(hf.vertex_value[q.v1] == hf.vertex_value[q.v2]);
            if (sp.sigma_p[q.u1] == sp.sigma_p[q.u2])
                CHECK(hf.face_value[q.u1] == hf.face_value[q.u2]);
        }
    }
    CHECK_THROWS_AS(height(build_torus(2), SpinPair(build_torus(2), {1, 1, 1, 1}, {1, 1, 1, 1}),
                           Side::dual, 0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("torus height increments") {
    EmbeddedGraph g = build_torus(3);
    Params p(2, 2, 0.45, 0.45);
    std::mt19937_64 rng(11);

    // Face ids equal y*3+x; a contractible square loop of faces.
    std::vector<int> loop{0, 1, 4, 3, 0};
    std::vector<int> open{0, 1, 2};

    SpinPair flat(g, std::vector<double>(9, 1.0), std::vector<double>(9, 1.0));
    CHECK(height_increment_torus(g, flat, open) == 0.0);

    for (int trial = 0; trial < 300; ++trial) {
        SpinPair sp = random_admissible(g, p, rng);
        CHECK(height_increment_torus(g, sp, loop) == 0.0);

        // Independence of the endpoint choice at every crossing.
        double manual1 = 0.0, manual2 = 0.0;
        for (size_t i = 0; i + 1 < open.size(); ++i) {
            int e = connecting_edge(g, open[i], open[i + 1]);
            REQUIRE(e >= 0);
            double jump = sp.sigma_p[open[i + 1]] - sp.sigma_p[open[i]];
            manual1 += sp.sigma[g.quads[e].v1] * jump;
            manual2 += sp.sigma[g.quads[e].v2] * jump;
        }
        CHECK(manual1 == manual2);
        CHECK(height_increment_torus(g, sp, open) == manual1);
    }

    CHECK_THROWS_AS(height_increment_torus(g, flat, std::vector<int>{0, 4}),
                    std::invalid_argument);
}

TEST_CASE("coupling: forced edges, regime inclusions, constant spins") {
    std::mt19937_64 rng(2026);
    for (auto [a, b] : {std::pair{0.3, 0.5}, {0.7, 0.6}, {0.5, 0.5}, {0.2, 0.8}}) {
        Params p(2, 3, a, b);
        EmbeddedGraph g = build_box(2);
        for (int trial = 0; trial < 500; ++trial) {
            SpinPair sp = random_admissible(g, p, rng);
            PercolationPair pp = couple_percolation(g, sp, p, rng);
            CHECK(coupling_consistent(g, sp, p, pp));
            if (a + b == 1.0) CHECK(pp.omega.complement() == pp.omega_p);
        }
    }
}

TEST_CASE("coupling: dice marginals match the table") {
    EmbeddedGraph g = build_box(2);
    const int N = 200000;
    for (auto [a, b] : {std::pair{0.3, 0.5}, {0.7, 0.6}}) {
        Params p(2, 2, a, b);
        SpinPair flat(g, std::vector<double>(16, 1.0), std::vector<double>(10, 1.0));
        std::mt19937_64 rng(99);
        int open_primal = 0, open_dual = 0, both_open = 0, both_closed = 0;
        for (int i = 0; i < N; ++i) {
            PercolationPair pp = couple_percolation(g, flat, p, rng);
            open_primal += pp.omega.has(7);
            open_dual += pp.omega_p.has(7);
            both_open += pp.omega.has(7) && pp.omega_p.has(7);
            both_closed += !pp.omega.has(7) && !pp.omega_p.has(7);
        }
        CHECK(std::abs(open_primal / double(N) - (1 - b)) < 0.006);
        CHECK(std::abs(open_dual / double(N) - (1 - a)) < 0.006);
        if (a + b <= 1) {
            CHECK(std::abs(both_open / double(N) - (1 - a - b)) < 0.006);
            CHECK(both_closed == 0);
        } else {
            CHECK(std::abs(both_closed / double(N) - (a + b - 1)) < 0.006);
            CHECK(both_open == 0);
        }
    }
}

TEST_CASE("coupling is reproducible for a fixed seed") {
    EmbeddedGraph g = build_box(2);
    Params p(2, 2, 0.4, 0.3);
    std::mt19937_64 rng1(5), rng2(5);
    SpinPair sp = random_admissible(g, p, rng1);
    SpinPair sp2 = random_admissible(g, p, rng2);
    CHECK(sp.sigma == sp2.sigma);
    PercolationPair a1 = couple_percolation(g, sp, p, rng1);
    PercolationPair a2 = couple_percolation(g, sp2, p, rng2);
    CHECK(a1.omega == a2.omega);
    CHECK(a1.omega_p == a2.omega_p);
}

TEST_CASE("canonical face paths are deterministic") {
    EmbeddedGraph g = build_box(2);
    CHECK(canonical_face_path(g, 0, 4) == std::vector<int>{0, 1, 4});
    CHECK(canonical_face_path(g, 0, 8) == std::vector<int>{0, 9, 8});
    CHECK(canonical_face_path(g, 4, 4) == std::vector<int>{4});
}

TEST_CASE("cluster increments match the erasure construction") {
    EmbeddedGraph g = build_box(2);
    std::mt19937_64 rng(31337);
    for (auto [a, b] : {std::pair{0.3, 0.5}, {0.7, 0.6}}) {
        Params p(2, 2, a, b);
        for (int trial = 0; trial < 400; ++trial) {
            SpinPair sp = random_admissible(g, p, rng);
            PercolationPair pp = couple_percolation(g, sp, p, rng);
            int u1 = static_cast<int>(rng() % g.n_faces);
            int u2 = static_cast<int>(rng() % g.n_faces);
            std::vector<int> path = canonical_face_path(g, u1, u2);
            for (int root : {pp.cl_omega.find(0), pp.cl_omega.find(5), pp.cl_omega.find(10)}) {
                double via_path = cluster_increment(g, sp, pp.cl_omega, root, path);
                double oracle =
                    increment_by_erasure(g, sp, pp.omega, pp.cl_omega, root, u1, u2);
                CHECK(via_path == oracle);
                // Path independence: detour through an intermediate face.
                int w = static_cast<int>(rng() % g.n_faces);
                std::vector<int> detour = canonical_face_path(g, u1, w);
                std::vector<int> tail = canonical_face_path(g, w, u2);
                detour.insert(detour.end(), tail.begin() + 1, tail.end());
                CHECK(cluster_increment(g, sp, pp.cl_omega, root, detour) == via_path);
            }
        }
    }
}

TEST_CASE("face-height difference decomposes over clusters") {
    EmbeddedGraph g = build_box(2);
    std::mt19937_64 rng(424242);
    for (auto [a, b] : {std::pair{0.3, 0.5}, {0.7, 0.6}, {0.5, 0.5}}) {
        Params p(2, 2, a, b);
        for (int trial = 0; trial < 300; ++trial) {
            SpinPair sp = random_admissible(g, p, rng);
            PercolationPair pp = couple_percolation(g, sp, p, rng);
            HeightField hf = height(g, sp, Side::dual, g.outer_face, 0.0);
            int u1 = static_cast<int>(rng() % g.n_faces);
            int u2 = static_cast<int>(rng() % g.n_faces);
            std::vector<int> path = canonical_face_path(g, u1, u2);
            double sum = 0.0;
            for (const auto& comp : pp.cl_omega.components()) {
                int root = pp.cl_omega.find(comp[0]);
                sum += sp.sigma[comp[0]] * cluster_increment(g, sp, pp.cl_omega, root, path);
            }
            CHECK(sum == doctest::Approx(hf.face_value[u2] - hf.face_value[u1]).epsilon(1e-12));
        }
    }
}

TEST_CASE("spin serialization round trip") {
    EmbeddedGraph g = build_box(2);
    Params p(3, 2, 0.4, 0.4);
    std::mt19937_64 rng(17);
    SpinPair sp = random_admissible(g, p, rng);
    std::string text = spins_to_text(g, sp);
    SpinPair back = spins_from_text(g, text);
    CHECK(back.sigma == sp.sigma);
    CHECK(back.sigma_p == sp.sigma_p);
    CHECK(back.eta == sp.eta);
    CHECK_THROWS_AS(spins_from_text(g, "0 1\n"), std::invalid_argument);
}
