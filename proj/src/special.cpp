#include "pottspair/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <deque>
#include <stdexcept>
#include <utility>

namespace pottspair {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

double rel_err(double lhs, double rhs) {
    double scale = std::max({std::fabs(lhs), std::fabs(rhs), 1.0});
    return std::fabs(lhs - rhs) / scale;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Corner ids around the quad of edge e, in the order (v1,u1), (v1,u2),
// (v2,u1), (v2,u2). The canonical medial darts of the first and last leave
// the medial vertex over e; the middle two enter it.
std::array<int, 4> quad_corners(const EmbeddedGraph& g, int e) {
    const Quad& q = g.quads[e];
    return {g.corner_beside(q.v1, e, q.u1), g.corner_beside(q.v1, e, q.u2),
            g.corner_beside(q.v2, e, q.u1), g.corner_beside(q.v2, e, q.u2)};
}

void check_arrow_host(const EmbeddedGraph& g, const ArrowConfig& ac, const char* who) {
    require(g.topology == EmbeddedGraph::Topology::genus0,
            std::string(who) + ": genus-0 host required");
    require(static_cast<int>(ac.along.size()) == g.n_corners(),
            std::string(who) + ": one arrow bit per medial edge required");
}

bool even_subgraph_mask(const EmbeddedGraph& g, uint64_t mask, std::vector<int>& deg) {
    std::fill(deg.begin(), deg.end(), 0);
    for (int e = 0; e < g.n_edges(); ++e)
        if ((mask >> e) & 1) {
            deg[g.quads[e].v1] ^= 1;
            deg[g.quads[e].v2] ^= 1;
        }
    for (int v = 0; v < g.n_vertices; ++v)
        if (deg[v]) return false;
    return true;
}

}  // namespace

bool ice_rule_holds(const EmbeddedGraph& g, const ArrowConfig& ac) {
    check_arrow_host(g, ac, "ice rule");
    for (int e = 0; e < g.n_edges(); ++e) {
        auto c = quad_corners(g, e);
        int out = ac.along[c[0]] + ac.along[c[3]] + (1 - ac.along[c[1]]) + (1 - ac.along[c[2]]);
        if (out != 2) return false;
    }
    return true;
}

VertexTypes classify_arrows(const EmbeddedGraph& g, const ArrowConfig& ac) {
    require(ice_rule_holds(g, ac), "classify arrows: ice rule required");
    VertexTypes t;
    for (int e = 0; e < g.n_edges(); ++e) {
        auto c = quad_corners(g, e);
        bool face_jump = ac.along[c[0]] != ac.along[c[1]];
        bool vertex_jump = ac.along[c[0]] != ac.along[c[2]];
        // The ice rule excludes both jumps at once.
        if (face_jump)
            ++t.n1;
        else if (vertex_jump)
            ++t.n2;
        else
            ++t.n3;
    }
    return t;
}

double arrow_weight(const EmbeddedGraph& g, const ArrowConfig& ac, const Params& p) {
    VertexTypes t = classify_arrows(g, ac);
    return std::pow(p.a, t.n1) * std::pow(p.b, t.n2);
}

HeightField arrow_height(const EmbeddedGraph& g, const ArrowConfig& ac, int base_value) {
    check_arrow_host(g, ac, "arrow height");
    require(base_value % 2 != 0, "arrow height: odd base value required");
    require(ice_rule_holds(g, ac), "arrow height: ice rule required");

    // Cells are vertices then faces, joined by one step per corner. Crossing
    // from the vertex side to the face side of a canonical arrow moves from
    // its left to its right, so the value drops by one.
    const int nv = g.n_vertices;
    const int n_cells = nv + g.n_faces;
    std::vector<std::vector<std::pair<int, int>>> adj(n_cells);
    for (int c = 0; c < g.n_corners(); ++c) {
        int v = g.corner_vertex(c);
        int u = nv + g.corner_face(c);
        int step = ac.along[c] ? -1 : 1;  // face value minus vertex value
        adj[v].push_back({u, step});
        adj[u].push_back({v, -step});
    }
    for (auto& list : adj) std::sort(list.begin(), list.end());

    std::vector<int> val(n_cells, 0);
    std::vector<char> seen(n_cells, 0);
    std::deque<int> frontier;
    const int base = nv + g.outer_face;
    val[base] = base_value;
    seen[base] = 1;
    frontier.push_back(base);
    while (!frontier.empty()) {
        int cell = frontier.front();
        frontier.pop_front();
        for (auto [next, step] : adj[cell])
            if (!seen[next]) {
                seen[next] = 1;
                val[next] = val[cell] + step;
                frontier.push_back(next);
            }
    }
    for (int cell = 0; cell < n_cells; ++cell)
        if (!seen[cell]) throw std::logic_error("arrow height: disconnected incidence graph");
    for (int c = 0; c < g.n_corners(); ++c) {
        int v = g.corner_vertex(c);
        int u = nv + g.corner_face(c);
        if (val[u] - val[v] != (ac.along[c] ? -1 : 1))
            throw std::logic_error("arrow height: arrows are not a conservative flow");
    }

    HeightField h;
    h.base_side = Side::dual;
    h.base = g.outer_face;
    h.base_value = base_value;
    h.vertex_value.assign(val.begin(), val.begin() + nv);
    h.face_value.assign(val.begin() + nv, val.end());
    return h;
}

ArrowConfig spins_to_arrows(const EmbeddedGraph& g, const SpinPair& sp) {
    require(g.topology == EmbeddedGraph::Topology::genus0, "spin arrows: genus-0 host required");
    require(static_cast<int>(sp.sigma.size()) == g.n_vertices &&
                static_cast<int>(sp.sigma_p.size()) == g.n_faces,
            "spin arrows: pair does not match the graph");
    for (double s : sp.sigma)
        require(s == 1.0 || s == -1.0, "spin arrows: vertex spins in {-1,+1} required");
    for (double s : sp.sigma_p)
        require(s == 1.0 || s == -1.0, "spin arrows: face spins in {-1,+1} required");
    require(sp.admissible(), "spin arrows: admissible pair required");

    ArrowConfig ac;
    ac.along.resize(g.n_corners());
    for (int c = 0; c < g.n_corners(); ++c) {
        int v = g.corner_vertex(c);
        int u = g.corner_face(c);
        ac.along[c] = sp.sigma[v] != sp.sigma_p[u] ? 1 : 0;
    }
    return ac;
}

SpinPair arrows_to_spins(const EmbeddedGraph& g, const ArrowConfig& ac, int sign) {
    require(sign == 1 || sign == -1, "arrow spins: sign must be +1 or -1");
    HeightField h = arrow_height(g, ac, sign);

    auto mod4 = [](double x) {
        int m = static_cast<int>(std::llround(x)) % 4;
        return m < 0 ? m + 4 : m;
    };
    std::vector<double> sigma(g.n_vertices), sigma_p(g.n_faces);
    for (int v = 0; v < g.n_vertices; ++v) sigma[v] = mod4(h.vertex_value[v]) == 0 ? 1.0 : -1.0;
    for (int u = 0; u < g.n_faces; ++u) sigma_p[u] = mod4(h.face_value[u]) == 1 ? 1.0 : -1.0;

    SpinPair sp(g, std::move(sigma), std::move(sigma_p));
    if (!sp.admissible())
        throw std::logic_error("arrow spins: reconstruction produced an inadmissible pair");
    return sp;
}

std::vector<ArrowConfig> enumerate_ice(const EmbeddedGraph& g) {
    require(g.topology == EmbeddedGraph::Topology::genus0,
            "ice enumeration: genus-0 host required");
    const int nc = g.n_corners();
    require(nc <= 24, "ice enumeration: at most 24 medial edges supported");

    std::vector<ArrowConfig> out;
    ArrowConfig ac;
    ac.along.resize(nc);
    for (uint64_t mask = 0; mask < (uint64_t(1) << nc); ++mask) {
        for (int c = 0; c < nc; ++c) ac.along[c] = (mask >> c) & 1;
        if (ice_rule_holds(g, ac)) out.push_back(ac);
    }
    return out;
}

std::string arrows_to_text(const ArrowConfig& ac) {
    std::string s(ac.along.size(), '0');
    for (std::size_t i = 0; i < ac.along.size(); ++i)
        if (ac.along[i]) s[i] = '1';
    return s;
}

ArrowConfig arrows_from_text(const EmbeddedGraph& g, const std::string& text) {
    require(static_cast<int>(text.size()) == g.n_corners(),
            "arrow text: one bit per medial edge required");
    ArrowConfig ac;
    ac.along.resize(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        require(text[i] == '0' || text[i] == '1', "arrow text: bits must be '0' or '1'");
        ac.along[i] = text[i] == '1' ? 1 : 0;
    }
    return ac;
}

Report check_six_vertex(const EmbeddedGraph& g, const Params& p, double tol) {
    Report r;
    r.identity = "six-vertex correspondence";
    r.graph = describe_graph(g);
    r.params = describe_params(p);

    require(g.topology == EmbeddedGraph::Topology::genus0, "six-vertex: genus-0 host required");
    require(p.q == 2 && p.qp == 2, "six-vertex: q = q' = 2 required");
    auto unit_pair = [](const std::vector<double>& alphabet) {
        return alphabet.size() == 2 && std::min(alphabet[0], alphabet[1]) == -1.0 &&
               std::max(alphabet[0], alphabet[1]) == 1.0;
    };
    require(unit_pair(p.Q) && unit_pair(p.Qp), "six-vertex: alphabets {-1,+1} required");

    double worst = 0.0;
    std::string witness;
    auto record = [&](double err, const std::string& what) {
        if (err > worst) worst = err;
        if (err > tol && witness.empty()) witness = what;
    };

    SigmaLaw sl = enumerate_sigma(g, p);
    std::vector<ArrowConfig> ice = enumerate_ice(g);
    record(2 * ice.size() == sl.joint.size() ? 0.0 : 1.0,
           "ice count " + std::to_string(ice.size()) + " vs pair count " +
               std::to_string(sl.joint.size()));

    // Arrow side: the two preimages, their round trips, and the weights.
    Distribution induced;
    for (const ArrowConfig& ac : ice) {
        SpinPair hi = arrows_to_spins(g, ac, 1);
        SpinPair lo = arrows_to_spins(g, ac, -1);

        bool joint_flip = true;
        for (int v = 0; v < g.n_vertices; ++v)
            joint_flip = joint_flip && hi.sigma[v] == -lo.sigma[v];
        for (int u = 0; u < g.n_faces; ++u)
            joint_flip = joint_flip && hi.sigma_p[u] == -lo.sigma_p[u];
        record(joint_flip ? 0.0 : 1.0, "preimages not a joint negation: " + arrows_to_text(ac));

        bool round_trip = spins_to_arrows(g, hi).along == ac.along &&
                          spins_to_arrows(g, lo).along == ac.along;
        record(round_trip ? 0.0 : 1.0, "arrow round trip: " + arrows_to_text(ac));

        VertexTypes t = classify_arrows(g, ac);
        bool type_match = t.n1 + t.n2 + t.n3 == g.n_edges() && t.n1 == hi.eta_p.count() &&
                          t.n2 == hi.eta.count();
        record(type_match ? 0.0 : 1.0, "vertex types vs contour sizes: " + arrows_to_text(ac));

        double w = arrow_weight(g, ac, p);
        record(rel_err(w, weight(hi, p)), "weight correspondence: " + arrows_to_text(ac));

        induced.add(key_spin_pair(hi), w / 2);
        induced.add(key_spin_pair(lo), w / 2);
    }
    double induced_tv = induced.total_variation(sl.joint);
    record(induced_tv, "induced spin-pair law");

    // Spin side: round trip through the matching base sign, and the two
    // height functions agree pointwise after one additive shift.
    const int outer = g.outer_face;
    for_each_admissible(g, p, [&](const SpinPair& sp, double) {
        ArrowConfig ac = spins_to_arrows(g, sp);
        int sign = sp.sigma_p[outer] > 0 ? 1 : -1;
        SpinPair back = arrows_to_spins(g, ac, sign);
        bool same = back.sigma == sp.sigma && back.sigma_p == sp.sigma_p;
        record(same ? 0.0 : 1.0, "spin round trip: " + key_spin_pair(sp));

        HeightField ha = arrow_height(g, ac, sign);
        HeightField hm = height(g, sp, Side::dual, outer, 0.0);
        const double shift = sign;
        double gap = 0.0;
        for (int v = 0; v < g.n_vertices; ++v)
            gap = std::max(gap, std::fabs(ha.vertex_value[v] - hm.vertex_value[v] - shift));
        for (int u = 0; u < g.n_faces; ++u)
            gap = std::max(gap, std::fabs(ha.face_value[u] - hm.face_value[u] - shift));
        record(gap, "height shift mismatch: " + key_spin_pair(sp));
    });

    r.max_error = worst;
    r.pass = worst <= tol;
    r.counterexample = witness;
    r.detail = "ice=" + std::to_string(ice.size()) + "; pairs=" + std::to_string(sl.joint.size()) +
               "; induced-tv=" + fmt17(induced_tv);
    return r;
}

CurrentTrace current_trace(const EmbeddedGraph& g, const SpinPair& sp, const EdgeSet& omega) {
    require(g.topology == EmbeddedGraph::Topology::genus0, "current trace: genus-0 host required");
    require(static_cast<int>(sp.sigma.size()) == g.n_vertices &&
                static_cast<int>(sp.sigma_p.size()) == g.n_faces,
            "current trace: pair does not match the graph");
    double level = 0.0;
    for (double s : sp.sigma_p) level = std::max(level, std::fabs(s));
    require(level > 0.0, "current trace: two-valued symmetric face spins required");
    for (double s : sp.sigma_p)
        require(std::fabs(s) == level, "current trace: two-valued symmetric face spins required");
    require(omega.side() == Side::primal && omega.universe() == g.n_edges(),
            "current trace: primal support required");
    require(sp.eta_p.subset_of(omega), "current trace: support must contain the odd part");

    // Contours of two-valued face spins are even on genus 0.
    std::vector<int> deg(g.n_vertices, 0);
    for (int e : sp.eta_p.elements()) {
        deg[g.quads[e].v1] ^= 1;
        deg[g.quads[e].v2] ^= 1;
    }
    for (int v = 0; v < g.n_vertices; ++v)
        if (deg[v]) throw std::logic_error("current trace: odd part has odd degree");
    return {sp.eta_p, omega};
}

Report check_current_law(const EmbeddedGraph& g, const Params& p, double cap, double tol) {
    Report r;
    r.identity = "current trace law";
    r.graph = describe_graph(g);
    r.params = describe_params(p);

    require(g.topology == EmbeddedGraph::Topology::genus0, "current law: genus-0 host required");
    require(p.qp == 2, "current law: q' = 2 required");
    require(p.q == 1 || p.q == 2, "current law: q in {1,2} required");
    require(std::fabs(p.a * p.a + p.b * p.b - 1.0) <= 1e-9,
            "current law: a^2 + b^2 = 1 required");
    const int ne = g.n_edges();
    require(ne <= 20 && std::pow(3.0, ne) <= cap, "current law: graph too large");

    double worst = 0.0;
    std::string witness;
    auto record = [&](double err, const std::string& what) {
        if (err > worst) worst = err;
        if (err > tol && witness.empty()) witness = what;
    };

    // Enumerated trace law, reading each trace through the validating
    // accessor so its invariants are exercised on every configuration.
    Distribution law;
    for_each_joint(
        g, p,
        [&](const SpinPair& sp, const EdgeSet& omega, const EdgeSet&, double w) {
            CurrentTrace ct = current_trace(g, sp, omega);
            law.add(key_edges(ct.eta) + ";" + key_edges(ct.omega), w);
        },
        cap);

    // Closed form over all sourceless traces: eta even, omega a superset.
    double x = 0.0;
    if (p.q == 2) x = (1.0 - std::sqrt(std::max(0.0, 1.0 - p.a * p.a))) / p.a;
    Distribution form;
    const uint64_t all = (uint64_t(1) << ne) - 1;
    std::vector<int> deg(g.n_vertices, 0);
    for (uint64_t m = 0; m <= all; ++m) {
        if (!even_subgraph_mask(g, m, deg)) continue;
        EdgeSet eta = EdgeSet::from_mask(Side::primal, ne, m);
        const int n_eta = eta.count();
        const uint64_t free_mask = all & ~m;
        uint64_t t = free_mask;
        while (true) {
            EdgeSet omega = EdgeSet::from_mask(Side::primal, ne, m | t);
            const int extra = omega.count() - n_eta;
            double w;
            if (p.q == 1) {
                w = std::pow(p.a, n_eta) * std::pow(1.0 - p.b, extra) *
                    std::pow(p.b, ne - omega.count());
            } else {
                int k = clusters(g, omega).k;
                w = std::pow(2.0, k + omega.count()) * std::pow(x, n_eta) *
                    std::pow(x * x, extra) * std::pow(1.0 - x * x, ne - omega.count());
            }
            form.add(key_edges(eta) + ";" + key_edges(omega), w);
            if (t == 0) break;
            t = (t - 1) & free_mask;
        }
    }

    for (const auto& kv : law.entries())
        if (!form.contains(kv.first))
            record(1.0, "trace outside the sourceless support: " + kv.first);
    for (const auto& kv : form.entries())
        if (!law.contains(kv.first))
            record(1.0, "sourceless trace missing from the law: " + kv.first);
    double gap = law.max_abs_diff(form);
    record(gap, "trace probabilities vs closed form");

    r.max_error = worst;
    r.pass = worst <= tol;
    r.counterexample = witness;
    r.detail = std::string(p.q == 1 ? "form=single-current" : "form=double-current; x=" + fmt17(x)) +
               "; traces=" + std::to_string(form.size()) + "; max-prob-gap=" + fmt17(gap);
    return r;
}

Distribution loop_marginal(const EmbeddedGraph& g, const Params& p, double cap) {
    require(g.topology == EmbeddedGraph::Topology::genus0, "loop marginal: genus-0 host required");
    for (int v = 0; v < g.n_vertices; ++v)
        require(g.degree(v) == 3, "loop marginal: 3-regular host required");
    require(p.b == 1.0, "loop marginal: b = 1 required");
    require(p.qp == 2, "loop marginal: q' = 2 required");

    Distribution d;
    std::vector<int> deg(g.n_vertices);
    for_each_admissible(
        g, p,
        [&](const SpinPair& sp, double w) {
            std::fill(deg.begin(), deg.end(), 0);
            for (int e : sp.eta_p.elements()) {
                ++deg[g.quads[e].v1];
                ++deg[g.quads[e].v2];
            }
            for (int v = 0; v < g.n_vertices; ++v)
                if (deg[v] != 0 && deg[v] != 2)
                    throw std::logic_error("loop marginal: contour degree outside {0,2}");
            d.add(key_edges(sp.eta_p), w);
        },
        cap);
    return d;
}

Report check_loop_marginal(const EmbeddedGraph& g, const Params& p, double cap, double tol) {
    Report r;
    r.identity = "loop weight marginal";
    r.graph = describe_graph(g);
    r.params = describe_params(p);

    Distribution law = loop_marginal(g, p, cap);
    const int ne = g.n_edges();
    require(ne <= 24, "loop marginal check: at most 24 edges supported");

    double worst = 0.0;
    std::string witness;
    auto record = [&](double err, const std::string& what) {
        if (err > worst) worst = err;
        if (err > tol && witness.empty()) witness = what;
    };

    // Loop-config support with both weight forms. Loops are the components
    // of the contour that contain an edge.
    const double n = p.q;
    const double x = p.a / n;
    Distribution loops_form, cluster_form;
    std::vector<int> deg(g.n_vertices);
    for (uint64_t m = 0; m < (uint64_t(1) << ne); ++m) {
        std::fill(deg.begin(), deg.end(), 0);
        for (int e = 0; e < ne; ++e)
            if ((m >> e) & 1) {
                ++deg[g.quads[e].v1];
                ++deg[g.quads[e].v2];
            }
        bool loop_config = true;
        for (int v = 0; v < g.n_vertices; ++v)
            if (deg[v] != 0 && deg[v] != 2) loop_config = false;
        if (!loop_config) continue;

        EdgeSet eta = EdgeSet::from_mask(Side::primal, ne, m);
        ClusterPartition cl = clusters(g, eta);
        std::vector<char> counted(g.n_vertices, 0);
        int loops = 0;
        for (int v = 0; v < g.n_vertices; ++v)
            if (deg[v] > 0 && !counted[cl.find(v)]) {
                counted[cl.find(v)] = 1;
                ++loops;
            }
        loops_form.add(key_edges(eta), std::pow(n, loops) * std::pow(x, eta.count()));
        cluster_form.add(key_edges(eta), std::pow(n, cl.k) * std::pow(p.a, eta.count()));
    }

    for (const auto& kv : law.entries())
        if (!loops_form.contains(kv.first))
            record(1.0, "contour outside the loop support: " + kv.first);
    for (const auto& kv : loops_form.entries())
        if (!law.contains(kv.first))
            record(1.0, "loop config missing from the law: " + kv.first);

    double loop_gap = law.max_abs_diff(loops_form);
    record(loop_gap, "probabilities vs loop form");
    double cluster_gap = law.max_abs_diff(cluster_form);
    record(cluster_gap, "probabilities vs cluster form");

    EdgeSet empty(Side::primal, ne);
    record(rel_err(loops_form.weight(key_edges(empty)), 1.0), "empty contour weight");

    r.max_error = worst;
    r.pass = worst <= tol;
    r.counterexample = witness;
    r.detail = "x=" + fmt17(x) + "; loop-configs=" + std::to_string(loops_form.size()) +
               "; loop-form-gap=" + fmt17(loop_gap) + "; cluster-form-gap=" + fmt17(cluster_gap);
    return r;
}

}  // namespace pottspair
