#include "pottspair/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "pottspair/rng.hpp"

namespace pottspair {

std::vector<double> default_alphabet(int q) {
    std::vector<double> out(q);
    for (int i = 0; i < q; ++i) out[i] = static_cast<double>(2 * i - (q - 1));
    return out;
}

Params::Params(int q_, int qp_, double a_, double b_)
    : Params(q_, qp_, a_, b_, default_alphabet(q_), default_alphabet(qp_)) {}

Params::Params(int q_, int qp_, double a_, double b_, std::vector<double> Q_,
               std::vector<double> Qp_)
    : q(q_), qp(qp_), a(a_), b(b_), Q(std::move(Q_)), Qp(std::move(Qp_)) {
    validate();
}

void Params::validate() const {
    if (q < 1 || qp < 1) throw std::invalid_argument("params: q and q' must be >= 1");
    if (!(a > 0.0) || a > 1.0 || !(b > 0.0) || b > 1.0)
        throw std::invalid_argument("params: a and b must lie in (0,1]");
    auto check_alphabet = [](const std::vector<double>& A, int n, const char* name) {
        if (static_cast<int>(A.size()) != n)
            throw std::invalid_argument(std::string("params: ") + name + " has wrong size");
        std::vector<double> s = A;
        std::sort(s.begin(), s.end());
        for (size_t i = 0; i + 1 < s.size(); ++i)
            if (s[i] == s[i + 1])
                throw std::invalid_argument(std::string("params: ") + name + " has duplicates");
        for (size_t i = 0; i < s.size(); ++i)
            if (s[i] != -s[s.size() - 1 - i])
                throw std::invalid_argument(std::string("params: ") + name +
                                            " is not symmetric under negation");
    };
    check_alphabet(Q, q, "Q");
    check_alphabet(Qp, qp, "Q'");
}

double Params::x_star() const {
    if (!has_x_star()) throw std::domain_error("x* undefined at a+b=1");
    return qp * a / (1.0 - a - b);
}

double Params::alpha() const {
    if (!has_alpha_beta()) throw std::domain_error("alpha undefined at a=1");
    return std::log((1.0 - a) / b);
}

double Params::beta() const {
    if (!has_alpha_beta()) throw std::domain_error("beta undefined at a=1");
    return std::log(1.0 + qp * a / (1.0 - a));
}

double Params::max_jump() const {
    double m = 0.0;
    for (double s : Qp) m = std::max(m, std::abs(s));
    return 2.0 * m;
}

double Params::moment_Q(int r) const {
    double m = 0.0;
    for (double s : Q) m += std::pow(s, r);
    return m / q;
}

double Params::moment_Qp(int r) const {
    double m = 0.0;
    for (double s : Qp) m += std::pow(s, r);
    return m / qp;
}

// ---------------------------------------------------------------------------
// Spin pairs

EdgeSet contours(const EmbeddedGraph& g, const std::vector<double>& spins, Side spin_side) {
    EdgeSet out(flip(spin_side), g.n_edges());
    for (int e = 0; e < g.n_edges(); ++e) {
        const Quad& q = g.quads[e];
        bool differ = spin_side == Side::primal ? spins[q.v1] != spins[q.v2]
                                                : spins[q.u1] != spins[q.u2];
        if (differ) out.set(e);
    }
    return out;
}

SpinPair::SpinPair(const EmbeddedGraph& g, std::vector<double> vertex_spins,
                   std::vector<double> face_spins)
    : sigma(std::move(vertex_spins)), sigma_p(std::move(face_spins)) {
    if (static_cast<int>(sigma.size()) != g.n_vertices ||
        static_cast<int>(sigma_p.size()) != g.n_faces)
        throw std::invalid_argument("spin pair: configuration sizes do not match the graph");
    refresh_contours(g);
}

void SpinPair::refresh_contours(const EmbeddedGraph& g) {
    eta = contours(g, sigma, Side::primal);
    eta_p = contours(g, sigma_p, Side::dual);
}

bool SpinPair::admissible() const {
    const auto& wa = eta.words();
    const auto& wb = eta_p.words();
    for (size_t i = 0; i < wa.size(); ++i)
        if (wa[i] & wb[i]) return false;
    return true;
}

double weight(const SpinPair& sp, const Params& p) {
    if (!sp.admissible())
        throw std::invalid_argument("weight: pair has a quad with jumps on both sides");
    return std::pow(p.a, sp.eta_p.count()) * std::pow(p.b, sp.eta.count());
}

// ---------------------------------------------------------------------------
// Heights

HeightField height(const EmbeddedGraph& g, const SpinPair& sp, Side base_side, int base,
                   double base_value) {
    if (g.topology != EmbeddedGraph::Topology::genus0)
        throw std::invalid_argument("height: genus-0 graph required");
    if (!sp.admissible()) throw std::invalid_argument("height: inadmissible pair");

    const int nV = g.n_vertices;
    const int n = nV + g.n_faces;  // combined cell ids: vertices then faces
    std::vector<double> val(n, 0.0);
    std::vector<char> seen(n, 0);

    int start = base_side == Side::primal ? base : nV + base;
    val[start] = base_value;
    seen[start] = 1;
    std::deque<int> queue{start};
    std::vector<int> nbr;
    while (!queue.empty()) {
        int c = queue.front();
        queue.pop_front();
        nbr.clear();
        if (c < nV) {
            for (int e : g.vertex_rotation[c]) {
                nbr.push_back(nV + g.quads[e].u1);
                nbr.push_back(nV + g.quads[e].u2);
            }
        } else {
            for (int e : g.face_rotation[c - nV]) {
                nbr.push_back(g.quads[e].v1);
                nbr.push_back(g.quads[e].v2);
            }
        }
        std::sort(nbr.begin(), nbr.end());
        nbr.erase(std::unique(nbr.begin(), nbr.end()), nbr.end());
        for (int d : nbr) {
            if (seen[d]) continue;
            seen[d] = 1;
            // value(face) = value(vertex) + sigma(vertex) * sigma_p(face)
            if (c < nV) val[d] = val[c] + sp.sigma[c] * sp.sigma_p[d - nV];
            else val[d] = val[c] - sp.sigma[d] * sp.sigma_p[c - nV];
            queue.push_back(d);
        }
    }

    HeightField hf;
    hf.base_side = base_side;
    hf.base = base;
    hf.base_value = base_value;
    hf.vertex_value.assign(val.begin(), val.begin() + nV);
    hf.face_value.assign(val.begin() + nV, val.end());

    // Consistency sweep over all four incidences of every quad.
    for (const Quad& q : g.quads)
        for (int v : {q.v1, q.v2})
            for (int u : {q.u1, q.u2})
                if (std::abs(hf.face_value[u] - hf.vertex_value[v] -
                             sp.sigma[v] * sp.sigma_p[u]) > 1e-9)
                    throw std::logic_error("height: increment rule failed after integration");
    return hf;
}

int connecting_edge(const EmbeddedGraph& g, int u1, int u2) {
    int best = -1;
    for (int e : g.face_rotation[u1])
        if (g.other_face(e, u1) == u2 && (best < 0 || e < best)) best = e;
    return best;
}

double height_increment_torus(const EmbeddedGraph& g, const SpinPair& sp,
                              const std::vector<int>& face_path) {
    if (g.topology != EmbeddedGraph::Topology::torus)
        throw std::invalid_argument("height increment: torus graph required");
    double sum = 0.0;
    for (size_t i = 0; i + 1 < face_path.size(); ++i) {
        int e = connecting_edge(g, face_path[i], face_path[i + 1]);
        if (e < 0) throw std::invalid_argument("height increment: faces not adjacent");
        double jump = sp.sigma_p[face_path[i + 1]] - sp.sigma_p[face_path[i]];
        if (jump != 0.0 && sp.sigma[g.quads[e].v1] != sp.sigma[g.quads[e].v2])
            throw std::logic_error("height increment: crossing edge with jumps on both sides");
        sum += sp.sigma[g.quads[e].v1] * jump;
    }
    return sum;
}

// ---------------------------------------------------------------------------
// Edge coupling

PercolationPair couple_percolation(const EmbeddedGraph& g, const SpinPair& sp, const Params& p,
                                   std::mt19937_64& rng) {
    assert(sp.eta.universe() == g.n_edges());
    EdgeSet omega(Side::primal, g.n_edges());
    EdgeSet omega_p(Side::dual, g.n_edges());
    const bool le1 = p.sum_le_one();
    for (int e = 0; e < g.n_edges(); ++e) {
        if (sp.eta_p.has(e)) {
            omega.set(e);  // forced open; the crossing dual edge stays closed
        } else if (sp.eta.has(e)) {
            omega_p.set(e);
        } else {
            double r = u01(rng);
            bool open_primal, open_dual;
            if (le1) {
                open_primal = r < p.a || r >= p.a + p.b;
                open_dual = r >= p.a;
            } else {
                open_primal = r < 1.0 - p.b;
                open_dual = r >= 1.0 - p.b && r < 2.0 - p.a - p.b;
            }
            if (open_primal) omega.set(e);
            if (open_dual) omega_p.set(e);
        }
    }
    PercolationPair pp;
    pp.omega = std::move(omega);
    pp.omega_p = std::move(omega_p);
    pp.cl_omega = clusters(g, pp.omega);
    pp.cl_omega_p = clusters(g, pp.omega_p);
    return pp;
}

bool coupling_consistent(const EmbeddedGraph& g, const SpinPair& sp, const Params& p,
                         const PercolationPair& pp) {
    if (!sp.eta_p.subset_of(pp.omega)) return false;
    if (!sp.eta.subset_of(pp.omega_p)) return false;
    EdgeSet dagger = pp.omega.complement();
    if (p.sum_le_one() && !dagger.subset_of(pp.omega_p)) return false;
    if (p.sum_ge_one() && !pp.omega_p.subset_of(dagger)) return false;
    for (int e = 0; e < g.n_edges(); ++e) {
        const Quad& q = g.quads[e];
        if (pp.omega.has(e) && sp.sigma[q.v1] != sp.sigma[q.v2]) return false;
        if (pp.omega_p.has(e) && sp.sigma_p[q.u1] != sp.sigma_p[q.u2]) return false;
    }
    return true;
}

double cluster_increment(const EmbeddedGraph& g, const SpinPair& sp,
                         const ClusterPartition& cl_omega, int cluster_root,
                         const std::vector<int>& face_path) {
    assert(cl_omega.side == Side::primal);
    double sum = 0.0;
    for (size_t i = 0; i + 1 < face_path.size(); ++i) {
        int e = connecting_edge(g, face_path[i], face_path[i + 1]);
        if (e < 0) throw std::invalid_argument("cluster increment: faces not adjacent");
        if (!sp.eta_p.has(e)) continue;
        if (cl_omega.find(g.quads[e].v1) != cluster_root) continue;
        sum += sp.sigma_p[face_path[i + 1]] - sp.sigma_p[face_path[i]];
    }
    return sum;
}

std::vector<int> canonical_face_path(const EmbeddedGraph& g, int u1, int u2) {
    std::vector<int> parent(g.n_faces, -1);
    std::vector<char> seen(g.n_faces, 0);
    seen[u1] = 1;
    std::deque<int> queue{u1};
    std::vector<int> nbr;
    while (!queue.empty() && !seen[u2]) {
        int u = queue.front();
        queue.pop_front();
        nbr.clear();
        for (int e : g.face_rotation[u]) nbr.push_back(g.other_face(e, u));
        std::sort(nbr.begin(), nbr.end());
        nbr.erase(std::unique(nbr.begin(), nbr.end()), nbr.end());
        for (int w : nbr)
            if (!seen[w]) {
                seen[w] = 1;
                parent[w] = u;
                queue.push_back(w);
            }
    }
    if (!seen[u2]) throw std::logic_error("face path: target unreachable");
    std::vector<int> path;
    for (int u = u2; u != -1; u = parent[u]) path.push_back(u);
    std::reverse(path.begin(), path.end());
    return path;
}

// ---------------------------------------------------------------------------
// Serialization

std::string spins_to_text(const EmbeddedGraph& g, const SpinPair& sp) {
    std::ostringstream os;
    os.precision(17);
    for (int v = 0; v < g.n_vertices; ++v) os << v << ' ' << sp.sigma[v] << '\n';
    for (int u = 0; u < g.n_faces; ++u) os << g.n_vertices + u << ' ' << sp.sigma_p[u] << '\n';
    return os.str();
}

SpinPair spins_from_text(const EmbeddedGraph& g, const std::string& text) {
    std::istringstream is(text);
    std::vector<double> sv(g.n_vertices), fv(g.n_faces);
    std::vector<char> got(g.n_vertices + g.n_faces, 0);
    int id;
    double value;
    while (is >> id >> value) {
        if (id < 0 || id >= g.n_vertices + g.n_faces)
            throw std::invalid_argument("spin text: cell id out of range");
        if (id < g.n_vertices) sv[id] = value;
        else fv[id - g.n_vertices] = value;
        got[id] = 1;
    }
    for (char c : got)
        if (!c) throw std::invalid_argument("spin text: missing cell");
    return SpinPair(g, std::move(sv), std::move(fv));
}

}  // namespace pottspair
