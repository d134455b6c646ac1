#include "pottspair/oracle.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pottspair {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Integer-exponent power evaluated by repeated multiplication, exact for the
// small exponents used here and well-defined for negative bases.
long double ipowl(long double base, int e) {
    if (e < 0) return 1.0L / ipowl(base, -e);
    long double r = 1.0L;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

double ipow(double base, int e) { return static_cast<double>(ipowl(base, e)); }

double rel_err(double l, double r) {
    return std::fabs(l - r) / std::max({std::fabs(l), std::fabs(r), 1.0});
}

// Relative gap between two probabilities with a floor so that matching
// near-zero entries compare as equal.
double prob_gap(double pa, double pb) {
    double scale = std::max({pa, pb, 1e-15});
    return std::fabs(pa - pb) / scale;
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Powers of a fixed base for exponents up to n.
std::vector<double> pow_table(double base, int n) {
    std::vector<double> t(n + 1);
    t[0] = 1.0;
    for (int i = 1; i <= n; ++i) t[i] = t[i - 1] * base;
    return t;
}

bool advance_digits(std::vector<int>& d, int base) {
    std::size_t i = 0;
    while (i < d.size() && ++d[i] == base) d[i++] = 0;
    return i < d.size();
}

}  // namespace

void Distribution::add(const std::string& key, double w) {
    if (w < 0.0 || !std::isfinite(w))
        throw std::invalid_argument("Distribution::add: weight must be finite and nonnegative");
    if (w == 0.0) return;
    w_[key] += w;
    total_ += w;
}

double Distribution::weight(const std::string& key) const {
    auto it = w_.find(key);
    return it == w_.end() ? 0.0 : it->second;
}

double Distribution::prob(const std::string& key) const {
    if (total_ <= 0.0) throw std::logic_error("Distribution::prob: empty distribution");
    return weight(key) / total_;
}

double Distribution::prob_sum() const {
    if (total_ <= 0.0) throw std::logic_error("Distribution::prob_sum: empty distribution");
    double s = 0.0;
    for (const auto& [k, w] : w_) s += w / total_;
    return s;
}

double Distribution::total_variation(const Distribution& o) const {
    if (total_ <= 0.0 || o.total_ <= 0.0)
        throw std::logic_error("Distribution::total_variation: empty distribution");
    double tv = 0.0;
    auto a = w_.begin();
    auto b = o.w_.begin();
    while (a != w_.end() || b != o.w_.end()) {
        if (b == o.w_.end() || (a != w_.end() && a->first < b->first)) {
            tv += a->second / total_;
            ++a;
        } else if (a == w_.end() || b->first < a->first) {
            tv += b->second / o.total_;
            ++b;
        } else {
            tv += std::fabs(a->second / total_ - b->second / o.total_);
            ++a;
            ++b;
        }
    }
    return 0.5 * tv;
}

double Distribution::max_abs_diff(const Distribution& o) const {
    if (total_ <= 0.0 || o.total_ <= 0.0)
        throw std::logic_error("Distribution::max_abs_diff: empty distribution");
    double m = 0.0;
    auto a = w_.begin();
    auto b = o.w_.begin();
    while (a != w_.end() || b != o.w_.end()) {
        if (b == o.w_.end() || (a != w_.end() && a->first < b->first)) {
            m = std::max(m, a->second / total_);
            ++a;
        } else if (a == w_.end() || b->first < a->first) {
            m = std::max(m, b->second / o.total_);
            ++b;
        } else {
            m = std::max(m, std::fabs(a->second / total_ - b->second / o.total_));
            ++a;
            ++b;
        }
    }
    return m;
}

std::string key_value(double v) { return fmt17(v); }

std::string key_spins(const std::vector<double>& spins) {
    std::string out;
    for (std::size_t i = 0; i < spins.size(); ++i) {
        if (i) out += ',';
        out += fmt17(spins[i]);
    }
    return out;
}

std::string key_edges(const EdgeSet& s) {
    std::string out(1, s.side() == Side::primal ? 'p' : 'd');
    char buf[20];
    for (uint64_t w : s.words()) {
        std::snprintf(buf, sizeof(buf), ":%016" PRIx64, w);
        out += buf;
    }
    return out;
}

std::string key_spin_pair(const SpinPair& sp) {
    return key_spins(sp.sigma) + ";" + key_spins(sp.sigma_p);
}

std::string key_joint(const SpinPair& sp, const EdgeSet& omega, const EdgeSet& omega_p) {
    return key_spin_pair(sp) + ";" + key_edges(omega) + ";" + key_edges(omega_p);
}

void for_each_admissible(const EmbeddedGraph& g, const Params& p,
                         const std::function<void(const SpinPair&, double)>& visit,
                         double cap) {
    p.validate();
    const int nv = g.n_vertices;
    const int nu = g.n_faces;
    const int ne = g.n_edges();
    double naive = std::pow(static_cast<double>(p.q), nv) * std::pow(static_cast<double>(p.qp), nu);
    if (naive > cap) throw std::length_error("for_each_admissible: state count exceeds cap");

    std::vector<double> pow_a = pow_table(p.a, ne);
    std::vector<double> pow_b = pow_table(p.b, ne);
    std::vector<int> sdig(nv, 0);
    std::vector<double> sigma(nv), sigma_p(nu);
    do {
        for (int v = 0; v < nv; ++v) sigma[v] = p.Q[sdig[v]];
        EdgeSet eta = contours(g, sigma, Side::primal);
        ClusterPartition cl = clusters(g, eta);
        std::vector<std::vector<int>> comps = cl.components();
        std::vector<int> fdig(comps.size(), 0);
        do {
            for (std::size_t i = 0; i < comps.size(); ++i)
                for (int u : comps[i]) sigma_p[u] = p.Qp[fdig[i]];
            SpinPair sp(g, sigma, sigma_p);
            double w = pow_a[sp.eta_p.count()] * pow_b[sp.eta.count()];
            visit(sp, w);
        } while (advance_digits(fdig, p.qp));
    } while (advance_digits(sdig, p.q));
}

void for_each_joint(const EmbeddedGraph& g, const Params& p,
                    const std::function<void(const SpinPair&, const EdgeSet& omega,
                                             const EdgeSet& omega_p, double)>& visit,
                    double cap) {
    struct DiceState {
        bool open_p, open_d;
        double prob;
    };
    std::vector<DiceState> states;
    if (p.a + p.b <= 1.0)
        states = {{true, false, p.a}, {false, true, p.b}, {true, true, 1.0 - (p.a + p.b)}};
    else
        states = {{true, false, 1.0 - p.b}, {false, true, 1.0 - p.a}, {false, false, p.a + p.b - 1.0}};
    states.erase(std::remove_if(states.begin(), states.end(),
                                [](const DiceState& s) { return s.prob == 0.0; }),
                 states.end());
    const int ns = static_cast<int>(states.size());
    const int ne = g.n_edges();
    double count = 0.0;

    for_each_admissible(
        g, p,
        [&](const SpinPair& sp, double w) {
            std::vector<int> free_edges;
            for (int e = 0; e < ne; ++e)
                if (!sp.eta.has(e) && !sp.eta_p.has(e)) free_edges.push_back(e);
            std::vector<int> dig(free_edges.size(), 0);
            do {
                EdgeSet omega = sp.eta_p;
                EdgeSet omega_p = sp.eta;
                double prob = 1.0;
                for (std::size_t i = 0; i < free_edges.size(); ++i) {
                    const DiceState& st = states[dig[i]];
                    if (st.open_p) omega.set(free_edges[i]);
                    if (st.open_d) omega_p.set(free_edges[i]);
                    prob *= st.prob;
                }
                if (++count > cap) throw std::length_error("for_each_joint: visit count exceeds cap");
                visit(sp, omega, omega_p, w * prob);
            } while (advance_digits(dig, ns));
        },
        cap);
}

SigmaLaw enumerate_sigma(const EmbeddedGraph& g, const Params& p, double cap) {
    SigmaLaw law;
    const bool planar = g.topology == EmbeddedGraph::Topology::genus0;
    if (planar) law.face_height.resize(g.n_faces);
    for_each_admissible(
        g, p,
        [&](const SpinPair& sp, double w) {
            law.Z += w;
            law.joint.add(key_spin_pair(sp), w);
            law.sigma.add(key_spins(sp.sigma), w);
            law.sigma_p.add(key_spins(sp.sigma_p), w);
            law.eta.add(key_edges(sp.eta), w);
            law.eta_p.add(key_edges(sp.eta_p), w);
            if (planar) {
                HeightField hf = height(g, sp, Side::dual, g.outer_face, 0.0);
                law.height_field.add(key_spins(hf.vertex_value) + ";" + key_spins(hf.face_value), w);
                for (int u = 0; u < g.n_faces; ++u)
                    law.face_height[u].add(key_value(hf.face_value[u]), w);
            }
        },
        cap);
    return law;
}

JointLaw enumerate_joint(const EmbeddedGraph& g, const Params& p, double cap) {
    JointLaw law;
    for_each_joint(
        g, p,
        [&](const SpinPair& sp, const EdgeSet& omega, const EdgeSet& omega_p, double w) {
            law.Z += w;
            law.full.add(key_joint(sp, omega, omega_p), w);
            law.spin_pair.add(key_spin_pair(sp), w);
            law.omega.add(key_edges(omega), w);
            law.omega_p.add(key_edges(omega_p), w);
        },
        cap);
    return law;
}

Multigraph primal_multigraph(const EmbeddedGraph& g) {
    Multigraph mg;
    mg.n_vertices = g.n_vertices;
    for (const Quad& q : g.quads) mg.edges.push_back({q.v1, q.v2});
    return mg;
}

Multigraph primal_subgraph(const EmbeddedGraph& g, const EdgeSet& omega) {
    require(omega.side() == Side::primal, "primal_subgraph: edge set must be primal");
    Multigraph mg;
    mg.n_vertices = g.n_vertices;
    for (int e : omega.elements()) mg.edges.push_back({g.quads[e].v1, g.quads[e].v2});
    return mg;
}

Multigraph dual_multigraph(const EmbeddedGraph& g) {
    Multigraph mg;
    mg.n_vertices = g.n_faces;
    for (const Quad& q : g.quads) mg.edges.push_back({q.u1, q.u2});
    return mg;
}

Multigraph dual_of_subgraph(const EmbeddedGraph& g, const EdgeSet& omega) {
    require(omega.side() == Side::primal, "dual_of_subgraph: edge set must be primal");
    ClusterPartition cp = clusters(g, omega.complement());
    std::vector<int> dense = cp.dense_ids();
    Multigraph mg;
    mg.n_vertices = cp.k;
    for (int e : omega.elements())
        mg.edges.push_back({dense[g.quads[e].u1], dense[g.quads[e].u2]});
    return mg;
}

PartitionValue potts_Z(const Multigraph& mg, int q, double x) {
    const int m = static_cast<int>(mg.edges.size());
    if (m > 30) throw std::length_error("potts_Z: more than 30 edges");
    if (x == -1.0) throw std::domain_error("potts_Z: x = -1 is outside the subset-sum route");
    require(q >= 1, "potts_Z: q must be >= 1");
    require(mg.n_vertices >= 0, "potts_Z: negative vertex count");
    for (const auto& [u, v] : mg.edges)
        require(u >= 0 && u < mg.n_vertices && v >= 0 && v < mg.n_vertices,
                "potts_Z: edge endpoint out of range");

    std::vector<long double> xpow(m + 1), qpow(mg.n_vertices + 1);
    xpow[0] = 1.0L;
    for (int i = 1; i <= m; ++i) xpow[i] = xpow[i - 1] * static_cast<long double>(x);
    qpow[0] = 1.0L;
    for (int i = 1; i <= mg.n_vertices; ++i) qpow[i] = qpow[i - 1] * static_cast<long double>(q);

    long double sum = 0.0L, abs_sum = 0.0L;
    std::vector<int> parent(mg.n_vertices);
    const uint64_t limit = uint64_t(1) << m;
    for (uint64_t mask = 0; mask < limit; ++mask) {
        for (int v = 0; v < mg.n_vertices; ++v) parent[v] = v;
        int k = mg.n_vertices;
        int bits = 0;
        uint64_t rest = mask;
        while (rest) {
            int e = __builtin_ctzll(rest);
            rest &= rest - 1;
            ++bits;
            int ra = mg.edges[e].first;
            while (parent[ra] != ra) ra = parent[ra] = parent[parent[ra]];
            int rb = mg.edges[e].second;
            while (parent[rb] != rb) rb = parent[rb] = parent[parent[rb]];
            if (ra != rb) {
                parent[rb] = ra;
                --k;
            }
        }
        long double term = xpow[bits] * qpow[k];
        sum += term;
        abs_sum += fabsl(term);
    }
    PartitionValue pv;
    pv.definition = "potts-hightemp";
    pv.value = static_cast<double>(sum / ipowl(static_cast<long double>(x) + 1.0L, m));
    pv.condition = sum == 0.0L ? std::numeric_limits<double>::infinity()
                               : static_cast<double>(abs_sum / fabsl(sum));
    return pv;
}

PartitionValue pair_Z(const EmbeddedGraph& g, const Params& p, double cap) {
    PartitionValue pv;
    pv.definition = "pair-model";
    long double sum = 0.0L;
    for_each_admissible(g, p, [&](const SpinPair&, double w) { sum += w; }, cap);
    pv.value = static_cast<double>(sum);
    pv.condition = 1.0;
    return pv;
}

std::string describe_graph(const EmbeddedGraph& g) {
    const int nv = g.n_vertices, ne = g.n_edges(), nf = g.n_faces;
    char buf[96];
    if (g.topology == EmbeddedGraph::Topology::torus) {
        int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(nv))));
        if (n * n == nv && ne == 2 * nv && nf == nv) {
            std::snprintf(buf, sizeof(buf), "torus(%d)", n);
            return buf;
        }
        std::snprintf(buf, sizeof(buf), "torus(V=%d,E=%d,F=%d)", nv, ne, nf);
        return buf;
    }
    int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(nv))));
    if (s * s == nv && s % 2 == 0 && ne == 2 * s * (s - 1) && nf == (s - 1) * (s - 1) + 1) {
        std::snprintf(buf, sizeof(buf), "box(%d)", s / 2);
        return buf;
    }
    if (nv == 6 && ne == 9 && nf == 5) return "prism";
    std::snprintf(buf, sizeof(buf), "genus0(V=%d,E=%d,F=%d)", nv, ne, nf);
    return buf;
}

std::string describe_params(const Params& p) {
    std::string out = "q=" + std::to_string(p.q) + ",qp=" + std::to_string(p.qp) +
                      ",a=" + fmt17(p.a) + ",b=" + fmt17(p.b);
    if (p.Q != default_alphabet(p.q)) out += ",Q=[" + key_spins(p.Q) + "]";
    if (p.Qp != default_alphabet(p.qp)) out += ",Qp=[" + key_spins(p.Qp) + "]";
    return out;
}

std::string Report::to_json() const {
    nlohmann::json j;
    j["identity"] = identity;
    j["graph"] = graph;
    j["params"] = params;
    j["max_error"] = max_error;
    j["pass"] = pass;
    if (!counterexample.empty()) j["counterexample"] = counterexample;
    if (!detail.empty()) j["detail"] = detail;
    return j.dump();
}

Report check_potts_duality(const EmbeddedGraph& g, int q, double x, double tol) {
    Report r;
    r.identity = "potts-duality";
    r.graph = describe_graph(g);
    r.params = "q=" + std::to_string(q) + ",x=" + fmt17(x);
    require(g.topology == EmbeddedGraph::Topology::genus0, "check_potts_duality: genus 0 only");
    require(x != 0.0 && x != -1.0, "check_potts_duality: x must differ from 0 and -1");
    require(q / x != -1.0, "check_potts_duality: dual argument q/x hits -1");

    PartitionValue zl = potts_Z(primal_multigraph(g), q, x);
    PartitionValue zr = potts_Z(dual_multigraph(g), q, q / x);
    const int ne = g.n_edges();
    long double pref = ipowl(static_cast<long double>(q), g.n_vertices - ne - 1) *
                       ipowl((static_cast<long double>(x) + q) / (static_cast<long double>(x) + 1.0L), ne);
    double rhs = static_cast<double>(pref * static_cast<long double>(zr.value));
    r.max_error = rel_err(zl.value, rhs);
    r.pass = r.max_error <= tol;
    if (std::max(zl.condition, zr.condition) > 1e6)
        r.detail = "cancellation condition " + fmt17(std::max(zl.condition, zr.condition));
    return r;
}

Report check_resummation(const EmbeddedGraph& g, int q, double x, double t, double tol) {
    Report r;
    r.identity = "subset-resummation";
    r.graph = describe_graph(g);
    r.params = "q=" + std::to_string(q) + ",x=" + fmt17(x) + ",t=" + fmt17(t);
    require(t != -1.0, "check_resummation: t = -1 is degenerate");
    require(x != -1.0, "check_resummation: x = -1 is outside the subset route");
    const int ne = g.n_edges();
    require(ne <= 24, "check_resummation: more than 24 edges");
    double u = t * x / (1.0 + t);
    require(u != -1.0, "check_resummation: transformed argument hits -1");

    Multigraph full = primal_multigraph(g);
    long double lhs = 0.0L, abs_sum = 0.0L;
    const uint64_t limit = uint64_t(1) << ne;
    for (uint64_t mask = 0; mask < limit; ++mask) {
        Multigraph sub;
        sub.n_vertices = g.n_vertices;
        uint64_t rest = mask;
        while (rest) {
            int e = __builtin_ctzll(rest);
            rest &= rest - 1;
            sub.edges.push_back(full.edges[e]);
        }
        int bits = static_cast<int>(sub.edges.size());
        long double term = ipowl(t, bits) * ipowl(static_cast<long double>(x) + 1.0L, bits) *
                           static_cast<long double>(potts_Z(sub, q, x).value);
        lhs += term;
        abs_sum += fabsl(term);
    }
    long double rhs = ipowl(1.0L + static_cast<long double>(t) * (static_cast<long double>(x) + 1.0L), ne) *
                      static_cast<long double>(potts_Z(full, q, u).value);
    r.max_error = rel_err(static_cast<double>(lhs), static_cast<double>(rhs));
    r.pass = r.max_error <= tol;
    double cond = lhs == 0.0L ? std::numeric_limits<double>::infinity()
                              : static_cast<double>(abs_sum / fabsl(lhs));
    if (cond > 1e6) r.detail = "cancellation condition " + fmt17(cond);
    return r;
}

Report check_omega_marginals(const EmbeddedGraph& g, const Params& p, double cap, double tol) {
    Report r;
    r.identity = "open-edge-marginal-forms";
    r.graph = describe_graph(g);
    r.params = describe_params(p);
    require(g.topology == EmbeddedGraph::Topology::genus0, "check_omega_marginals: genus 0 only");
    const int ne = g.n_edges();
    const int nu = g.n_faces;
    require(ne <= 24, "check_omega_marginals: more than 24 edges");
    if (std::ldexp(std::pow(static_cast<double>(p.qp), nu), ne) > cap)
        throw std::length_error("check_omega_marginals: form enumeration exceeds cap");

    JointLaw jl = enumerate_joint(g, p, cap);

    const uint64_t limit = uint64_t(1) << ne;
    const bool have_dual_z = p.b != 1.0;                      // dual Potts argument != -1
    const bool have_primal_z = (p.a + p.b != 1.0) && !(p.qp == 1 && p.b == 1.0);
    std::vector<double> t_sum(limit), t_dual(limit), t_primal(limit), t_fk(limit);
    std::vector<double> pow_a = pow_table(p.a, ne);
    std::vector<double> pow_b = pow_table(p.b, ne);
    std::vector<double> pow_1mb = pow_table(1.0 - p.b, ne);
    std::vector<double> qpow = pow_table(static_cast<double>(p.q), g.n_vertices);

    std::vector<double> sigma_p(nu);
    for (uint64_t mask = 0; mask < limit; ++mask) {
        EdgeSet om = EdgeSet::from_mask(Side::primal, ne, mask);
        const int open = om.count();
        const int k = clusters(g, om).k;

        // Contour-summed form: q^{k} b^{|E \ omega|} sum over admissible
        // face configurations with contours inside omega.
        double s = 0.0;
        std::vector<int> fdig(nu, 0);
        do {
            for (int uu = 0; uu < nu; ++uu) sigma_p[uu] = p.Qp[fdig[uu]];
            EdgeSet etp = contours(g, sigma_p, Side::dual);
            if (etp.subset_of(om)) s += pow_a[etp.count()] * pow_1mb[open - etp.count()];
        } while (advance_digits(fdig, p.qp));
        t_sum[mask] = qpow[k] * pow_b[ne - open] * s;

        if (have_dual_z)
            t_dual[mask] = qpow[k] * pow_1mb[open] * pow_b[ne - open] *
                           potts_Z(dual_of_subgraph(g, om), p.qp, (1.0 - p.a - p.b) / p.a).value;
        if (have_primal_z)
            t_primal[mask] = qpow[k] *
                             ipow((1.0 - (1.0 - p.qp) * p.a - p.b) / p.b, open) *
                             potts_Z(primal_subgraph(g, om), p.qp,
                                     p.qp * p.a / (1.0 - p.a - p.b)).value;
        if (p.qp == 1) t_fk[mask] = qpow[k] * pow_1mb[open] * pow_b[ne - open];
    }

    auto compare = [&](const std::vector<double>& form, const char* name) {
        double total = 0.0;
        for (double v : form) total += v;
        double worst = 0.0;
        for (uint64_t mask = 0; mask < limit; ++mask) {
            EdgeSet om = EdgeSet::from_mask(Side::primal, ne, mask);
            double pe = jl.omega.weight(key_edges(om)) / jl.omega.total();
            worst = std::max(worst, prob_gap(pe, form[mask] / total));
        }
        r.max_error = std::max(r.max_error, worst);
        r.detail += std::string(name) + "=" + fmt17(worst) + "; ";
    };
    compare(t_sum, "contour-sum");
    if (have_dual_z)
        compare(t_dual, "dual-Z");
    else
        r.detail += "dual-Z skipped (argument -1); ";
    if (have_primal_z)
        compare(t_primal, "primal-Z");
    else
        r.detail += "primal-Z skipped (degenerate argument); ";
    if (p.qp == 1) compare(t_fk, "fk-q");

    r.pass = r.max_error <= tol;
    return r;
}

Report check_fk_reduction(const EmbeddedGraph& g, const Params& p, double cap, double tol) {
    Report r;
    r.identity = "fk-reduction";
    r.graph = describe_graph(g);
    r.params = describe_params(p);
    require(p.a + p.b == 1.0, "check_fk_reduction: requires a + b = 1");
    const int ne = g.n_edges();
    require(ne <= 24, "check_fk_reduction: more than 24 edges");
    const bool planar = g.topology == EmbeddedGraph::Topology::genus0;

    JointLaw jl = enumerate_joint(g, p, cap);
    const double pfk = p.p_fk();
    std::vector<double> pow_p = pow_table(pfk, ne);
    std::vector<double> pow_1mp = pow_table(1.0 - pfk, ne);

    const uint64_t limit = uint64_t(1) << ne;
    std::vector<double> form(limit);
    for (uint64_t mask = 0; mask < limit; ++mask) {
        EdgeSet om = EdgeSet::from_mask(Side::primal, ne, mask);
        const int open = om.count();
        const int k = clusters(g, om).k;
        double f = ipow(static_cast<double>(p.q) * p.qp, k) * pow_p[open] * pow_1mp[ne - open];
        if (!planar) f *= ipow(static_cast<double>(p.qp), -torus_delta(g, om));
        form[mask] = f;
    }
    double total = 0.0;
    for (double v : form) total += v;
    double worst = 0.0;
    for (uint64_t mask = 0; mask < limit; ++mask) {
        EdgeSet om = EdgeSet::from_mask(Side::primal, ne, mask);
        double pe = jl.omega.weight(key_edges(om)) / jl.omega.total();
        worst = std::max(worst, prob_gap(pe, form[mask] / total));
    }
    r.max_error = worst;
    r.detail = std::string(planar ? "fk-form" : "torus-form") + "=" + fmt17(worst) + "; ";

    if (planar) {
        // Spin reconstruction: uniform spins on the clusters of omega and of
        // the complementary dual set reproduce the pair law.
        SigmaLaw sl = enumerate_sigma(g, p, cap);
        Distribution rec;
        std::vector<double> sigma(g.n_vertices), sigma_p(g.n_faces);
        for (uint64_t mask = 0; mask < limit; ++mask) {
            EdgeSet om = EdgeSet::from_mask(Side::primal, ne, mask);
            ClusterPartition clv = clusters(g, om);
            ClusterPartition clf = clusters(g, om.complement());
            std::vector<std::vector<int>> vcomp = clv.components();
            std::vector<std::vector<int>> fcomp = clf.components();
            double w = form[mask] / ipow(static_cast<double>(p.q), clv.k) /
                       ipow(static_cast<double>(p.qp), clf.k);
            std::vector<int> vdig(vcomp.size(), 0);
            do {
                for (std::size_t i = 0; i < vcomp.size(); ++i)
                    for (int v : vcomp[i]) sigma[v] = p.Q[vdig[i]];
                std::vector<int> fdig(fcomp.size(), 0);
                do {
                    for (std::size_t i = 0; i < fcomp.size(); ++i)
                        for (int u : fcomp[i]) sigma_p[u] = p.Qp[fdig[i]];
                    rec.add(key_spins(sigma) + ";" + key_spins(sigma_p), w);
                } while (advance_digits(fdig, p.qp));
            } while (advance_digits(vdig, p.q));
        }
        double tv = rec.total_variation(sl.joint);
        r.max_error = std::max(r.max_error, tv);
        r.detail += "reconstruction-tv=" + fmt17(tv) + "; ";
    } else if (p.q == p.qp && p.a == p.b) {
        // Balanced torus duality: the complementary dual configuration obeys
        // the same closed form with dual-side statistics.
        Distribution dual_law;
        std::vector<double> dual_form(limit);
        for (uint64_t mask = 0; mask < limit; ++mask) {
            EdgeSet om = EdgeSet::from_mask(Side::primal, ne, mask);
            EdgeSet dg = om.complement();
            dual_law.add(key_edges(dg), jl.omega.weight(key_edges(om)));
            uint64_t dmask = dg.words()[0];
            dual_form[dmask] = ipow(static_cast<double>(p.q) * p.qp, clusters(g, dg).k) *
                               ipow(static_cast<double>(p.qp), -torus_delta(g, dg)) *
                               pow_p[dg.count()] * pow_1mp[ne - dg.count()];
        }
        double dtotal = 0.0;
        for (double v : dual_form) dtotal += v;
        double dworst = 0.0;
        for (uint64_t mask = 0; mask < limit; ++mask) {
            EdgeSet dg = EdgeSet::from_mask(Side::dual, ne, mask);
            double pe = dual_law.weight(key_edges(dg)) / dual_law.total();
            dworst = std::max(dworst, prob_gap(pe, dual_form[mask] / dtotal));
        }
        r.max_error = std::max(r.max_error, dworst);
        r.detail += "dual-side-form=" + fmt17(dworst) + "; ";

        // Equality in law of the invariant vector (|s|, k, delta) for the
        // open set and its complementary dual.
        Distribution inv_p, inv_d;
        double sym = 0.0;
        for (uint64_t mask = 0; mask < limit; ++mask) {
            EdgeSet om = EdgeSet::from_mask(Side::primal, ne, mask);
            EdgeSet dg = om.complement();
            double w = jl.omega.weight(key_edges(om));
            if (w > 0.0) {
                inv_p.add(std::to_string(om.count()) + "," + std::to_string(clusters(g, om).k) +
                              "," + std::to_string(torus_delta(g, om)),
                          w);
                inv_d.add(std::to_string(dg.count()) + "," + std::to_string(clusters(g, dg).k) +
                              "," + std::to_string(torus_delta(g, dg)),
                          w);
            }
            EdgeSet comp = EdgeSet::from_mask(Side::primal, ne, ~mask & (limit - 1));
            sym = std::max(sym, std::fabs(jl.omega.weight(key_edges(om)) -
                                          jl.omega.weight(key_edges(comp))) /
                                    jl.omega.total());
        }
        double itv = inv_p.total_variation(inv_d);
        r.max_error = std::max(r.max_error, itv);
        r.detail += "invariant-law-tv=" + fmt17(itv) + "; mask-complement-gap=" + fmt17(sym) + "; ";
    }

    r.pass = r.max_error <= tol;
    return r;
}

Report check_unconstrained_equivalence(const EmbeddedGraph& g, const Params& p, double cap,
                                       double tol) {
    Report r;
    r.identity = "unconstrained-equivalence";
    r.graph = describe_graph(g);
    r.params = describe_params(p);
    require(g.topology == EmbeddedGraph::Topology::genus0,
            "check_unconstrained_equivalence: genus 0 only");
    require(p.a < 1.0, "check_unconstrained_equivalence: requires a < 1");
    const int nv = g.n_vertices;
    const int ne = g.n_edges();
    const int qq = p.q * p.qp;
    if (std::pow(static_cast<double>(qq), nv) > cap)
        throw std::length_error("check_unconstrained_equivalence: state count exceeds cap");

    SigmaLaw sl = enumerate_sigma(g, p, cap);

    const double w_same_diff = (1.0 - p.a) / p.b;
    const double w_same_same = (1.0 + (p.qp - 1) * p.a) / p.b;
    Distribution smarg;
    std::vector<int> dig(nv, 0);
    std::vector<double> s(nv);
    std::vector<int> sp(nv);
    do {
        for (int v = 0; v < nv; ++v) {
            s[v] = p.Q[dig[v] % p.q];
            sp[v] = dig[v] / p.q;
        }
        double w = 1.0;
        for (int e = 0; e < ne; ++e) {
            const Quad& qd = g.quads[e];
            if (s[qd.v1] != s[qd.v2]) continue;
            w *= sp[qd.v1] == sp[qd.v2] ? w_same_same : w_same_diff;
        }
        smarg.add(key_spins(s), w);
    } while (advance_digits(dig, qq));

    double tv = smarg.total_variation(sl.sigma);
    r.max_error = tv;
    r.detail = "two-layer-tv=" + fmt17(tv) + "; ";

    if (p.a + p.b == 1.0) {
        // Single merged layer: a qq'-state Potts model whose spin reduced
        // mod q reproduces the vertex marginal.
        const double w_equal = 1.0 + p.qp * p.a / (1.0 - p.a);
        Distribution third;
        std::fill(dig.begin(), dig.end(), 0);
        do {
            for (int v = 0; v < nv; ++v) s[v] = p.Q[dig[v] % p.q];
            double w = 1.0;
            for (int e = 0; e < ne; ++e)
                if (dig[g.quads[e].v1] == dig[g.quads[e].v2]) w *= w_equal;
            third.add(key_spins(s), w);
        } while (advance_digits(dig, qq));
        double tv3 = third.total_variation(sl.sigma);
        r.max_error = std::max(r.max_error, tv3);
        r.detail += "merged-potts-tv=" + fmt17(tv3) + "; ";
    }

    r.pass = r.max_error <= tol;
    return r;
}

FkgInput omega_marginal_table(const EmbeddedGraph& g, const Params& p, double cap) {
    const int ne = g.n_edges();
    require(ne <= 26, "omega_marginal_table: too many edges for a dense table");
    FkgInput in;
    in.name = "omega-marginal " + describe_graph(g) + " " + describe_params(p);
    in.n_sites = ne;
    in.table.assign(uint64_t(1) << ne, 0.0);
    for_each_joint(
        g, p,
        [&](const SpinPair&, const EdgeSet& omega, const EdgeSet&, double w) {
            in.table[omega.words()[0]] += w;
        },
        cap);
    return in;
}

FkgInput omega_marginal_form_table(const EmbeddedGraph& g, const Params& p, double cap) {
    p.validate();
    require(g.topology == EmbeddedGraph::Topology::genus0,
            "omega_marginal_form_table: genus 0 only");
    const int ne = g.n_edges();
    const int nu = g.n_faces;
    require(ne <= 24, "omega_marginal_form_table: more than 24 edges");
    if (std::pow(static_cast<double>(p.qp), nu) > cap)
        throw std::length_error("omega_marginal_form_table: face state count exceeds cap");

    const uint64_t limit = uint64_t(1) << ne;
    std::vector<double> pow_a = pow_table(p.a, ne);
    std::vector<double> pow_b = pow_table(p.b, ne);
    std::vector<double> pow_1mb = pow_table(1.0 - p.b, ne);
    std::vector<double> qpow = pow_table(static_cast<double>(p.q), g.n_vertices);

    // Contour-summed inner factor U(S) = sum over face configurations with
    // contours inside S of a^{|contours|} (1-b)^{|S| - |contours|}, built by
    // spreading each configuration over the supersets of its contour set.
    std::vector<double> inner(limit, 0.0);
    std::vector<int> dig(nu, 0);
    std::vector<double> sigma_p(nu);
    do {
        for (int u = 0; u < nu; ++u) sigma_p[u] = p.Qp[dig[u]];
        EdgeSet etp = contours(g, sigma_p, Side::dual);
        const uint64_t base = etp.words()[0];
        const uint64_t free_mask = ~base & (limit - 1);
        const double wa = pow_a[etp.count()];
        uint64_t t = 0;
        while (true) {
            inner[base | t] += wa * pow_1mb[__builtin_popcountll(t)];
            if (t == free_mask) break;
            t = (t - free_mask) & free_mask;
        }
    } while (advance_digits(dig, p.qp));

    FkgInput in;
    in.name = "omega-marginal-form " + describe_graph(g) + " " + describe_params(p);
    in.n_sites = ne;
    in.table.assign(limit, 0.0);
    std::vector<int> parent(g.n_vertices);
    for (uint64_t m = 0; m < limit; ++m) {
        for (int v = 0; v < g.n_vertices; ++v) parent[v] = v;
        int k = g.n_vertices;
        uint64_t rest = m;
        while (rest) {
            int e = __builtin_ctzll(rest);
            rest &= rest - 1;
            int ra = g.quads[e].v1;
            while (parent[ra] != ra) ra = parent[ra] = parent[parent[ra]];
            int rb = g.quads[e].v2;
            while (parent[rb] != rb) rb = parent[rb] = parent[parent[rb]];
            if (ra != rb) {
                parent[rb] = ra;
                --k;
            }
        }
        in.table[m] = qpow[k] * pow_b[ne - __builtin_popcountll(m)] * inner[m];
    }
    return in;
}

FkgInput sigma_marginal_table(const EmbeddedGraph& g, const Params& p, double cap) {
    require(p.q == 2, "sigma_marginal_table: q = 2 only");
    const int nv = g.n_vertices;
    require(nv <= 26, "sigma_marginal_table: too many vertices for a dense table");
    FkgInput in;
    in.name = "sigma-marginal " + describe_graph(g) + " " + describe_params(p);
    in.n_sites = nv;
    in.table.assign(uint64_t(1) << nv, 0.0);
    for_each_admissible(
        g, p,
        [&](const SpinPair& sp, double w) {
            uint64_t mask = 0;
            for (int v = 0; v < nv; ++v)
                if (sp.sigma[v] > 0.0) mask |= uint64_t(1) << v;
            in.table[mask] += w;
        },
        cap);
    return in;
}

Report check_fkg_lattice(const FkgInput& in, double tol) {
    Report r;
    r.identity = "fkg-lattice";
    r.graph = in.name;
    r.params = "n_sites=" + std::to_string(in.n_sites);
    const int n = in.n_sites;
    require(n >= 1 && n <= 26, "check_fkg_lattice: n_sites out of range");
    require(in.table.size() == (uint64_t(1) << n), "check_fkg_lattice: table size mismatch");
    for (double v : in.table)
        require(v >= 0.0 && std::isfinite(v), "check_fkg_lattice: weights must be nonnegative");

    bool strict = std::all_of(in.table.begin(), in.table.end(), [](double v) { return v > 0.0; });
    double min_slack = std::numeric_limits<double>::infinity();
    auto record = [&](double lhs, double rhs, const std::string& witness) {
        double scale = std::max(lhs, rhs);
        double slack = scale == 0.0 ? 0.0 : (lhs - rhs) / scale;
        if (slack < min_slack) {
            min_slack = slack;
            if (slack < -tol) r.counterexample = witness + " lhs=" + fmt17(lhs) + " rhs=" + fmt17(rhs);
        }
        return slack >= -tol;
    };

    if (strict) {
        require(n <= 24, "check_fkg_lattice: pair form limited to 24 sites");
        r.detail = "pair-form; ";
        const uint64_t limit = uint64_t(1) << n;
        bool ok = true;
        for (int x = 0; ok && x < n; ++x) {
            for (int y = x + 1; ok && y < n; ++y) {
                const uint64_t bx = uint64_t(1) << x, by = uint64_t(1) << y;
                for (uint64_t m = 0; m < limit; ++m) {
                    if (m & (bx | by)) continue;
                    ok = record(in.table[m | bx | by] * in.table[m],
                                in.table[m | bx] * in.table[m | by],
                                "xi=" + std::to_string(m) + " x=" + std::to_string(x) +
                                    " y=" + std::to_string(y));
                    if (!ok) break;
                }
            }
        }
    } else {
        require(n <= 13, "check_fkg_lattice: full lattice condition limited to 13 sites");
        r.detail = "full-lattice; ";
        const uint64_t limit = uint64_t(1) << n;
        bool ok = true;
        for (uint64_t m1 = 0; ok && m1 < limit; ++m1) {
            for (uint64_t m2 = m1 + 1; m2 < limit; ++m2) {
                ok = record(in.table[m1 & m2] * in.table[m1 | m2], in.table[m1] * in.table[m2],
                            "xi1=" + std::to_string(m1) + " xi2=" + std::to_string(m2));
                if (!ok) break;
            }
        }
    }

    r.max_error = std::max(0.0, -min_slack);
    r.pass = min_slack >= -tol;
    r.detail += "min-slack=" + fmt17(min_slack);
    return r;
}

Report check_correlation_formula(const EmbeddedGraph& g, const Params& p,
                                 const std::vector<MomentSpec>& specs, double cap, double tol) {
    Report r;
    r.identity = "correlation-partition-formula";
    r.graph = describe_graph(g);
    r.params = describe_params(p);
    require(!specs.empty(), "check_correlation_formula: no moment specs");
    for (const MomentSpec& ms : specs) {
        require(ms.vertices.size() == ms.exponents.size() && !ms.vertices.empty(),
                "check_correlation_formula: malformed moment spec");
        for (int v : ms.vertices)
            require(v >= 0 && v < g.n_vertices, "check_correlation_formula: vertex out of range");
        for (int e : ms.exponents)
            require(e >= 0, "check_correlation_formula: exponents must be nonnegative");
    }

    const std::size_t k = specs.size();
    std::vector<long double> direct(k, 0.0L), formula(k, 0.0L);
    long double z = 0.0L;
    for_each_joint(
        g, p,
        [&](const SpinPair& sp, const EdgeSet& omega, const EdgeSet&, double w) {
            z += w;
            ClusterPartition cl = clusters(g, omega);
            for (std::size_t i = 0; i < k; ++i) {
                const MomentSpec& ms = specs[i];
                double mono = 1.0;
                for (std::size_t j = 0; j < ms.vertices.size(); ++j)
                    mono *= ipow(sp.sigma[ms.vertices[j]], ms.exponents[j]);
                direct[i] += w * mono;

                // Group the marked vertices by cluster and take the product
                // of single-site moments of the summed exponents.
                double f = 1.0;
                std::vector<int> roots;
                for (std::size_t j = 0; j < ms.vertices.size(); ++j) {
                    int rt = cl.find(ms.vertices[j]);
                    if (std::find(roots.begin(), roots.end(), rt) == roots.end()) roots.push_back(rt);
                }
                for (int rt : roots) {
                    int esum = 0;
                    for (std::size_t j = 0; j < ms.vertices.size(); ++j)
                        if (cl.find(ms.vertices[j]) == rt) esum += ms.exponents[j];
                    f *= p.moment_Q(esum);
                }
                formula[i] += w * f;
            }
        },
        cap);

    for (std::size_t i = 0; i < k; ++i) {
        double d = static_cast<double>(direct[i] / z);
        double f = static_cast<double>(formula[i] / z);
        double err = rel_err(d, f);
        r.max_error = std::max(r.max_error, err);
        r.detail += "spec" + std::to_string(i) + ": direct=" + fmt17(d) + " partition=" + fmt17(f) + "; ";
    }
    r.pass = r.max_error <= tol;
    return r;
}

Report check_griffiths(const EmbeddedGraph& g, const Params& p,
                       const std::vector<std::pair<std::vector<int>, std::vector<int>>>& pairs,
                       double cap, double tol) {
    Report r;
    r.identity = "griffiths-second-inequality";
    r.graph = describe_graph(g);
    r.params = describe_params(p);
    require(p.a + p.b <= 1.0, "check_griffiths: requires a + b <= 1");
    require(!pairs.empty(), "check_griffiths: no exponent pairs");
    const int nv = g.n_vertices;
    for (const auto& [rv, sv] : pairs) {
        require(static_cast<int>(rv.size()) == nv && static_cast<int>(sv.size()) == nv,
                "check_griffiths: exponent vectors must cover all vertices");
        for (int e : rv) require(e >= 0, "check_griffiths: exponents must be nonnegative");
        for (int e : sv) require(e >= 0, "check_griffiths: exponents must be nonnegative");
    }

    const std::size_t k = pairs.size();
    std::vector<long double> er(k, 0.0L), es(k, 0.0L), ers(k, 0.0L);
    long double z = 0.0L;
    for_each_admissible(
        g, p,
        [&](const SpinPair& sp, double w) {
            z += w;
            for (std::size_t i = 0; i < k; ++i) {
                double mr = 1.0, ms = 1.0, mrs = 1.0;
                for (int v = 0; v < nv; ++v) {
                    mr *= ipow(sp.sigma[v], pairs[i].first[v]);
                    ms *= ipow(sp.sigma[v], pairs[i].second[v]);
                    mrs *= ipow(sp.sigma[v], pairs[i].first[v] + pairs[i].second[v]);
                }
                er[i] += w * mr;
                es[i] += w * ms;
                ers[i] += w * mrs;
            }
        },
        cap);

    double min_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
        double a = static_cast<double>(ers[i] / z);
        double b = static_cast<double>(er[i] / z) * static_cast<double>(es[i] / z);
        double scale = std::max({std::fabs(a), std::fabs(b), 1.0});
        double slack = (a - b) / scale;
        min_slack = std::min(min_slack, slack);
        if (slack < -tol && r.counterexample.empty())
            r.counterexample = "pair" + std::to_string(i) + " lhs=" + fmt17(a) + " rhs=" + fmt17(b);
        r.detail += "pair" + std::to_string(i) + ": slack=" + fmt17(slack) + "; ";
    }

    double min_moment_slack = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= 4; ++j)
        for (int l = 0; l <= 4; ++l) {
            double a = p.moment_Q(j + l);
            double b = p.moment_Q(j) * p.moment_Q(l);
            double scale = std::max({std::fabs(a), std::fabs(b), 1.0});
            min_moment_slack = std::min(min_moment_slack, (a - b) / scale);
        }
    r.detail += "moment-lemma-min-slack=" + fmt17(min_moment_slack);

    r.max_error = std::max(0.0, -std::min(min_slack, min_moment_slack));
    r.pass = min_slack >= -tol && min_moment_slack >= -tol;
    return r;
}

Report check_variance_identity(const EmbeddedGraph& g, const Params& p, int u1, int u2,
                               double cap, double tol) {
    Report r;
    r.identity = "height-variance-identity";
    r.graph = describe_graph(g);
    r.params = describe_params(p) + ",u1=" + std::to_string(u1) + ",u2=" + std::to_string(u2);
    require(g.topology == EmbeddedGraph::Topology::genus0, "check_variance_identity: genus 0 only");
    require(u1 >= 0 && u1 < g.n_faces && u2 >= 0 && u2 < g.n_faces && u1 != u2,
            "check_variance_identity: invalid face pair");

    const std::vector<int> path = canonical_face_path(g, u1, u2);
    std::vector<int> path_edge(path.size() - 1);
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
        path_edge[i] = connecting_edge(g, path[i], path[i + 1]);

    long double z = 0.0L, e_dh = 0.0L, e_dh2 = 0.0L;
    long double e_n0 = 0.0L, e_sumd2 = 0.0L, e_np = 0.0L;
    std::map<double, long double> e_nd;
    double max_abs_d = 0.0;
    double min_abs_d = std::numeric_limits<double>::infinity();

    std::vector<char> seen_v(g.n_vertices), seen_f(g.n_faces);
    for_each_joint(
        g, p,
        [&](const SpinPair& sp, const EdgeSet& omega, const EdgeSet& omega_p, double w) {
            z += w;
            double dh = 0.0;
            for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                const Quad& qd = g.quads[path_edge[i]];
                dh += sp.sigma[qd.v1] * (sp.sigma_p[path[i + 1]] - sp.sigma_p[path[i]]);
            }
            e_dh += w * dh;
            e_dh2 += w * dh * dh;

            ClusterPartition cl = clusters(g, omega);
            std::fill(seen_v.begin(), seen_v.end(), 0);
            int n0 = 0;
            double sumd2 = 0.0, total_d = 0.0;
            for (int v = 0; v < g.n_vertices; ++v) {
                int rt = cl.find(v);
                if (seen_v[rt]) continue;
                seen_v[rt] = 1;
                double d = cluster_increment(g, sp, cl, rt, path);
                total_d += sp.sigma[v] * d;
                if (d != 0.0) {
                    ++n0;
                    sumd2 += d * d;
                    e_nd[d] += w;
                    max_abs_d = std::max(max_abs_d, std::fabs(d));
                    min_abs_d = std::min(min_abs_d, std::fabs(d));
                }
            }
            // Per-cluster increments weighted by the cluster's constant spin
            // decompose the full height increment along the path.
            if (std::fabs(total_d - dh) > 1e-9)
                throw std::logic_error("check_variance_identity: cluster decomposition mismatch");
            e_n0 += w * n0;
            e_sumd2 += w * sumd2;

            ClusterPartition clp = clusters(g, omega_p);
            std::fill(seen_f.begin(), seen_f.end(), 0);
            int np = 0;
            for (int u = 0; u < g.n_faces; ++u) {
                int rt = clp.find(u);
                if (seen_f[rt]) continue;
                seen_f[rt] = 1;
                if (disconnects(g, omega_p, clp, rt, u1, u2)) ++np;
            }
            e_np += w * np;
        },
        cap);

    const double m2 = p.moment_Q(2);
    const double mean = static_cast<double>(e_dh / z);
    const double var = static_cast<double>(e_dh2 / z) - mean * mean;
    const double n0 = static_cast<double>(e_n0 / z);
    const double sumd2 = static_cast<double>(e_sumd2 / z);
    const double np = static_cast<double>(e_np / z);
    const double cmax = p.max_jump();

    double worst = 0.0;
    auto check_eq = [&](double lhs, double rhs, const char* name) {
        double err = rel_err(lhs, rhs);
        worst = std::max(worst, err);
        r.detail += std::string(name) + "=" + fmt17(err) + "; ";
    };
    auto check_ge = [&](double lhs, double rhs, const char* name) {
        double scale = std::max({std::fabs(lhs), std::fabs(rhs), 1.0});
        double violation = std::max(0.0, (rhs - lhs) / scale);
        worst = std::max(worst, violation);
        r.detail += std::string(name) + "-violation=" + fmt17(violation) + "; ";
    };

    check_eq(mean, 0.0, "mean-zero");
    check_eq(var, m2 * sumd2, "variance-decomposition");
    check_ge(cmax * cmax * m2 * n0, var, "upper-bound");
    if (min_abs_d >= 1.0 - 1e-12) check_ge(var, m2 * n0, "lower-bound");
    if (max_abs_d > cmax + 1e-12) {
        worst = std::max(worst, 1.0);
        r.detail += "jump-range-exceeded; ";
    }
    if (p.qp == 2) {
        double c = std::max(std::fabs(p.Qp[0]), std::fabs(p.Qp[1]));
        check_eq(var, 4.0 * c * c * m2 * n0, "two-state-identity");
    }
    if (p.a + p.b >= 1.0)
        check_ge(n0, (1.0 - 1.0 / p.qp) * (np - 1.0), "separating-cluster-bound");

    r.detail += "var=" + fmt17(var) + "; n_nonzero=" + fmt17(n0) + "; n_sep=" + fmt17(np) +
                "; sum_d2=" + fmt17(sumd2);
    r.max_error = worst;
    r.pass = worst <= tol;
    return r;
}

Report check_conditional_laws(const EmbeddedGraph& g, const Params& p, double cap, double tol) {
    Report r;
    r.identity = "conditional-laws";
    r.graph = describe_graph(g);
    r.params = describe_params(p);
    const int nv = g.n_vertices;
    const int nu = g.n_faces;
    const int ne = g.n_edges();
    double worst = 0.0;

    // Vertex spins given face spins: Potts(q) with disagreement weight b on
    // the quotient by the face-spin contours, and symmetrically.
    {
        std::map<std::string, Distribution> cond_sigma, cond_sigma_p;
        for_each_admissible(
            g, p,
            [&](const SpinPair& sp, double w) {
                cond_sigma[key_spins(sp.sigma_p)].add(key_spins(sp.sigma), w);
                cond_sigma_p[key_spins(sp.sigma)].add(key_spins(sp.sigma_p), w);
            },
            cap);

        double worst_q = 0.0;
        std::vector<int> fdig(nu, 0);
        std::vector<double> sigma_p(nu), sigma(nv);
        do {
            for (int u = 0; u < nu; ++u) sigma_p[u] = p.Qp[fdig[u]];
            EdgeSet etp = contours(g, sigma_p, Side::dual);
            ClusterPartition cl = clusters(g, etp);
            std::vector<std::vector<int>> comps = cl.components();
            Distribution formula;
            std::vector<int> dig(comps.size(), 0);
            do {
                for (std::size_t i = 0; i < comps.size(); ++i)
                    for (int v : comps[i]) sigma[v] = p.Q[dig[i]];
                formula.add(key_spins(sigma),
                            ipow(p.b, contours(g, sigma, Side::primal).count()));
            } while (advance_digits(dig, p.q));
            worst_q = std::max(worst_q, formula.total_variation(cond_sigma.at(key_spins(sigma_p))));
        } while (advance_digits(fdig, p.qp));
        worst = std::max(worst, worst_q);
        r.detail += "quotient-potts-sigma=" + fmt17(worst_q) + "; ";

        double worst_qp = 0.0;
        std::vector<int> vdig(nv, 0);
        do {
            for (int v = 0; v < nv; ++v) sigma[v] = p.Q[vdig[v]];
            EdgeSet eta = contours(g, sigma, Side::primal);
            ClusterPartition cl = clusters(g, eta);
            std::vector<std::vector<int>> comps = cl.components();
            Distribution formula;
            std::vector<int> dig(comps.size(), 0);
            do {
                for (std::size_t i = 0; i < comps.size(); ++i)
                    for (int u : comps[i]) sigma_p[u] = p.Qp[dig[i]];
                formula.add(key_spins(sigma_p),
                            ipow(p.a, contours(g, sigma_p, Side::dual).count()));
            } while (advance_digits(dig, p.qp));
            worst_qp = std::max(worst_qp, formula.total_variation(cond_sigma_p.at(key_spins(sigma))));
        } while (advance_digits(vdig, p.q));
        worst = std::max(worst, worst_qp);
        r.detail += "quotient-potts-sigma-p=" + fmt17(worst_qp) + "; ";
    }

    // Spin pair given the open set: independent product of uniform cluster
    // spins and the contour weight law inside omega.
    if (p.b < 1.0) {
        std::map<std::string, Distribution> cond_pair;
        std::map<std::string, EdgeSet> omega_rep;
        for_each_joint(
            g, p,
            [&](const SpinPair& sp, const EdgeSet& omega, const EdgeSet&, double w) {
                std::string ok = key_edges(omega);
                cond_pair[ok].add(key_spin_pair(sp), w);
                omega_rep.emplace(ok, omega);
            },
            cap);

        const double y = p.a / (1.0 - p.b);
        double worst_es = 0.0;
        std::vector<double> sigma_p(nu);
        for (const auto& [ok, dist] : cond_pair) {
            const EdgeSet& om = omega_rep.at(ok);
            const int kp = clusters(g, om).k;

            // Marginals of the extracted conditional.
            Distribution msig, msigp;
            for (const auto& [key, w] : dist.entries()) {
                std::size_t cut = key.find(';');
                msig.add(key.substr(0, cut), w);
                msigp.add(key.substr(cut + 1), w);
            }

            // Vertex side: uniform over the q^{k} cluster-constant maps.
            double wu = 0.0;
            if (msig.size() != static_cast<std::size_t>(ipow(static_cast<double>(p.q), kp)))
                wu = 1.0;
            for (const auto& [key, w] : msig.entries())
                wu = std::max(wu, std::fabs(w / msig.total() - ipow(1.0 / p.q, kp)));

            // Face side: weight y^{|contours|} over configurations with
            // contours inside omega.
            Distribution fform;
            std::vector<int> fdig(nu, 0);
            do {
                for (int u = 0; u < nu; ++u) sigma_p[u] = p.Qp[fdig[u]];
                EdgeSet etp = contours(g, sigma_p, Side::dual);
                if (etp.subset_of(om)) fform.add(key_spins(sigma_p), ipow(y, etp.count()));
            } while (advance_digits(fdig, p.qp));
            double wf = fform.total_variation(msigp);

            // Independence: the conditional factorizes over its marginals.
            Distribution prod;
            for (const auto& [ks, ws] : msig.entries())
                for (const auto& [kf, wf2] : msigp.entries())
                    prod.add(ks + ";" + kf, ws * wf2);
            double wi = prod.total_variation(dist);

            worst_es = std::max({worst_es, wu, wf, wi});
        }
        worst = std::max(worst, worst_es);
        r.detail += "edwards-sokal=" + fmt17(worst_es) + "; ";
    } else {
        r.detail += "edwards-sokal skipped (b = 1); ";
    }

    // Open set given the dual open set and the face spins, a+b >= 1: forced
    // contours plus independent openings on the dual-closed remainder.
    if (p.a + p.b >= 1.0) {
        std::map<std::string, Distribution> cond_omega;
        std::map<std::string, std::pair<EdgeSet, EdgeSet>> rep;  // (omega', eta')
        for_each_joint(
            g, p,
            [&](const SpinPair& sp, const EdgeSet& omega, const EdgeSet& omega_p, double w) {
                std::string key = key_edges(omega_p) + ";" + key_spins(sp.sigma_p);
                cond_omega[key].add(key_edges(omega), w);
                rep.emplace(key, std::make_pair(omega_p, sp.eta_p));
            },
            cap);

        const double pr = (1.0 - p.b) / p.a;
        double worst_bern = 0.0;
        for (const auto& [key, dist] : cond_omega) {
            const auto& [omp, etp] = rep.at(key);
            std::vector<int> bern;
            for (int e = 0; e < ne; ++e)
                if (!omp.has(e) && !etp.has(e)) bern.push_back(e);
            require(bern.size() <= 20, "check_conditional_laws: Bernoulli remainder too large");
            Distribution formula;
            const uint64_t limit = uint64_t(1) << bern.size();
            for (uint64_t mask = 0; mask < limit; ++mask) {
                EdgeSet om = etp;
                int open = 0;
                for (std::size_t i = 0; i < bern.size(); ++i)
                    if (mask & (uint64_t(1) << i)) {
                        om.set(bern[i]);
                        ++open;
                    }
                double w = ipow(pr, open) * ipow(1.0 - pr, static_cast<int>(bern.size()) - open);
                if (w > 0.0) formula.add(key_edges(om), w);
            }
            worst_bern = std::max(worst_bern, formula.total_variation(dist));
        }
        worst = std::max(worst, worst_bern);
        r.detail += "bernoulli-fill=" + fmt17(worst_bern) + "; ";
        if (p.a + p.b == 1.0) r.detail += "deterministic at a+b=1; ";
    } else {
        r.detail += "bernoulli-fill skipped (a+b < 1); ";
    }

    r.max_error = worst;
    r.pass = worst <= tol;
    return r;
}

}  // namespace pottspair
