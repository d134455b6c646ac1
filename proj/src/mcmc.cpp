#include "pottspair/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pottspair/oracle.hpp"

namespace pottspair {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

// Uniform index in [0, n) from one u01 draw.
int draw_index(std::mt19937_64& rng, int n) {
    int i = static_cast<int>(u01(rng) * n);
    return i < n ? i : n - 1;
}

// Boundary census of a cell set: the number of incident edges leaving the
// set and, per alphabet value, how many of those edges end at that value.
// Edges with both cells inside are constant in the block spin and drop out
// of the conditional.
template <class Pred>
void gather_boundary(const EmbeddedGraph& g, const SpinPair& sp, Side side,
                     const std::vector<int>& cells, Pred in_block,
                     const std::vector<double>& alphabet, int& boundary,
                     std::vector<int>& counts) {
    const bool primal = side == Side::primal;
    counts.assign(alphabet.size(), 0);
    boundary = 0;
    for (int x : cells) {
        const std::vector<int>& incident = primal ? g.vertex_rotation[x] : g.face_rotation[x];
        for (int e : incident) {
            int other = primal ? g.other_vertex(e, x) : g.other_face(e, x);
            if (in_block(other)) continue;
            ++boundary;
            double v = primal ? sp.sigma[other] : sp.sigma_p[other];
            for (size_t i = 0; i < alphabet.size(); ++i) {
                if (alphabet[i] == v) {
                    ++counts[i];
                    break;
                }
            }
        }
    }
}

// Heat-bath weights from the census: value i disagrees with
// boundary - counts[i] neighbors, each costing one factor of the coupling.
void conditional_from_counts(double coupling, int boundary, const std::vector<int>& counts,
                             std::vector<double>& probs) {
    probs.resize(counts.size());
    double total = 0.0;
    for (size_t i = 0; i < counts.size(); ++i) {
        probs[i] = std::pow(coupling, boundary - counts[i]);
        total += probs[i];
    }
    for (double& p : probs) p /= total;
}

// One sequential heat-bath pass over the blocks of one side. The block
// partition is induced by the other side's contour, which this pass never
// changes, so it stays valid throughout.
void half_sweep(const EmbeddedGraph& g, SpinPair& sp, const Params& p, Side side,
                std::mt19937_64& rng) {
    const bool primal = side == Side::primal;
    const EdgeSet& forced = primal ? sp.eta_p : sp.eta;
    ClusterPartition cp = clusters(g, forced);
    const std::vector<double>& alphabet = primal ? p.Q : p.Qp;
    std::vector<double>& spins = primal ? sp.sigma : sp.sigma_p;
    const double coupling = primal ? p.b : p.a;

    std::vector<int> counts;
    std::vector<double> probs;
    for (const auto& comp : cp.components()) {
        int boundary = 0;
        gather_boundary(
            g, sp, side, comp, [&](int other) { return cp.same(comp.front(), other); },
            alphabet, boundary, counts);
        conditional_from_counts(coupling, boundary, counts, probs);
        double u = u01(rng);
        int pick = static_cast<int>(alphabet.size()) - 1;
        double acc = 0.0;
        for (size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) {
                pick = static_cast<int>(i);
                break;
            }
        }
        for (int x : comp) spins[x] = alphabet[pick];
    }
}

void check_disjoint_words(const EdgeSet& a, const EdgeSet& b, const char* msg) {
    for (size_t i = 0; i < a.words().size(); ++i)
        if (a.words()[i] & b.words()[i]) throw std::logic_error(msg);
}

// Precomputed measurement geometry between the accumulator's faces: the
// canonical face path, the crossed edge per step, and the separation
// candidates. A vertex-side cluster can separate the endpoints only if it
// blocks the path at an edge it contains, so it must touch a step-edge
// endpoint; a face-side cluster must contain a path face outright.
struct PathInfo {
    std::vector<int> faces;
    std::vector<int> edges;
    std::vector<int> step_vertices;
};

PathInfo build_path(const EmbeddedGraph& g, int u1, int u2) {
    PathInfo pi;
    pi.faces = canonical_face_path(g, u1, u2);
    std::vector<char> seen(g.n_vertices, 0);
    for (size_t i = 0; i + 1 < pi.faces.size(); ++i) {
        int e = connecting_edge(g, pi.faces[i], pi.faces[i + 1]);
        if (e < 0) throw std::logic_error("measurement path: faces not adjacent");
        pi.edges.push_back(e);
        for (int v : {g.quads[e].v1, g.quads[e].v2}) {
            if (!seen[v]) {
                seen[v] = 1;
                pi.step_vertices.push_back(v);
            }
        }
    }
    return pi;
}

void measure(const EmbeddedGraph& g, const Params& p, ChainState& st, const PathInfo& pi,
             std::mt19937_64& rng, EstimatorAccumulator& acc, bool genus0,
             std::ofstream* stream) {
    PercolationPair pp = couple_percolation(g, st.sp, p, rng);
    if (!coupling_consistent(g, st.sp, p, pp))
        throw std::logic_error("measurement produced an inconsistent coupling");
    const SpinPair& sp = st.sp;

    // Height increment along the path and its split into per-cluster face
    // jumps. A crossing edge with a face jump is forced open, so both of
    // its endpoints carry the cluster's common vertex spin.
    double dh = 0.0;
    std::map<int, double> cluster_jump;
    for (size_t i = 0; i + 1 < pi.faces.size(); ++i) {
        double jump = sp.sigma_p[pi.faces[i + 1]] - sp.sigma_p[pi.faces[i]];
        if (jump == 0.0) continue;
        int v = g.quads[pi.edges[i]].v1;
        dh += sp.sigma[v] * jump;
        cluster_jump[pp.cl_omega.find(v)] += jump;
    }
    double decomposed = 0.0;
    long n_nonzero = 0;
    for (const auto& [root, d] : cluster_jump) {
        decomposed += sp.sigma[root] * d;
        if (d != 0.0) {
            ++n_nonzero;
            acc.nd_sum[d] += 1.0;
        }
    }
    if (std::abs(decomposed - dh) > 1e-9)
        throw std::logic_error("cluster decomposition does not reproduce the increment");
    if (n_nonzero > pp.cl_omega.k)
        throw std::logic_error("nonzero-increment count exceeds the cluster count");

    // Separation counts, restricted to the candidate clusters touching the
    // path. Degenerate endpoints separate nothing.
    long surround = 0;
    long n_prime = 0;
    if (genus0 && acc.track_disconnections && acc.u1 != acc.u2) {
        std::vector<int> roots;
        for (int v : pi.step_vertices) {
            int r = pp.cl_omega.find(v);
            if (std::find(roots.begin(), roots.end(), r) != roots.end()) continue;
            roots.push_back(r);
            if (disconnects(g, pp.omega, pp.cl_omega, r, acc.u1, acc.u2)) ++surround;
        }
        roots.clear();
        for (int u : pi.faces) {
            int r = pp.cl_omega_p.find(u);
            if (std::find(roots.begin(), roots.end(), r) != roots.end()) continue;
            roots.push_back(r);
            if (disconnects(g, pp.omega_p, pp.cl_omega_p, r, acc.u1, acc.u2)) ++n_prime;
        }
        if (surround > pp.cl_omega.k || n_prime > pp.cl_omega_p.k)
            throw std::logic_error("separation count exceeds the cluster count");
    }

    double conn = pp.cl_omega_p.same(acc.u1, acc.u2) ? 1.0 : 0.0;
    double s0sq = sp.sigma[0] * sp.sigma[0];

    acc.n += 1;
    acc.dh.add(dh);
    acc.n_nonzero.add(static_cast<double>(n_nonzero));
    if (genus0 && acc.track_disconnections) {
        acc.surround.add(static_cast<double>(surround));
        acc.n_prime.add(static_cast<double>(n_prime));
    }
    acc.conn.add(conn);
    acc.sigma0_sq.add(s0sq);

    if (stream) {
        char line[160];
        std::snprintf(line, sizeof(line), "%.17g %ld %ld %ld %g %g\n", dh, n_nonzero, n_prime,
                      surround, conn, s0sq);
        *stream << line;
    }

    st.last_coupling = std::move(pp);
    st.has_coupling = true;
}

double dispersion(const std::vector<double>& values) {
    size_t b = values.size();
    if (b < 2) return 0.0;
    double m = 0.0;
    for (double v : values) m += v;
    m /= static_cast<double>(b);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / (static_cast<double>(b) * static_cast<double>(b - 1)));
}

MeanEstimate mean_estimate(const BatchSeries& s) {
    MeanEstimate m;
    m.n = s.count();
    if (m.n > 0) {
        m.mean = s.mean();
        m.std_error = s.std_error_mean();
    }
    return m;
}

}  // namespace

std::mt19937_64 make_stream(uint64_t seed, uint64_t stream) {
    uint64_t x = seed + 0x9E3779B97F4A7C15ull * (stream + 0x632BE59BD9B4E019ull);
    auto next = [&x]() {
        x += 0x9E3779B97F4A7C15ull;
        uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    };
    uint64_t w[4] = {next(), next(), next(), next()};
    std::seed_seq seq{static_cast<uint32_t>(w[0]), static_cast<uint32_t>(w[0] >> 32),
                      static_cast<uint32_t>(w[1]), static_cast<uint32_t>(w[1] >> 32),
                      static_cast<uint32_t>(w[2]), static_cast<uint32_t>(w[2] >> 32),
                      static_cast<uint32_t>(w[3]), static_cast<uint32_t>(w[3] >> 32)};
    return std::mt19937_64(seq);
}

double u01(std::mt19937_64& rng) { return (rng() >> 11) * 0x1.0p-53; }

int central_face(const EmbeddedGraph& g) {
    if (g.topology != EmbeddedGraph::Topology::genus0)
        throw std::invalid_argument("central face: genus-0 graph required");
    std::vector<int> dist(g.n_faces, -1);
    std::deque<int> queue{g.outer_face};
    dist[g.outer_face] = 0;
    while (!queue.empty()) {
        int u = queue.front();
        queue.pop_front();
        for (int e : g.face_rotation[u]) {
            int w = g.other_face(e, u);
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    int best = g.outer_face;
    for (int u = 0; u < g.n_faces; ++u)
        if (dist[u] > dist[best] || (dist[u] == dist[best] && u < best)) best = u;
    return best;
}

ChainState initial_state(const EmbeddedGraph& g, const Params& p) {
    p.validate();
    ChainState st;
    st.sp = SpinPair(g, std::vector<double>(g.n_vertices, p.Q.front()),
                     std::vector<double>(g.n_faces, p.Qp.front()));
    if (!st.sp.admissible()) throw std::logic_error("constant start state inadmissible");
    return st;
}

std::vector<std::vector<int>> quotient_blocks(const EmbeddedGraph& g, const SpinPair& sp,
                                              Side side) {
    const EdgeSet& forced = side == Side::primal ? sp.eta_p : sp.eta;
    return clusters(g, forced).components();
}

std::vector<double> block_conditional(const EmbeddedGraph& g, const SpinPair& sp,
                                      const Params& p, Side side,
                                      const std::vector<int>& block) {
    p.validate();
    require(!block.empty(), "block conditional: empty block");
    const bool primal = side == Side::primal;
    const int n_cells = primal ? g.n_vertices : g.n_faces;
    std::vector<char> member(n_cells, 0);
    for (int x : block) {
        require(x >= 0 && x < n_cells, "block conditional: cell out of range");
        member[x] = 1;
    }
    const std::vector<double>& alphabet = primal ? p.Q : p.Qp;
    int boundary = 0;
    std::vector<int> counts;
    gather_boundary(
        g, sp, side, block, [&](int other) { return member[other] != 0; }, alphabet,
        boundary, counts);
    std::vector<double> probs;
    conditional_from_counts(primal ? p.b : p.a, boundary, counts, probs);
    return probs;
}

void quotient_heatbath_sweep(const EmbeddedGraph& g, ChainState& st, const Params& p,
                             std::mt19937_64& rng) {
    half_sweep(g, st.sp, p, Side::primal, rng);
    st.sp.refresh_contours(g);
    half_sweep(g, st.sp, p, Side::dual, rng);
    st.sp.refresh_contours(g);
    if (!st.sp.admissible()) throw std::logic_error("heat-bath sweep broke admissibility");
    ++st.sweep;
}

void cluster_move(const EmbeddedGraph& g, ChainState& st, const Params& p,
                  std::mt19937_64& rng) {
    SpinPair& sp = st.sp;

    // Vertex spins: uniform per cluster of the open primal edges, face spins
    // held. Open edges join agreeing vertices afterwards, and the face
    // contour stays inside the open set, so admissibility survives.
    PercolationPair pp = couple_percolation(g, sp, p, rng);
    std::vector<double> pick_v(g.n_vertices, 0.0);
    for (int v = 0; v < g.n_vertices; ++v)
        if (pp.cl_omega.find(v) == v) pick_v[v] = p.Q[draw_index(rng, static_cast<int>(p.Q.size()))];
    for (int v = 0; v < g.n_vertices; ++v) sp.sigma[v] = pick_v[pp.cl_omega.find(v)];
    sp.refresh_contours(g);
    if (!sp.eta_p.subset_of(pp.omega))
        throw std::logic_error("cluster move: face contour escaped the open primal set");
    check_disjoint_words(sp.eta, pp.omega,
                         "cluster move: vertex contour crossed an open primal edge");

    // Face spins: same scheme through a fresh coupling on the updated pair.
    PercolationPair pp2 = couple_percolation(g, sp, p, rng);
    std::vector<double> pick_u(g.n_faces, 0.0);
    for (int u = 0; u < g.n_faces; ++u)
        if (pp2.cl_omega_p.find(u) == u)
            pick_u[u] = p.Qp[draw_index(rng, static_cast<int>(p.Qp.size()))];
    for (int u = 0; u < g.n_faces; ++u) sp.sigma_p[u] = pick_u[pp2.cl_omega_p.find(u)];
    sp.refresh_contours(g);
    check_disjoint_words(sp.eta_p, pp2.omega_p,
                         "cluster move: face contour crossed an open dual edge");
    if (!sp.admissible()) throw std::logic_error("cluster move broke admissibility");
    ++st.sweep;
}

void SamplerConfig::validate() const {
    require(heatbath_weight >= 0.0 && cluster_weight >= 0.0, "sampler: negative move weight");
    require(heatbath_weight + cluster_weight > 0.0, "sampler: all move weights zero");
    require(sweeps >= 0, "sampler: negative sweep count");
    require(burn_in >= 0 && burn_in <= sweeps, "sampler: burn-in outside [0, sweeps]");
    require(thin >= 1, "sampler: thinning must be positive");
}

void BatchSeries::plan(long expected, int batches) {
    if (n_ != 0 || !batches_.empty())
        throw std::logic_error("batch series: already holds data");
    if (batches < 2) batches = 2;
    batch_size_ = expected > 0 ? (expected + batches - 1) / batches : 1;
}

void BatchSeries::add(double v) {
    if (batches_.empty() || batches_.back().n >= batch_size_) batches_.push_back({});
    Batch& b = batches_.back();
    ++b.n;
    b.s1 += v;
    b.s2 += v * v;
    ++n_;
    s1_ += v;
    s2_ += v * v;
}

void BatchSeries::merge(const BatchSeries& o) {
    batches_.insert(batches_.end(), o.batches_.begin(), o.batches_.end());
    batch_size_ = std::max(batch_size_, o.batch_size_);
    n_ += o.n_;
    s1_ += o.s1_;
    s2_ += o.s2_;
}

double BatchSeries::mean() const { return n_ > 0 ? s1_ / static_cast<double>(n_) : 0.0; }

double BatchSeries::variance() const {
    if (n_ == 0) return 0.0;
    double m = mean();
    return std::max(0.0, s2_ / static_cast<double>(n_) - m * m);
}

int BatchSeries::batch_count() const { return static_cast<int>(batches_.size()); }

double BatchSeries::std_error_mean() const {
    std::vector<double> means;
    for (const Batch& b : batches_)
        if (b.n > 0) means.push_back(b.s1 / static_cast<double>(b.n));
    return dispersion(means);
}

double BatchSeries::std_error_variance() const {
    std::vector<double> vars;
    for (const Batch& b : batches_) {
        if (b.n == 0) continue;
        double m = b.s1 / static_cast<double>(b.n);
        vars.push_back(std::max(0.0, b.s2 / static_cast<double>(b.n) - m * m));
    }
    return dispersion(vars);
}

void EstimatorAccumulator::plan(long expected) {
    for (BatchSeries* s : {&dh, &n_nonzero, &n_prime, &surround, &conn, &sigma0_sq})
        s->plan(expected);
}

void EstimatorAccumulator::merge(const EstimatorAccumulator& o) {
    require(u1 == o.u1 && u2 == o.u2, "accumulator merge: face pair mismatch");
    require(track_disconnections == o.track_disconnections,
            "accumulator merge: tracking mismatch");
    n += o.n;
    dh.merge(o.dh);
    n_nonzero.merge(o.n_nonzero);
    n_prime.merge(o.n_prime);
    surround.merge(o.surround);
    conn.merge(o.conn);
    sigma0_sq.merge(o.sigma0_sq);
    for (const auto& [d, s] : o.nd_sum) nd_sum[d] += s;
}

std::string EstimatorAccumulator::to_json() const {
    nlohmann::json j;
    j["u1"] = u1;
    j["u2"] = u2;
    j["samples"] = n;
    j["dh"] = {{"mean", dh.mean()},
               {"variance", dh.variance()},
               {"std_error_mean", dh.std_error_mean()},
               {"std_error_variance", dh.std_error_variance()},
               {"batches", dh.batch_count()}};
    auto series = [](const BatchSeries& s) {
        return nlohmann::json{
            {"mean", s.mean()}, {"std_error", s.std_error_mean()}, {"n", s.count()}};
    };
    j["n_nonzero"] = series(n_nonzero);
    j["n_prime"] = series(n_prime);
    j["surround"] = series(surround);
    j["conn"] = series(conn);
    j["sigma0_sq"] = series(sigma0_sq);
    nlohmann::json nd = nlohmann::json::object();
    for (const auto& [d, s] : nd_sum) {
        char key[32];
        std::snprintf(key, sizeof(key), "%.17g", d);
        nd[key] = n > 0 ? s / static_cast<double>(n) : 0.0;
    }
    j["nd_mean"] = nd;
    return j.dump();
}

void run_chain(const EmbeddedGraph& g, const Params& p, const SamplerConfig& cfg,
               EstimatorAccumulator& acc) {
    p.validate();
    cfg.validate();
    require(acc.n == 0 && acc.dh.count() == 0, "run chain: accumulator must start empty");
    require(acc.u1 >= 0 && acc.u1 < g.n_faces && acc.u2 >= 0 && acc.u2 < g.n_faces,
            "run chain: accumulator faces out of range");
    const bool genus0 = g.topology == EmbeddedGraph::Topology::genus0;

    std::mt19937_64 rng = make_stream(cfg.seed, static_cast<uint64_t>(cfg.chain));
    ChainState st = initial_state(g, p);
    acc.plan((cfg.sweeps - cfg.burn_in) / cfg.thin);
    PathInfo pi = build_path(g, acc.u1, acc.u2);

    std::ofstream stream;
    if (!cfg.stream_path.empty()) {
        stream.open(cfg.stream_path, std::ios::trunc);
        if (!stream) throw std::runtime_error("run chain: cannot open sample stream file");
    }

    const double total_weight = cfg.heatbath_weight + cfg.cluster_weight;
    for (long t = 1; t <= cfg.sweeps; ++t) {
        bool heat = cfg.cluster_weight == 0.0 ||
                    (cfg.heatbath_weight > 0.0 &&
                     u01(rng) * total_weight < cfg.heatbath_weight);
        if (heat)
            quotient_heatbath_sweep(g, st, p, rng);
        else
            cluster_move(g, st, p, rng);
        st.sweep = t;
        if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0)
            measure(g, p, st, pi, rng, acc, genus0, stream.is_open() ? &stream : nullptr);
    }
}

VarianceEstimate estimate_height_variance(const EstimatorAccumulator& acc) {
    if (acc.dh.count() < 2)
        throw std::invalid_argument("height variance: need at least two measurements");
    VarianceEstimate ve;
    ve.mean = acc.dh.mean();
    ve.variance = acc.dh.variance();
    ve.std_error = acc.dh.std_error_variance();
    ve.n = acc.dh.count();
    return ve;
}

ClusterCountEstimate estimate_cluster_counts(const EstimatorAccumulator& acc) {
    require(acc.n > 0, "cluster counts: no measurements");
    ClusterCountEstimate ce;
    for (const auto& [d, s] : acc.nd_sum) ce.nd_mean[d] = s / static_cast<double>(acc.n);
    ce.n_nonzero = mean_estimate(acc.n_nonzero);
    ce.n_prime = mean_estimate(acc.n_prime);
    ce.surround = mean_estimate(acc.surround);
    ce.conn = mean_estimate(acc.conn);
    ce.sigma0_sq = mean_estimate(acc.sigma0_sq);
    return ce;
}

double validate_against_oracle(const EmbeddedGraph& g, const Params& p,
                               const SamplerConfig& cfg) {
    p.validate();
    cfg.validate();
    SigmaLaw sl = enumerate_sigma(g, p);

    std::mt19937_64 rng = make_stream(cfg.seed, static_cast<uint64_t>(cfg.chain));
    ChainState st = initial_state(g, p);
    Distribution empirical;
    const double total_weight = cfg.heatbath_weight + cfg.cluster_weight;
    for (long t = 1; t <= cfg.sweeps; ++t) {
        bool heat = cfg.cluster_weight == 0.0 ||
                    (cfg.heatbath_weight > 0.0 &&
                     u01(rng) * total_weight < cfg.heatbath_weight);
        if (heat)
            quotient_heatbath_sweep(g, st, p, rng);
        else
            cluster_move(g, st, p, rng);
        if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0)
            empirical.add(key_spin_pair(st.sp), 1.0);
    }
    return empirical.total_variation(sl.joint);
}

}  // namespace pottspair
