// Command-line front end: identity-verification suites over parameter grids,
// sampling runs, and variance-vs-size scans, all driven by a JSON config and
// emitting CSV/JSON artifacts. Exit codes: 0 pass, 1 check or runtime
// failure, 2 usage or configuration error.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "pottspair/lattice.hpp"
#include "pottspair/mcmc.hpp"
#include "pottspair/model.hpp"
#include "pottspair/oracle.hpp"
#include "pottspair/special.hpp"

using nlohmann::json;
using namespace pottspair;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kCsvHeader = "experiment,graph,q,qp,a,b,estimand,value,stderr,n,seed";

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GraphSpec {
    std::string kind = "box";
    int n = 1;
};

struct GridSpec {
    std::vector<int> q{2, 3};
    std::vector<int> qp{2, 3};
    std::vector<double> a{0.3, 0.5, 0.7};
    std::vector<double> b{0.3, 0.5, 0.7};
};

struct SamplerSpec {
    long sweeps = 2000;
    long burn_in = 200;
    long thin = 1;
    int chains = 2;
    double heatbath_weight = 1.0;
    double cluster_weight = 1.0;
    bool track_disconnections = true;
};

struct ExperimentSpec {
    std::string experiment = "default";
    GraphSpec graph;
    GridSpec grid;
    SamplerSpec sampler;
    std::vector<int> sizes;
    double tolerance = 1e-10;
    uint64_t seed = 1;
};

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    std::string mutation;
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

EmbeddedGraph build_graph(const GraphSpec& gs) {
    if (gs.kind == "box") return build_box(gs.n);
    if (gs.kind == "torus") return build_torus(gs.n);
    if (gs.kind == "prism") return build_prism();
    throw UsageError("unknown graph kind '" + gs.kind + "' (expected box|torus|prism)");
}

template <class T>
void read_list(const json& j, const char* key, std::vector<T>& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_array()) throw UsageError(std::string("config: ") + key + " must be a list");
    out = j.at(key).get<std::vector<T>>();
}

ExperimentSpec load_spec(const CommonOpts& opts) {
    ExperimentSpec spec;
    if (!opts.config_path.empty()) {
        std::ifstream in(opts.config_path);
        if (!in) throw UsageError("cannot open config file: " + opts.config_path);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw UsageError("config parse error in " + opts.config_path + ": " + e.what());
        }
        spec.experiment = j.value("experiment", spec.experiment);
        if (j.contains("graph")) {
            spec.graph.kind = j["graph"].value("kind", spec.graph.kind);
            spec.graph.n = j["graph"].value("n", spec.graph.n);
        }
        if (j.contains("grid")) {
            read_list(j["grid"], "q", spec.grid.q);
            read_list(j["grid"], "qp", spec.grid.qp);
            read_list(j["grid"], "a", spec.grid.a);
            read_list(j["grid"], "b", spec.grid.b);
        }
        if (j.contains("sampler")) {
            const json& s = j["sampler"];
            spec.sampler.sweeps = s.value("sweeps", spec.sampler.sweeps);
            spec.sampler.burn_in = s.value("burn_in", spec.sampler.burn_in);
            spec.sampler.thin = s.value("thin", spec.sampler.thin);
            spec.sampler.chains = s.value("chains", spec.sampler.chains);
            spec.sampler.heatbath_weight = s.value("heatbath_weight", spec.sampler.heatbath_weight);
            spec.sampler.cluster_weight = s.value("cluster_weight", spec.sampler.cluster_weight);
            spec.sampler.track_disconnections =
                s.value("track_disconnections", spec.sampler.track_disconnections);
        }
        read_list(j, "sizes", spec.sizes);
        spec.tolerance = j.value("tolerance", spec.tolerance);
        spec.seed = j.value("seed", spec.seed);
    }
    if (opts.seed_set) spec.seed = opts.seed;
    if (spec.grid.q.empty() || spec.grid.qp.empty() || spec.grid.a.empty() || spec.grid.b.empty())
        throw UsageError("config: empty parameter grid");
    if (spec.sampler.chains < 1) throw UsageError("config: chains must be positive");
    return spec;
}

std::vector<Params> expand_grid(const GridSpec& grid) {
    std::vector<Params> points;
    for (int q : grid.q)
        for (int qp : grid.qp)
            for (double a : grid.a)
                for (double b : grid.b) points.emplace_back(q, qp, a, b);
    return points;
}

std::filesystem::path prepare_out_dir(const CommonOpts& opts) {
    std::filesystem::path dir(opts.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string());
    return dir;
}

void write_meta(const std::filesystem::path& dir, const std::string& command,
                const ExperimentSpec& spec, int threads, long rows) {
    json meta;
    meta["csv_schema"] = 1;
    meta["version"] = kVersion;
    meta["command"] = command;
    meta["experiment"] = spec.experiment;
    meta["graph"] = {{"kind", spec.graph.kind}, {"n", spec.graph.n}};
    meta["seed"] = spec.seed;
    meta["threads"] = threads;
    meta["rows"] = rows;
    std::ofstream out(dir / "meta.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << "\n";
}

bool default_two_state(const Params& p) {
    return p.q == 2 && p.qp == 2 && p.Q == std::vector<double>{-1.0, 1.0} &&
           p.Qp == std::vector<double>{-1.0, 1.0};
}

bool cubic(const EmbeddedGraph& g) {
    for (int v = 0; v < g.n_vertices; ++v)
        if (g.degree(v) != 3) return false;
    return true;
}

// ---------------------------------------------------------------------------
// verify

std::vector<MomentSpec> default_moment_specs(const EmbeddedGraph& g) {
    std::vector<MomentSpec> specs;
    specs.push_back({{0, g.n_vertices - 1}, {1, 1}});
    if (g.n_vertices >= 3) specs.push_back({{0, 1, 2}, {2, 1, 1}});
    return specs;
}

std::vector<std::pair<std::vector<int>, std::vector<int>>> default_griffiths_pairs(
    const EmbeddedGraph& g) {
    std::vector<int> r(g.n_vertices, 0), s(g.n_vertices, 0);
    r[0] = 1;
    r[g.n_vertices - 1] = 1;
    s[1 % g.n_vertices] = 1;
    s[2 % g.n_vertices] = 1;
    std::vector<int> r2 = r;
    r2[0] = 2;
    r2[g.n_vertices - 1] = 2;
    return {{r, s}, {r2, s}};
}

// Demonstration that the suite catches a corrupted vertex-contour weight:
// multiplying each admissible weight by b^{|eta|} squares the b exponent,
// and the mutated vertex-spin marginal must drift from the true one.
int run_mutation_demo(const ExperimentSpec& spec, const std::filesystem::path& dir) {
    EmbeddedGraph g = build_graph(spec.graph);
    const Params* chosen = nullptr;
    std::vector<Params> points = expand_grid(spec.grid);
    for (const Params& p : points)
        if (p.q >= 2 && p.b < 1.0) {
            chosen = &p;
            break;
        }
    if (!chosen) throw UsageError("mutation demo needs a grid point with q >= 2 and b < 1");
    const Params& p = *chosen;

    Distribution mutated;
    for_each_admissible(g, p, [&](const SpinPair& sp, double w) {
        mutated.add(key_spins(sp.sigma), w * std::pow(p.b, sp.eta.count()));
    });
    SigmaLaw sl = enumerate_sigma(g, p);
    double tv = mutated.total_variation(sl.sigma);

    Report r;
    r.identity = "unconstrained-equivalence[mutated b->b^2]";
    r.graph = describe_graph(g);
    r.params = describe_params(p);
    r.max_error = tv;
    r.pass = tv <= spec.tolerance;
    r.detail = "vertex-marginal tv under the mutated weight";
    std::ofstream out(dir / "reports.json");
    out << "[" << r.to_json() << "]\n";
    std::cout << (r.pass ? "[ ok ] " : "[FAIL] ") << r.identity << " " << r.params
              << " tv=" << fmt17(tv) << "\n";
    if (!r.pass) {
        std::cout << "mutation detected: first failing report is " << r.identity << "\n";
        return 1;
    }
    std::cout << "mutation NOT detected\n";
    return 0;
}

int cmd_verify(const CommonOpts& opts) {
    ExperimentSpec spec = load_spec(opts);
    std::filesystem::path dir = prepare_out_dir(opts);
    if (!opts.mutation.empty()) {
        if (opts.mutation != "b-squared")
            throw UsageError("unknown mutation '" + opts.mutation + "' (expected b-squared)");
        return run_mutation_demo(spec, dir);
    }

    EmbeddedGraph g = build_graph(spec.graph);
    const bool genus0 = g.topology == EmbeddedGraph::Topology::genus0;
    const double tol = spec.tolerance;
    const int ne = g.n_edges();
    std::vector<Report> reports;
    int skipped = 0;

    auto attempt = [&](auto&& fn) {
        try {
            reports.push_back(fn());
        } catch (const std::length_error&) {
            ++skipped;
        }
    };

    for (const Params& p : expand_grid(spec.grid)) {
        double x = p.x();  // rounds to a tiny nonzero value at some a+b = 1 points
        if (genus0 && std::abs(x) > 1e-12 && x > -1.0)
            attempt([&] { return check_potts_duality(g, p.q, x, tol); });
        if (ne <= 12 && x > -1.0) attempt([&] { return check_resummation(g, p.q, x, 0.5, tol); });
        if (genus0) attempt([&] { return check_omega_marginals(g, p, 1e8, tol); });
        if (p.a + p.b == 1.0) attempt([&] { return check_fk_reduction(g, p, 1e8, tol); });
        if (genus0 && p.a < 1.0)
            attempt([&] { return check_unconstrained_equivalence(g, p, 1e8, tol); });
        attempt([&] { return check_correlation_formula(g, p, default_moment_specs(g), 1e8, tol); });
        if (p.sum_le_one()) {
            attempt([&] { return check_griffiths(g, p, default_griffiths_pairs(g), 1e8, tol); });
            if (ne <= 12)
                attempt([&] { return check_fkg_lattice(omega_marginal_table(g, p, 1e8), tol); });
        }
        if (genus0)
            attempt([&] {
                return check_variance_identity(g, p, g.outer_face, central_face(g), 1e8, tol);
            });
        attempt([&] { return check_conditional_laws(g, p, 1e8, tol); });
        if (genus0 && default_two_state(p)) attempt([&] { return check_six_vertex(g, p, tol); });
        if (genus0 && p.qp == 2 && p.q <= 2 && std::abs(p.a * p.a + p.b * p.b - 1.0) <= 1e-9)
            attempt([&] { return check_current_law(g, p, 1e8, tol); });
        if (genus0 && p.qp == 2 && p.b == 1.0 && cubic(g))
            attempt([&] { return check_loop_marginal(g, p, 1e8, tol); });
    }

    std::ofstream jr(dir / "reports.json");
    if (!jr) throw std::runtime_error("cannot write " + (dir / "reports.json").string());
    jr << "[";
    const Report* first_fail = nullptr;
    int failures = 0;
    for (size_t i = 0; i < reports.size(); ++i) {
        const Report& r = reports[i];
        jr << (i ? ",\n " : "") << r.to_json();
        std::cout << (r.pass ? "[ ok ] " : "[FAIL] ") << r.identity << " (" << r.graph << "; "
                  << r.params << ") max_error=" << fmt17(r.max_error) << "\n";
        if (!r.pass) {
            ++failures;
            if (!first_fail) first_fail = &r;
        }
    }
    jr << "]\n";
    std::cout << reports.size() << " checks, " << failures << " failures, " << skipped
              << " skipped (enumeration out of range)\n";
    if (first_fail) {
        std::cout << "first failing report: " << first_fail->identity << " (" << first_fail->graph
                  << "; " << first_fail->params << ")\n";
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// sample and variance-scan

struct ChainTask {
    const EmbeddedGraph* g = nullptr;
    Params params;
    SamplerConfig cfg;
    int point_index = 0;
    int size_value = 0;  // box/torus linear size, 0 when fixed graph
    EstimatorAccumulator acc;
    std::string error;
};

struct ResultRow {
    std::string graph;
    Params params;
    std::string estimand;
    double value = 0.0;
    double std_error = 0.0;
    long n = 0;
};

void run_tasks(std::vector<ChainTask>& tasks, int threads) {
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            ChainTask& t = tasks[i];
            try {
                run_chain(*t.g, t.params, t.cfg, t.acc);
            } catch (const std::exception& e) {
                t.error = e.what();
            }
        }
    };
    int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
    for (const ChainTask& t : tasks)
        if (!t.error.empty()) throw std::runtime_error("chain failed: " + t.error);
}

void emit_rows(const EmbeddedGraph& g, const Params& p, const EstimatorAccumulator& acc,
               bool full_set, std::vector<ResultRow>& rows) {
    std::string graph = describe_graph(g);
    auto push = [&](const std::string& name, double value, double se, long n) {
        if (n > 0) rows.push_back({graph, p, name, value, se, n});
    };
    VarianceEstimate ve = estimate_height_variance(acc);
    ClusterCountEstimate ce = estimate_cluster_counts(acc);
    push("var_dh", ve.variance, ve.std_error, ve.n);
    push("surround", ce.surround.mean, ce.surround.std_error, ce.surround.n);
    push("n_nonzero", ce.n_nonzero.mean, ce.n_nonzero.std_error, ce.n_nonzero.n);
    if (full_set) {
        push("mean_dh", acc.dh.mean(), acc.dh.std_error_mean(), acc.dh.count());
        push("n_prime", ce.n_prime.mean, ce.n_prime.std_error, ce.n_prime.n);
        push("conn", ce.conn.mean, ce.conn.std_error, ce.conn.n);
        push("sigma0_sq", ce.sigma0_sq.mean, ce.sigma0_sq.std_error, ce.sigma0_sq.n);
    }
}

void write_csv(const std::filesystem::path& dir, const ExperimentSpec& spec,
               const std::vector<ResultRow>& rows) {
    std::filesystem::path path = dir / "results.csv";
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << kCsvHeader << "\n";
    for (const ResultRow& r : rows)
        out << spec.experiment << ',' << r.graph << ',' << r.params.q << ',' << r.params.qp << ','
            << fmt17(r.params.a) << ',' << fmt17(r.params.b) << ',' << r.estimand << ','
            << fmt17(r.value) << ',' << fmt17(r.std_error) << ',' << r.n << ',' << spec.seed
            << "\n";
}

// Measurement faces: anchor at the outer face against the most central face
// on genus 0; on the torus pair face 0 with a farthest face.
std::pair<int, int> measurement_faces(const EmbeddedGraph& g) {
    if (g.topology == EmbeddedGraph::Topology::genus0)
        return {g.outer_face, central_face(g)};
    std::vector<int> dist(g.n_faces, -1);
    std::deque<int> queue{0};
    dist[0] = 0;
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
    int best = 0;
    for (int u = 0; u < g.n_faces; ++u)
        if (dist[u] > dist[best]) best = u;
    return {0, best};
}

SamplerConfig chain_config(const ExperimentSpec& spec, int chain_id) {
    SamplerConfig cfg;
    cfg.sweeps = spec.sampler.sweeps;
    cfg.burn_in = spec.sampler.burn_in;
    cfg.thin = spec.sampler.thin;
    cfg.heatbath_weight = spec.sampler.heatbath_weight;
    cfg.cluster_weight = spec.sampler.cluster_weight;
    cfg.seed = spec.seed;
    cfg.chain = chain_id;
    return cfg;
}

int cmd_sample(const CommonOpts& opts) {
    ExperimentSpec spec = load_spec(opts);
    std::filesystem::path dir = prepare_out_dir(opts);
    EmbeddedGraph g = build_graph(spec.graph);
    auto [u1, u2] = measurement_faces(g);
    std::vector<Params> points = expand_grid(spec.grid);

    std::vector<ChainTask> tasks;
    for (size_t i = 0; i < points.size(); ++i)
        for (int c = 0; c < spec.sampler.chains; ++c) {
            ChainTask t;
            t.g = &g;
            t.params = points[i];
            t.cfg = chain_config(spec, static_cast<int>(i) * spec.sampler.chains + c);
            t.point_index = static_cast<int>(i);
            t.acc.u1 = u1;
            t.acc.u2 = u2;
            t.acc.track_disconnections = spec.sampler.track_disconnections;
            tasks.push_back(std::move(t));
        }
    run_tasks(tasks, opts.threads);

    std::vector<ResultRow> rows;
    for (size_t i = 0; i < points.size(); ++i) {
        EstimatorAccumulator merged;
        bool first = true;
        for (const ChainTask& t : tasks) {
            if (t.point_index != static_cast<int>(i)) continue;
            if (first) {
                merged = t.acc;
                first = false;
            } else {
                merged.merge(t.acc);
            }
        }
        emit_rows(g, points[i], merged, true, rows);
    }
    write_csv(dir, spec, rows);
    write_meta(dir, "sample", spec, opts.threads, static_cast<long>(rows.size()));
    return 0;
}

int cmd_variance_scan(const CommonOpts& opts) {
    ExperimentSpec spec = load_spec(opts);
    if (spec.sizes.empty()) throw UsageError("variance-scan requires a non-empty size list");
    if (spec.graph.kind != "box" && spec.graph.kind != "torus")
        throw UsageError("variance-scan sizes apply to box or torus graphs");
    std::filesystem::path dir = prepare_out_dir(opts);
    std::vector<Params> points = expand_grid(spec.grid);

    std::deque<EmbeddedGraph> graphs;
    std::vector<ChainTask> tasks;
    int point_counter = 0;
    for (int n : spec.sizes) {
        GraphSpec gs = spec.graph;
        gs.n = n;
        graphs.push_back(build_graph(gs));
        const EmbeddedGraph& g = graphs.back();
        auto [u1, u2] = measurement_faces(g);
        for (const Params& p : points) {
            for (int c = 0; c < spec.sampler.chains; ++c) {
                ChainTask t;
                t.g = &g;
                t.params = p;
                t.cfg = chain_config(spec, point_counter * spec.sampler.chains + c);
                t.point_index = point_counter;
                t.size_value = n;
                t.acc.u1 = u1;
                t.acc.u2 = u2;
                t.acc.track_disconnections = spec.sampler.track_disconnections;
                tasks.push_back(std::move(t));
            }
            ++point_counter;
        }
    }
    run_tasks(tasks, opts.threads);

    std::vector<ResultRow> rows;
    for (int i = 0; i < point_counter; ++i) {
        EstimatorAccumulator merged;
        const EmbeddedGraph* g = nullptr;
        Params p;
        bool first = true;
        for (const ChainTask& t : tasks) {
            if (t.point_index != i) continue;
            if (first) {
                merged = t.acc;
                g = t.g;
                p = t.params;
                first = false;
            } else {
                merged.merge(t.acc);
            }
        }
        emit_rows(*g, p, merged, false, rows);
    }
    write_csv(dir, spec, rows);
    write_meta(dir, "variance-scan", spec, opts.threads, static_cast<long>(rows.size()));
    return 0;
}

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "JSON config file");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "override the config seed")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    sub->add_option("--threads", opts.threads, "worker thread count");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"constrained spin-pair model: verification suites and samplers"};
    app.require_subcommand(1);
    CommonOpts opts;
    opts.threads = static_cast<int>(std::thread::hardware_concurrency());
    if (opts.threads < 1) opts.threads = 1;

    CLI::App* verify = app.add_subcommand("verify", "run the identity suite over a grid");
    add_common(verify, opts);
    verify->add_option("--mutation", opts.mutation,
                       "corrupt a weight to demonstrate detection (b-squared)");
    CLI::App* sample = app.add_subcommand("sample", "run chains over a grid, emit estimates");
    add_common(sample, opts);
    CLI::App* scan = app.add_subcommand("variance-scan", "height variance across system sizes");
    add_common(scan, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (verify->parsed()) return cmd_verify(opts);
        if (sample->parsed()) return cmd_sample(opts);
        if (scan->parsed()) return cmd_variance_scan(opts);
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
