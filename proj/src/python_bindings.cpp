#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <stdexcept>

#include "pottspair/lattice.hpp"
#include "pottspair/mcmc.hpp"
#include "pottspair/model.hpp"
#include "pottspair/oracle.hpp"
#include "pottspair/special.hpp"

namespace py = pybind11;

namespace pottspair {
namespace {

std::string topology_name(const EmbeddedGraph& g) {
    return g.topology == EmbeddedGraph::Topology::genus0 ? "genus0" : "torus";
}

py::dict mean_dict(const MeanEstimate& m) {
    py::dict out;
    out["mean"] = m.mean;
    out["std_error"] = m.std_error;
    out["n"] = m.n;
    return out;
}

// Run `chains` independent chains (chain ids base_chain, base_chain+1, ...)
// and merge their measurements. Faces default to the outer face and the
// hop-farthest inner face; the torus has no such canonical pair, so there
// they must be given explicitly.
py::dict sample_estimates(const EmbeddedGraph& g, const Params& p, const SamplerConfig& cfg,
                          int chains, int u1, int u2, bool track_disconnections) {
    if (chains < 1) throw std::invalid_argument("sample_estimates: chains must be >= 1");
    if (u1 < 0 || u2 < 0) {
        if (g.topology != EmbeddedGraph::Topology::genus0)
            throw std::invalid_argument(
                "sample_estimates: measurement faces must be given explicitly on the torus");
        u1 = g.outer_face;
        u2 = central_face(g);
    }

    EstimatorAccumulator total;
    total.u1 = u1;
    total.u2 = u2;
    total.track_disconnections = track_disconnections;
    {
        py::gil_scoped_release release;
        for (int c = 0; c < chains; ++c) {
            EstimatorAccumulator acc;
            acc.u1 = u1;
            acc.u2 = u2;
            acc.track_disconnections = track_disconnections;
            SamplerConfig chain_cfg = cfg;
            chain_cfg.chain = cfg.chain + c;
            run_chain(g, p, chain_cfg, acc);
            total.merge(acc);
        }
    }

    py::dict out;
    out["n"] = total.n;
    out["u1"] = u1;
    out["u2"] = u2;
    VarianceEstimate ve = estimate_height_variance(total);
    out["dh_mean"] = ve.mean;
    out["dh_variance"] = ve.variance;
    out["dh_variance_std_error"] = ve.std_error;
    ClusterCountEstimate cc = estimate_cluster_counts(total);
    out["nd_mean"] = cc.nd_mean;
    out["n_nonzero"] = mean_dict(cc.n_nonzero);
    out["n_prime"] = mean_dict(cc.n_prime);
    out["surround"] = mean_dict(cc.surround);
    out["conn"] = mean_dict(cc.conn);
    out["sigma0_sq"] = mean_dict(cc.sigma0_sq);
    return out;
}

std::vector<MomentSpec> to_moment_specs(
    const std::vector<std::pair<std::vector<int>, std::vector<int>>>& specs) {
    std::vector<MomentSpec> out;
    out.reserve(specs.size());
    for (const auto& [vertices, exponents] : specs) out.push_back({vertices, exponents});
    return out;
}

}  // namespace
}  // namespace pottspair

PYBIND11_MODULE(_pottspair, m) {
    using namespace pottspair;

    m.doc() =
        "Constrained primal/dual Potts pair model: embedded graphs, exact enumeration "
        "checks, and Markov chain sampling.";

    py::class_<EmbeddedGraph>(m, "EmbeddedGraph")
        .def_readonly("n_vertices", &EmbeddedGraph::n_vertices)
        .def_readonly("n_faces", &EmbeddedGraph::n_faces)
        .def_readonly("outer_face", &EmbeddedGraph::outer_face)
        .def_property_readonly("n_edges", &EmbeddedGraph::n_edges)
        .def_property_readonly("topology", &topology_name)
        .def("degree", &EmbeddedGraph::degree, py::arg("v"))
        .def("dump", &EmbeddedGraph::dump)
        .def("__repr__",
             [](const EmbeddedGraph& g) { return "<EmbeddedGraph " + describe_graph(g) + ">"; });

    m.def("build_box", &build_box, py::arg("n"), "2n x 2n grid with a marked outer face.");
    m.def("build_torus", &build_torus, py::arg("n"), "n x n torus, n >= 2.");
    m.def("build_prism", &build_prism, "Triangular prism: 6 vertices, 9 edges, 5 faces.");
    m.def("medial", &medial, py::arg("g"), "Medial graph of a genus-0 graph.");
    m.def("central_face", &central_face, py::arg("g"),
          "Inner face hop-farthest from the outer face (genus 0 only).");

    py::class_<Params>(m, "Params")
        .def(py::init<int, int, double, double>(), py::arg("q") = 2, py::arg("qp") = 2,
             py::arg("a") = 0.5, py::arg("b") = 0.5)
        .def(py::init<int, int, double, double, std::vector<double>, std::vector<double>>(),
             py::arg("q"), py::arg("qp"), py::arg("a"), py::arg("b"), py::arg("Q"),
             py::arg("Qp"))
        .def_readonly("q", &Params::q)
        .def_readonly("qp", &Params::qp)
        .def_readonly("a", &Params::a)
        .def_readonly("b", &Params::b)
        .def_readonly("Q", &Params::Q)
        .def_readonly("Qp", &Params::Qp)
        .def("x", &Params::x)
        .def("x_star", &Params::x_star)
        .def("p_fk", &Params::p_fk)
        .def("alpha", &Params::alpha)
        .def("beta", &Params::beta)
        .def("sum_le_one", &Params::sum_le_one)
        .def("sum_ge_one", &Params::sum_ge_one)
        .def("moment_Q", &Params::moment_Q, py::arg("r"))
        .def("moment_Qp", &Params::moment_Qp, py::arg("r"))
        .def("__repr__", [](const Params& p) { return "<Params " + describe_params(p) + ">"; });

    m.def("default_alphabet", &default_alphabet, py::arg("q"),
          "Symmetric alphabet of q reals with spacing 2.");

    py::class_<Report>(m, "Report")
        .def_readonly("identity", &Report::identity)
        .def_readonly("graph", &Report::graph)
        .def_readonly("params", &Report::params)
        .def_readonly("max_error", &Report::max_error)
        .def_readonly("passed", &Report::pass)
        .def_readonly("counterexample", &Report::counterexample)
        .def_readonly("detail", &Report::detail)
        .def("to_json", &Report::to_json)
        .def("__bool__", [](const Report& r) { return r.pass; })
        .def("__repr__", [](const Report& r) {
            return "<Report " + r.identity + " " + (r.pass ? "pass" : "FAIL") +
                   " max_error=" + std::to_string(r.max_error) + ">";
        });

    py::class_<Distribution>(m, "Distribution")
        .def("__len__", &Distribution::size)
        .def("total", &Distribution::total)
        .def("contains", &Distribution::contains, py::arg("key"))
        .def("weight", &Distribution::weight, py::arg("key"))
        .def("prob", &Distribution::prob, py::arg("key"))
        .def("entries", [](const Distribution& d) { return d.entries(); },
             "Raw weight per key, as inserted.")
        .def("total_variation", &Distribution::total_variation, py::arg("other"))
        .def("max_abs_diff", &Distribution::max_abs_diff, py::arg("other"));

    py::class_<SigmaLaw>(m, "SigmaLaw")
        .def_readonly("Z", &SigmaLaw::Z)
        .def_readonly("joint", &SigmaLaw::joint)
        .def_readonly("sigma", &SigmaLaw::sigma)
        .def_readonly("sigma_p", &SigmaLaw::sigma_p)
        .def_readonly("eta", &SigmaLaw::eta)
        .def_readonly("eta_p", &SigmaLaw::eta_p)
        .def_readonly("height_field", &SigmaLaw::height_field)
        .def_readonly("face_height", &SigmaLaw::face_height);

    py::class_<JointLaw>(m, "JointLaw")
        .def_readonly("Z", &JointLaw::Z)
        .def_readonly("full", &JointLaw::full)
        .def_readonly("spin_pair", &JointLaw::spin_pair)
        .def_readonly("omega", &JointLaw::omega)
        .def_readonly("omega_p", &JointLaw::omega_p);

    m.def("enumerate_sigma", &enumerate_sigma, py::arg("g"), py::arg("p"),
          py::arg("cap") = 1e8, "Exact law of the spin pair with its marginals.");
    m.def("enumerate_joint", &enumerate_joint, py::arg("g"), py::arg("p"),
          py::arg("cap") = 1e8, "Exact joint law of (sigma, sigma', omega, omega').");

    py::class_<FkgInput>(m, "FkgInput")
        .def_readonly("name", &FkgInput::name)
        .def_readonly("n_sites", &FkgInput::n_sites)
        .def_readonly("table", &FkgInput::table);

    m.def("omega_marginal_table", &omega_marginal_table, py::arg("g"), py::arg("p"),
          py::arg("cap") = 1e8);
    m.def("omega_marginal_form_table", &omega_marginal_form_table, py::arg("g"), py::arg("p"),
          py::arg("cap") = 1e8);
    m.def("sigma_marginal_table", &sigma_marginal_table, py::arg("g"), py::arg("p"),
          py::arg("cap") = 1e8);

    m.def("check_potts_duality", &check_potts_duality, py::arg("g"), py::arg("q"), py::arg("x"),
          py::arg("tol") = 1e-10);
    m.def("check_resummation", &check_resummation, py::arg("g"), py::arg("q"), py::arg("x"),
          py::arg("t"), py::arg("tol") = 1e-10);
    m.def("check_omega_marginals", &check_omega_marginals, py::arg("g"), py::arg("p"),
          py::arg("cap") = 1e8, py::arg("tol") = 1e-10);
    m.def("check_fk_reduction", &check_fk_reduction, py::arg("g"), py::arg("p"),
          py::arg("cap") = 1e8, py::arg("tol") = 1e-10);
    m.def("check_unconstrained_equivalence", &check_unconstrained_equivalence, py::arg("g"),
          py::arg("p"), py::arg("cap") = 1e8, py::arg("tol") = 1e-10);
    m.def("check_fkg_lattice", &check_fkg_lattice, py::arg("input"), py::arg("tol") = 1e-10);
    m.def(
        "check_correlation_formula",
        [](const EmbeddedGraph& g, const Params& p,
           const std::vector<std::pair<std::vector<int>, std::vector<int>>>& specs, double cap,
           double tol) { return check_correlation_formula(g, p, to_moment_specs(specs), cap, tol); },
        py::arg("g"), py::arg("p"), py::arg("specs"), py::arg("cap") = 1e8,
        py::arg("tol") = 1e-10,
        "specs: list of (vertices, exponents) pairs for spin monomials.");
    m.def("check_griffiths", &check_griffiths, py::arg("g"), py::arg("p"), py::arg("pairs"),
          py::arg("cap") = 1e8, py::arg("tol") = 1e-10,
          "pairs: list of (r, s) exponent-vector pairs over the vertices.");
    m.def("check_variance_identity", &check_variance_identity, py::arg("g"), py::arg("p"),
          py::arg("u1"), py::arg("u2"), py::arg("cap") = 1e8, py::arg("tol") = 1e-10);
    m.def("check_conditional_laws", &check_conditional_laws, py::arg("g"), py::arg("p"),
          py::arg("cap") = 1e8, py::arg("tol") = 1e-10);
    m.def("check_six_vertex", &check_six_vertex, py::arg("g"), py::arg("p"),
          py::arg("tol") = 1e-10);
    m.def("check_current_law", &check_current_law, py::arg("g"), py::arg("p"),
          py::arg("cap") = 1e8, py::arg("tol") = 1e-10);
    m.def("check_loop_marginal", &check_loop_marginal, py::arg("g"), py::arg("p"),
          py::arg("cap") = 1e8, py::arg("tol") = 1e-10);

    py::class_<SamplerConfig>(m, "SamplerConfig")
        .def(py::init([](long sweeps, long burn_in, long thin, uint64_t seed, int chain,
                         double heatbath_weight, double cluster_weight) {
                 SamplerConfig cfg;
                 cfg.sweeps = sweeps;
                 cfg.burn_in = burn_in;
                 cfg.thin = thin;
                 cfg.seed = seed;
                 cfg.chain = chain;
                 cfg.heatbath_weight = heatbath_weight;
                 cfg.cluster_weight = cluster_weight;
                 return cfg;
             }),
             py::arg("sweeps") = 0, py::arg("burn_in") = 0, py::arg("thin") = 1,
             py::arg("seed") = 1, py::arg("chain") = 0, py::arg("heatbath_weight") = 1.0,
             py::arg("cluster_weight") = 1.0)
        .def_readwrite("sweeps", &SamplerConfig::sweeps)
        .def_readwrite("burn_in", &SamplerConfig::burn_in)
        .def_readwrite("thin", &SamplerConfig::thin)
        .def_readwrite("seed", &SamplerConfig::seed)
        .def_readwrite("chain", &SamplerConfig::chain)
        .def_readwrite("heatbath_weight", &SamplerConfig::heatbath_weight)
        .def_readwrite("cluster_weight", &SamplerConfig::cluster_weight);

    m.def("sample_estimates", &sample_estimates, py::arg("g"), py::arg("p"), py::arg("cfg"),
          py::arg("chains") = 1, py::arg("u1") = -1, py::arg("u2") = -1,
          py::arg("track_disconnections") = true,
          "Height-increment variance and cluster-census estimates between two faces.");
    m.def("validate_against_oracle", &validate_against_oracle, py::arg("g"), py::arg("p"),
          py::arg("cfg"), py::call_guard<py::gil_scoped_release>(),
          "Total variation between sampled and enumerated spin-pair laws.");
}
