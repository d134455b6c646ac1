#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pottspair/lattice.hpp"
#include "pottspair/model.hpp"

namespace pottspair {

// Finite probability table over opaque string keys. Weights are kept as
// inserted; probabilities divide by the running total on demand, so callers
// can compare laws built from differently normalized sources.
class Distribution {
public:
    void add(const std::string& key, double w);

    double total() const { return total_; }
    std::size_t size() const { return w_.size(); }
    bool contains(const std::string& key) const { return w_.count(key) != 0; }
    double weight(const std::string& key) const;
    double prob(const std::string& key) const;
    const std::map<std::string, double>& entries() const { return w_; }

    // Sum of prob() over the support; callers assert |prob_sum() - 1| <= 1e-12.
    double prob_sum() const;

    // 1/2 * sum of |p - q| over the union of supports.
    double total_variation(const Distribution& o) const;
    // Largest |p - q| over the union of supports.
    double max_abs_diff(const Distribution& o) const;

private:
    std::map<std::string, double> w_;
    double total_ = 0.0;
};

// Canonical byte keys. Spins render as comma-joined %.17g, edge sets as a
// side letter plus hex words; composite keys join parts with ';'.
std::string key_value(double v);
std::string key_spins(const std::vector<double>& spins);
std::string key_edges(const EdgeSet& s);
std::string key_spin_pair(const SpinPair& sp);
std::string key_joint(const SpinPair& sp, const EdgeSet& omega, const EdgeSet& omega_p);

// Visit every admissible (sigma, sigma') once with its unnormalized weight
// a^{|eta(sigma')|} b^{|eta(sigma)|}. The naive state count q^{|V|} q'^{|U|}
// must not exceed cap (std::length_error otherwise).
void for_each_admissible(const EmbeddedGraph& g, const Params& p,
                         const std::function<void(const SpinPair&, double)>& visit,
                         double cap = 1e8);

// Visit every (sigma, sigma', omega, omega') with positive probability, with
// weight = pair weight times the product of per-quad edge-state
// probabilities. Contour quads are forced; the remaining quads run through
// the regime table of couple_percolation, zero-probability outcomes skipped.
// Visits beyond cap throw std::length_error.
void for_each_joint(const EmbeddedGraph& g, const Params& p,
                    const std::function<void(const SpinPair&, const EdgeSet& omega,
                                             const EdgeSet& omega_p, double)>& visit,
                    double cap = 1e8);

// Exact law of the spin pair with its marginals. On genus-0 graphs the
// height field is integrated from the outer face at value 0; height_field is
// keyed by all cell values and face_height[u] is the marginal law of the
// height at face u. Both stay empty on the torus.
struct SigmaLaw {
    double Z = 0.0;
    Distribution joint;
    Distribution sigma;
    Distribution sigma_p;
    Distribution eta;
    Distribution eta_p;
    Distribution height_field;
    std::vector<Distribution> face_height;
};

SigmaLaw enumerate_sigma(const EmbeddedGraph& g, const Params& p, double cap = 1e8);

// Exact joint law of (sigma, sigma', omega, omega').
struct JointLaw {
    double Z = 0.0;
    Distribution full;       // keyed by (sigma; sigma'; omega; omega')
    Distribution spin_pair;  // keyed by (sigma; sigma')
    Distribution omega;      // keyed by omega
    Distribution omega_p;    // keyed by omega'
};

JointLaw enumerate_joint(const EmbeddedGraph& g, const Params& p, double cap = 1e8);

// Abstract multigraph for partition-function arithmetic; loops and parallel
// edges are allowed and every vertex in [0, n_vertices) counts toward
// component totals.
struct Multigraph {
    int n_vertices = 0;
    std::vector<std::pair<int, int>> edges;
};

Multigraph primal_multigraph(const EmbeddedGraph& g);
// Spanning subgraph (V, omega): all vertices kept, only open edges.
Multigraph primal_subgraph(const EmbeddedGraph& g, const EdgeSet& omega);
Multigraph dual_multigraph(const EmbeddedGraph& g);
// Dual of the spanning subgraph (V, omega) in the inherited embedding: one
// vertex per component of the complementary dual set, one edge per open edge.
Multigraph dual_of_subgraph(const EmbeddedGraph& g, const EdgeSet& omega);

struct PartitionValue {
    double value = 0.0;
    std::string definition;  // "potts-hightemp" or "pair-model"
    // Sum of |terms| over |sum of terms| for the defining sum; large values
    // signal cancellation in sign-alternating evaluations.
    double condition = 1.0;
};

// Normalized Potts partition function with per-edge disagreement weight
// 1/(x+1):  Z(x) = sum over xi of x^{|xi|} q^{k(xi)}, divided by (x+1)^{|E|}.
// Requires |E| <= 30 and x != -1.
PartitionValue potts_Z(const Multigraph& mg, int q, double x);

// The pair model's partition sum over admissible (sigma, sigma').
PartitionValue pair_Z(const EmbeddedGraph& g, const Params& p, double cap = 1e8);

// Outcome of one machine check. max_error is the worst relative error or
// violation observed; counterexample is non-empty when a witness was found.
struct Report {
    std::string identity;
    std::string graph;
    std::string params;
    double max_error = 0.0;
    bool pass = false;
    std::string counterexample;
    std::string detail;

    std::string to_json() const;
};

std::string describe_graph(const EmbeddedGraph& g);
std::string describe_params(const Params& p);

// Planar duality of the Potts partition function:
//   Z_G(x) = q^{|V|-|E|-1} ((x+q)/(x+1))^{|E|} Z_{G*}(q/x).
// Requires genus 0 and x not in {0, -1, -q}.
Report check_potts_duality(const EmbeddedGraph& g, int q, double x, double tol = 1e-10);

// Subset resummation:
//   sum over xi of t^{|xi|} (x+1)^{|xi|} Z_{(V,xi)}(x)
//     = (1 + t(x+1))^{|E|} Z_G(t x / (1+t)).
// Requires t != -1 and |E| <= 24; the left side enumerates subsets directly.
Report check_resummation(const EmbeddedGraph& g, int q, double x, double t,
                         double tol = 1e-10);

// The open-edge marginal from the full joint enumeration against its closed
// forms: the sigma'-summed form, the dual-graph Potts form, the primal-graph
// Potts form (skipped at a+b = 1), and plain FK(q) at q' = 1. Genus 0.
Report check_omega_marginals(const EmbeddedGraph& g, const Params& p, double cap = 1e8,
                             double tol = 1e-10);

// At a+b = 1: omega is FK(qq') with p = q'/(q' + 1/a - 1) on genus 0, with
// the homology correction q'^{-delta(omega)} on the torus. On genus 0 the
// spin pair is recovered by independent uniform spins on the clusters of
// omega and of its complementary dual set. In the balanced torus case
// (q = q', a = b) the complementary dual configuration obeys the same closed
// form on the dual graph.
Report check_fk_reduction(const EmbeddedGraph& g, const Params& p, double cap = 1e8,
                          double tol = 1e-10);

// The vertex-spin marginal of the constrained pair model equals the
// s-marginal of the unconstrained two-layer vertex model with couplings
// alpha = ln((1-a)/b), beta = ln(1 + q'a/(1-a)); at a+b = 1 a third route
// through a single qq'-state Potts layer reduced mod q is compared as well.
// Requires genus 0 and a < 1.
Report check_unconstrained_equivalence(const EmbeddedGraph& g, const Params& p,
                                       double cap = 1e8, double tol = 1e-10);

// Dense table over {0,1}^{n_sites} for lattice-condition checks.
struct FkgInput {
    std::string name;
    int n_sites = 0;
    std::vector<double> table;  // size 2^{n_sites}, indexed by bit mask
};

// Table of the open-edge marginal (bit e = edge e open).
FkgInput omega_marginal_table(const EmbeddedGraph& g, const Params& p, double cap = 1e8);
// Same table from the contour-sum closed form instead of the joint
// enumeration; reaches graphs whose joint state space is out of range
// (genus 0, |E| <= 24). Agreement with omega_marginal_table on small graphs
// is covered by tests and by check_omega_marginals.
FkgInput omega_marginal_form_table(const EmbeddedGraph& g, const Params& p, double cap = 1e8);
// Table of the vertex-spin marginal for q = 2 (bit v = sigma(v) is the
// larger alphabet value).
FkgInput sigma_marginal_table(const EmbeddedGraph& g, const Params& p, double cap = 1e8);

// FKG lattice condition. Strictly positive tables use the two-site form
//   nu(xi with x,y on) nu(xi with x,y off) >= nu(xi, x on y off) nu(xi, y on x off)
// over all (xi, x, y); tables with zeros fall back to the full condition
//   nu(xi1 and xi2) nu(xi1 or xi2) >= nu(xi1) nu(xi2) over all pairs.
// Stops at the first counterexample and reports it with its slack.
Report check_fkg_lattice(const FkgInput& in, double tol = 1e-10);

// Moment specification: expectation of the product of sigma(v_i)^{r_i}.
struct MomentSpec {
    std::vector<int> vertices;
    std::vector<int> exponents;
};

// Correlation formula: the direct expectation of a spin monomial equals the
// sum over open-edge partitions of the marked vertices of the product of
// single-site moments m(k) = E[s^k], s uniform on Q.
Report check_correlation_formula(const EmbeddedGraph& g, const Params& p,
                                 const std::vector<MomentSpec>& specs, double cap = 1e8,
                                 double tol = 1e-10);

// Second Griffiths inequality <sigma^{r+s}> >= <sigma^r><sigma^s> for
// exponent vectors over the vertices; requires a+b <= 1. Also checks the
// single-site moment inequality m(j+k) >= m(j) m(k) for 0 <= j, k <= 4.
Report check_griffiths(const EmbeddedGraph& g, const Params& p,
                       const std::vector<std::pair<std::vector<int>, std::vector<int>>>& pairs,
                       double cap = 1e8, double tol = 1e-10);

// Height-increment variance between faces u1, u2 on genus 0:
//   Var[dh'] = E[s0^2] * sum over d != 0 of d^2 E[N_d]          (always)
//   E[s0^2] E[N!=0] <= Var[dh'] <= C^2 E[s0^2] E[N!=0]          (C = 2 max|Q'|,
//                                  lower bound when nonzero jumps are >= 1)
//   q' = 2, Q' = {-c, c}:  Var[dh'] = 4c^2 E[s0^2] E[N!=0]
//   a+b >= 1:  E[N!=0] >= (1 - 1/q')(E[N'] - 1)
// where N_d counts omega-clusters whose contour-restricted face increment
// along the canonical u1-u2 face path equals d, and N' counts omega'-clusters
// separating u1 from u2 (membership included). All terms are exact.
Report check_variance_identity(const EmbeddedGraph& g, const Params& p, int u1, int u2,
                               double cap = 1e8, double tol = 1e-10);

// Conditional laws against their closed forms:
//   sigma | sigma': Potts(q, e^{-J} = b) on the quotient by the sigma' contours;
//   sigma' | sigma: Potts(q', e^{-J} = a) on the dual quotient;
//   (sigma, sigma') | omega: independent product of uniform-on-cluster spins
//     and the (a/(1-b))^{|eta'|} law on contours inside omega (b < 1);
//   omega | (omega', sigma') for a+b >= 1: contours of sigma' plus independent
//     Bernoulli((1-b)/a) openings on the edges whose dual is closed.
// Reports the largest TV distance over all conditioning events.
Report check_conditional_laws(const EmbeddedGraph& g, const Params& p, double cap = 1e8,
                              double tol = 1e-10);

}  // namespace pottspair
