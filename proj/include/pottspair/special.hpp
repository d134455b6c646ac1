#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pottspair/lattice.hpp"
#include "pottspair/model.hpp"
#include "pottspair/oracle.hpp"

namespace pottspair {

// Orientation of every edge of the medial graph of a genus-0 host graph.
// Medial edges reuse the host's corner ids, so the field is indexed by
// corner id. Bit 1 points the arrow along the canonical medial dart, which
// keeps the vertex-type medial face on the left; bit 0 reverses it.
struct ArrowConfig {
    std::vector<uint8_t> along;  // one bit per corner of the host
};

// Exactly two arrows in and two arrows out at every medial vertex. Local
// check at the medial vertex over host edge e using the four corner bits.
bool ice_rule_holds(const EmbeddedGraph& g, const ArrowConfig& ac);

// Medial vertices grouped by local arrow type: n1 has a face-spin jump
// across its host edge (weight a), n2 has a vertex-spin jump along it
// (weight b), n3 has neither (weight 1). Requires the ice rule, which also
// guarantees the three types are exclusive.
struct VertexTypes {
    int n1 = 0;
    int n2 = 0;
    int n3 = 0;
};
VertexTypes classify_arrows(const EmbeddedGraph& g, const ArrowConfig& ac);

// Unnormalized arrow-field weight a^{n1} b^{n2}.
double arrow_weight(const EmbeddedGraph& g, const ArrowConfig& ac, const Params& p);

// Height on the medial faces (host vertices and faces) integrated from the
// arrows: crossing an arrow that points from right to left raises the value
// by one, so the higher of the two heights beside an arrow lies on its
// left. The base value sits on the host's outer face and must be odd, which
// keeps the height odd on faces and even on vertices. Throws when the
// arrows fail the ice rule, since only conservative flows integrate to a
// single-valued height.
HeightField arrow_height(const EmbeddedGraph& g, const ArrowConfig& ac, int base_value);

// Two-valued spin pair to arrow field: every medial edge is oriented so
// that the higher adjacent height, equivalently the side whose spin product
// is +1, lies on the arrow's left. Requires all vertex and face spins in
// {-1, +1}; the ice rule then holds edge by edge exactly because the pair
// is admissible.
ArrowConfig spins_to_arrows(const EmbeddedGraph& g, const SpinPair& sp);

// Arrow field to spin pair: integrate the height from the outer face at
// base value sign (+1 or -1) and read the spins off the height mod 4,
// sigma(v) = i^{H(v)} on vertices and sigma'(u) = i^{H(u)-1} on faces. The
// two base signs produce the two preimages of the arrow field, which differ
// by a joint negation of (sigma, sigma').
SpinPair arrows_to_spins(const EmbeddedGraph& g, const ArrowConfig& ac, int sign);

// All arrow configurations over medial(g) satisfying the ice rule, in
// increasing order of the bit mask (corner 0 is the lowest bit). Requires
// 2 |E| <= 24.
std::vector<ArrowConfig> enumerate_ice(const EmbeddedGraph& g);

// One '0'/'1' character per medial edge in index order.
std::string arrows_to_text(const ArrowConfig& ac);
ArrowConfig arrows_from_text(const EmbeddedGraph& g, const std::string& text);

// Machine check of the arrow-field correspondence at q = q' = 2 with spins
// in {-1, +1}: the ice count equals half the admissible-pair count, both
// round trips are exact, a^{n1} b^{n2} reproduces the pair weight, the two
// heights agree pointwise up to one additive constant per configuration,
// and the law induced on spin pairs by the arrow-field weights matches the
// enumerated law within tol.
Report check_six_vertex(const EmbeddedGraph& g, const Params& p, double tol = 1e-10);

// Trace of a sourceless current: the support omega and its odd part eta,
// both primal. eta is an even subgraph of the host and eta is contained in
// omega.
struct CurrentTrace {
    EdgeSet eta;
    EdgeSet omega;
};

// Read the trace off a coupled configuration: eta is the face-spin contour
// (primal side), omega the open primal edges. Rejects face spins that are
// not two-valued symmetric and supports that miss a contour edge; verifies
// evenness of eta.
CurrentTrace current_trace(const EmbeddedGraph& g, const SpinPair& sp, const EdgeSet& omega);

// Enumerated law of the trace (eta, omega) against the closed forms
//   q = 1:  a^{|eta|} (1-b)^{|omega minus eta|} b^{|E minus omega|}
//   q = 2:  2^{k(omega)+|omega|} x^{|eta|} (x^2)^{|omega minus eta|}
//           (1-x^2)^{|E minus omega|},  a = 2x/(1+x^2), x in (0,1],
// with the support checked in both directions against the sourceless
// traces (eta even, eta inside omega). Requires genus 0, q' = 2, q in
// {1, 2}, and a^2 + b^2 = 1.
Report check_current_law(const EmbeddedGraph& g, const Params& p, double cap = 1e8,
                         double tol = 1e-10);

// Enumerated marginal law of the face-spin contour on a 3-regular genus-0
// host at b = 1, q' = 2, keyed by key_edges of the primal contour. Every
// configuration in the support has vertex degrees 0 or 2 only.
Distribution loop_marginal(const EmbeddedGraph& g, const Params& p, double cap = 1e8);

// The contour marginal against the loop weights n^{#loops} x^{|eta|} with
// n = q and x = a/n, and the equivalent cluster form n^{k(eta)} a^{|eta|};
// the support is checked in both directions against the degree-0/2 edge
// sets of the host.
Report check_loop_marginal(const EmbeddedGraph& g, const Params& p, double cap = 1e8,
                           double tol = 1e-10);

}  // namespace pottspair
