#pragma once

#include <random>
#include <string>
#include <vector>

#include "pottspair/lattice.hpp"

namespace pottspair {

// Centered arithmetic alphabet {-(q-1), -(q-3), ..., q-1}.
std::vector<double> default_alphabet(int q);

// Model parameters: cluster counts q, q', edge weights a, b in (0,1], and the
// two symmetric spin alphabets. Derived quantities are exposed as methods so
// the undefined corners of the parameter range stay visible at the call site.
struct Params {
    int q = 2;
    int qp = 2;
    double a = 0.5;
    double b = 0.5;
    std::vector<double> Q;   // q distinct reals with Q = -Q
    std::vector<double> Qp;  // q' distinct reals with Q' = -Q'

    Params() : Params(2, 2, 0.5, 0.5) {}
    Params(int q_, int qp_, double a_, double b_);
    Params(int q_, int qp_, double a_, double b_, std::vector<double> Q_,
           std::vector<double> Qp_);

    bool sum_le_one() const { return a + b <= 1.0; }
    bool sum_ge_one() const { return a + b >= 1.0; }

    // Potts argument of the face model conditioned on an open edge set,
    // x = (1-a-b)/a, and its planar-duality partner x* = q'/x.
    double x() const { return (1.0 - a - b) / a; }
    bool has_x_star() const { return a + b != 1.0; }
    double x_star() const;

    // Single-bond density of the FK(qq') reduction at a+b = 1.
    double p_fk() const { return qp / (qp + 1.0 / a - 1.0); }

    // Couplings of the unconstrained vertex-pair model; undefined at a = 1.
    bool has_alpha_beta() const { return a < 1.0; }
    double alpha() const;  // ln((1-a)/b)
    double beta() const;   // ln(1 + q'a/(1-a))

    // Largest possible jump of a face spin: 2 max|Q'|.
    double max_jump() const;

    double moment_Q(int r) const;   // E[s^r] for s uniform on Q
    double moment_Qp(int r) const;  // E[s^r] for s uniform on Q'

    void validate() const;  // throws std::invalid_argument
};

// An admissible pair of a vertex configuration and a face configuration with
// cached contour sets. eta marks the dual edges whose crossing primal edge
// carries a vertex-spin disagreement; eta_p marks the primal edges whose
// crossing dual edge carries a face-spin disagreement. Admissibility says no
// quad carries both.
struct SpinPair {
    std::vector<double> sigma;    // vertex spins, members of Q
    std::vector<double> sigma_p;  // face spins, members of Q'
    EdgeSet eta;                  // dual side
    EdgeSet eta_p;                // primal side

    SpinPair() = default;
    SpinPair(const EmbeddedGraph& g, std::vector<double> vertex_spins,
             std::vector<double> face_spins);

    void refresh_contours(const EmbeddedGraph& g);
    bool admissible() const;
};

// Disagreement set of a single configuration: vertex spins produce a
// dual-side set, face spins a primal-side one.
EdgeSet contours(const EmbeddedGraph& g, const std::vector<double>& spins, Side spin_side);

// Unnormalized weight a^{|eta_p|} b^{|eta|}. Throws on inadmissible input.
double weight(const SpinPair& sp, const Params& p);

// Height function on vertices and faces: across every vertex-face incidence
// of a quad, value(face) - value(vertex) = sigma(vertex) * sigma_p(face).
struct HeightField {
    std::vector<double> vertex_value;
    std::vector<double> face_value;
    Side base_side = Side::dual;
    int base = 0;
    double base_value = 0.0;

    double value(Side s, int cell) const {
        return s == Side::primal ? vertex_value[cell] : face_value[cell];
    }
};

// Integrate the height over the vertex-face incidence graph from the base
// cell (breadth-first, neighbors in cell-index order), then re-verify the
// increment rule at every incidence. Genus 0 only.
HeightField height(const EmbeddedGraph& g, const SpinPair& sp, Side base_side, int base,
                   double base_value);

// Face-height increment along a path of pairwise adjacent faces on the torus:
// the sum over crossed edges of sigma(v) * (sigma_p(next) - sigma_p(prev)),
// which is independent of which endpoint v of the crossed edge is used.
double height_increment_torus(const EmbeddedGraph& g, const SpinPair& sp,
                              const std::vector<int>& face_path);

// Open primal edges and open dual edges produced by the edge coupling,
// together with their cluster partitions.
struct PercolationPair {
    EdgeSet omega;    // primal side
    EdgeSet omega_p;  // dual side
    ClusterPartition cl_omega;
    ClusterPartition cl_omega_p;
};

// Augment a spin pair with percolation configurations: contour edges are
// forced open on their own side and closed on the crossing side, and every
// free quad draws its (primal, dual) state pair from the regime table
//   a+b <= 1: (open, closed) a, (closed, open) b, (open, open) 1-a-b
//   a+b >= 1: (open, closed) 1-b, (closed, open) 1-a, (closed, closed) a+b-1.
PercolationPair couple_percolation(const EmbeddedGraph& g, const SpinPair& sp, const Params& p,
                                   std::mt19937_64& rng);

// Structural constraints tying a coupled sample to its spin pair: forcing
// inclusions, the regime inclusion between omega-dagger and omega_p, and
// spins constant on the clusters of their own side.
bool coupling_consistent(const EmbeddedGraph& g, const SpinPair& sp, const Params& p,
                         const PercolationPair& pp);

// Increment of the contour-restricted face configuration along a face path:
// the sum of sigma_p jumps across path edges whose contour lies in the
// omega-cluster rooted at cluster_root. Path independent for fixed endpoints.
double cluster_increment(const EmbeddedGraph& g, const SpinPair& sp,
                         const ClusterPartition& cl_omega, int cluster_root,
                         const std::vector<int>& face_path);

// Deterministic shortest face path: breadth-first from u1 with neighbor faces
// expanded in increasing index order.
std::vector<int> canonical_face_path(const EmbeddedGraph& g, int u1, int u2);

// Lowest-index edge between two adjacent faces; -1 if not adjacent.
int connecting_edge(const EmbeddedGraph& g, int u1, int u2);

// Text form, one "cell_id spin_value" line per cell; faces are numbered
// after the vertices (face u gets id n_vertices + u).
std::string spins_to_text(const EmbeddedGraph& g, const SpinPair& sp);
SpinPair spins_from_text(const EmbeddedGraph& g, const std::string& text);

}  // namespace pottspair
