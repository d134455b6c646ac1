#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pottspair/lattice.hpp"
#include "pottspair/model.hpp"

namespace pottspair {

// Deterministic decorrelated generator per (seed, stream): the pair is
// split-mixed into a seed sequence, so chains with distinct indices share
// nothing while staying reproducible within this implementation.
std::mt19937_64 make_stream(uint64_t seed, uint64_t stream);

// Uniform double in [0, 1) with 53 random bits.
double u01(std::mt19937_64& rng);

// Inner face with the largest hop distance from the outer face, smallest
// index on ties. Genus 0 only.
int central_face(const EmbeddedGraph& g);

// Markov chain state. The coupled pair is refreshed at every measurement
// and kept here for inspection; moves leave it untouched.
struct ChainState {
    SpinPair sp;
    PercolationPair last_coupling;
    bool has_coupling = false;
    long sweep = 0;
};

// Constant spins at the first alphabet values: admissible, empty contours.
ChainState initial_state(const EmbeddedGraph& g, const Params& p);

// Forced partition of one side: for the vertex side the blocks are the
// components of the edges carrying a face-spin jump (spins must agree
// across them), and dually for the face side. Blocks are ordered by their
// smallest cell.
std::vector<std::vector<int>> quotient_blocks(const EmbeddedGraph& g, const SpinPair& sp,
                                              Side side);

// Exact single-block heat-bath conditional: probability of each alphabet
// value for the block's common spin given every other cell, proportional to
// b^(#disagreeing boundary edges) on the vertex side and a^(...) on the
// face side.
std::vector<double> block_conditional(const EmbeddedGraph& g, const SpinPair& sp,
                                      const Params& p, Side side,
                                      const std::vector<int>& block);

// One sequential heat-bath pass over the vertex-side blocks followed by one
// over the face-side blocks. Each block update is reversible for the target
// law; the state stays admissible throughout.
void quotient_heatbath_sweep(const EmbeddedGraph& g, ChainState& st, const Params& p,
                             std::mt19937_64& rng);

// Percolation-driven block refresh: couple (omega, omega'), redraw the
// vertex spins uniformly per omega-cluster with the face spins held, then
// couple again and redraw the face spins uniformly per omega'-cluster.
// Admissibility is preserved by construction and checked.
void cluster_move(const EmbeddedGraph& g, ChainState& st, const Params& p,
                  std::mt19937_64& rng);

struct SamplerConfig {
    double heatbath_weight = 1.0;  // relative frequency of heat-bath sweeps
    double cluster_weight = 1.0;   // relative frequency of cluster moves
    long sweeps = 0;
    long burn_in = 0;
    long thin = 1;
    uint64_t seed = 1;
    int chain = 0;
    std::string stream_path;  // optional: one text line per measurement

    void validate() const;  // throws std::invalid_argument
};

// Streaming batch bookkeeping: values are planned into a fixed number of
// batches; totals and per-batch first/second moments support means,
// variances, and batch-means standard errors for both. Merging concatenates
// batch lists, so partial accumulators combine associatively.
class BatchSeries {
public:
    void plan(long expected, int batches = 32);
    void add(double v);
    void merge(const BatchSeries& o);

    long count() const { return n_; }
    double mean() const;
    double variance() const;            // population variance of the values
    double std_error_mean() const;      // dispersion of batch means
    double std_error_variance() const;  // dispersion of per-batch variances
    int batch_count() const;

private:
    long batch_size_ = 1;
    struct Batch {
        long n = 0;
        double s1 = 0.0;
        double s2 = 0.0;
    };
    std::vector<Batch> batches_;
    long n_ = 0;
    double s1_ = 0.0;
    double s2_ = 0.0;
};

// Per-measurement statistics between the faces u1 and u2 along the
// canonical face path: the height increment, the cluster-increment census
// (nd_sum holds running sums of the number of omega-clusters per nonzero
// increment), the count of omega-clusters separating the faces, the count
// of omega'-clusters disconnecting them, the same-omega'-cluster indicator,
// and the squared spin at vertex 0.
struct EstimatorAccumulator {
    int u1 = -1;
    int u2 = -1;
    bool track_disconnections = true;

    long n = 0;
    BatchSeries dh;
    BatchSeries n_nonzero;
    BatchSeries n_prime;
    BatchSeries surround;
    BatchSeries conn;
    BatchSeries sigma0_sq;
    std::map<double, double> nd_sum;

    void plan(long expected);
    void merge(const EstimatorAccumulator& o);
    std::string to_json() const;
};

// Drive one chain: alternate the two move types at the configured odds,
// then after burn-in take a measurement every thin-th sweep with a fresh
// coupled sample. Deterministic given (seed, chain). The accumulator must
// be empty with its faces set; disconnection counts are skipped on the
// torus.
void run_chain(const EmbeddedGraph& g, const Params& p, const SamplerConfig& cfg,
               EstimatorAccumulator& acc);

struct VarianceEstimate {
    double mean = 0.0;
    double variance = 0.0;
    double std_error = 0.0;  // batch-means error of the variance
    long n = 0;
};

// Sample variance of the height increment with batch-means errors.
// Requires at least two measurements.
VarianceEstimate estimate_height_variance(const EstimatorAccumulator& acc);

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n = 0;
};

struct ClusterCountEstimate {
    std::map<double, double> nd_mean;  // E[N_d] per nonzero increment d
    MeanEstimate n_nonzero;
    MeanEstimate n_prime;
    MeanEstimate surround;
    MeanEstimate conn;
    MeanEstimate sigma0_sq;
};

ClusterCountEstimate estimate_cluster_counts(const EstimatorAccumulator& acc);

// Total variation between the empirical thinned spin-pair frequencies and
// the enumerated law. The graph must be small enough to enumerate.
double validate_against_oracle(const EmbeddedGraph& g, const Params& p,
                               const SamplerConfig& cfg);

}  // namespace pottspair
