#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bplab/bp_engine.hpp"
#include "bplab/factor_graph.hpp"
#include "bplab/random.hpp"
#include "bplab/transformer.hpp"

namespace bplab {

struct EquivalenceReport {
  double max_abs_deviation = 0.0;
  std::vector<double> deviations;  // per variable
  AttentionMode mode = AttentionMode::kHard;
  double beta = 0.0;
  double tol = 0.0;
  bool passed = false;
};

/// `layers` forward passes against `layers` BP rounds (weighted_round with
/// w.ffn, which is qbbn_round for the exact parameters), compared on
/// decoded beliefs.
EquivalenceReport check_round(const FactorGraph& g, const BeliefState& s,
                              const TransformerWeights& w, double tol, std::size_t layers = 1);

struct TreeExactnessReport {
  std::vector<double> exact;
  std::vector<double> sumproduct;  // after exactly `passes` sweeps
  std::vector<double> qbbn;        // after `passes` QBBN rounds from the fresh state
  double sumproduct_deviation = 0.0;
  double qbbn_deviation = 0.0;
  std::size_t diameter = 0;
  std::size_t sweeps_to_converge = 0;  // first sweep that changed no message
  bool converged = false;
};

/// Throws std::invalid_argument for non-trees or passes < diameter.
TreeExactnessReport check_tree_exactness(const FactorGraph& tree, std::size_t passes);

/// What one forward pass computes, restated as weighted BP over the
/// attention-defined graph: slot h of token j is
/// offset[h][j] + gain[h][j] * sum_k attention[h](j, k) * belief_k.
struct ImplicitGraph {
  std::array<Eigen::MatrixXd, 2> attention;
  std::array<Eigen::VectorXd, 2> gain;
  std::array<Eigen::VectorXd, 2> offset;
  std::vector<FfnParams> params;  // per token

  [[nodiscard]] std::size_t size() const noexcept { return params.size(); }
};

/// Throws std::invalid_argument when a head's value projection writes its
/// scratch slot from anything but the belief dimension.
ImplicitGraph extract_implicit_graph(const TransformerWeights& w, const TokenMatrix& x);

std::vector<Probability> implicit_round(const ImplicitGraph& ig, std::span<const Probability> beliefs);

/// Edges (query, key) that carry at least half a query's attention mass in
/// some head and whose output is not gated off.
std::vector<std::pair<std::size_t, std::size_t>> implicit_edges(const ImplicitGraph& ig);

/// Max |implicit_round - decoded forward_pass| over beliefs.
double implicit_roundtrip_deviation(const TransformerWeights& w, const TokenMatrix& x);

/// Dense Q/K with entries U[-1,1], belief-routing values, no gate, FFN
/// parameters U[0.5,1.5]^2 x U[-0.5,0.5], soft mode at the given beta.
TransformerWeights random_weights(std::size_t n, Rng& rng, double beta = 1.0);

struct UniquenessPoint {
  FfnParams params;
  double max_deviation = 0.0;
};

struct UniquenessReport {
  std::vector<UniquenessPoint> points;
  std::size_t samples = 0;
};

/// {0.9, 1, 1.1}^2 x {-0.1, 0, 0.1}.
std::vector<FfnParams> default_uniqueness_grid();

/// Per grid point, max over sampled (m0, m1) in [0.001, 0.999]^2 of
/// |weighted_update - update_belief|. Every point sees the same samples.
UniquenessReport uniqueness_probe(std::span<const FfnParams> grid, std::size_t samples, Rng& rng);

}  // namespace bplab
