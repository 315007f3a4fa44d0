#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "bplab/core_math.hpp"
#include "bplab/factor_graph.hpp"

namespace bplab {

/// Per-variable beliefs plus the two scratch slots filled by the gather step.
struct BeliefState {
  std::vector<Probability> beliefs;
  std::vector<std::array<Probability, 2>> scratch;

  /// All beliefs and scratch slots at 0.5.
  static BeliefState fresh(std::size_t num_vars);
  static BeliefState from_beliefs(std::vector<Probability> beliefs);

  [[nodiscard]] std::size_t size() const noexcept { return beliefs.size(); }

  friend bool operator==(const BeliefState&, const BeliefState&) = default;
};

/// The two-slot gather for one variable: beliefs of its first two neighbors
/// in canonical order, padded with the neutral 0.5.
std::array<Probability, 2> gather(const FactorGraph& g, const BeliefState& s, std::size_t var);

/// One synchronous QBBN round: every variable gathers from the pre-round
/// beliefs, then every belief becomes update_belief(slot0, slot1).
///
/// Only the first two neighbors (by index) are read. A variable with three
/// or more neighbors ignores the rest; binarize the graph first when every
/// neighbor must contribute. Factor tables are not consumed.
BeliefState qbbn_round(const FactorGraph& g, const BeliefState& s);

/// As qbbn_round with the update replaced by weighted_update(., ., params[v]).
BeliefState weighted_round(const FactorGraph& g, const BeliefState& s,
                           std::span<const FfnParams> params);

using Message = std::array<double, 2>;

/// Sum-product state. Indexed [factor][side]; side 0 is factor.a, side 1 is
/// factor.b.
struct MessageSet {
  std::vector<std::array<Message, 2>> var_to_factor;
  std::vector<std::array<Message, 2>> factor_to_var;

  static MessageSet uniform(const FactorGraph& g);
};

enum class Schedule { kParallel };

struct ConvergenceOptions {
  std::size_t max_iters = 1000;
  double tol = 1e-10;  // on max absolute change of normalized messages
  double damping = 0.0;
  Schedule schedule = Schedule::kParallel;
  bool normalize = true;  // renormalize every message after each update
};

struct BpResult {
  std::vector<Probability> marginals;
  std::size_t iterations = 0;
  bool converged = false;
  MessageSet messages;
};

/// One parallel sweep: all variable-to-factor messages from the current
/// factor-to-variable messages, then all factor-to-variable messages from
/// those. Returns the max absolute change of the normalized
/// factor-to-variable messages.
double sumproduct_sweep(const FactorGraph& g, MessageSet& m, const ConvergenceOptions& opts);

/// Normalized product of incoming factor-to-variable messages.
std::vector<Probability> sumproduct_marginals(const FactorGraph& g, const MessageSet& m);

/// Flat-schedule sum-product from uniform messages. converged is true iff a
/// sweep changed no message by tol or more within max_iters sweeps.
BpResult sumproduct_run(const FactorGraph& g, const ConvergenceOptions& opts = {});

std::vector<double> values_of(std::span<const Probability> ps);

}  // namespace bplab
