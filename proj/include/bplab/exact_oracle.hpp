#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bplab/factor_graph.hpp"

namespace bplab {

/// Largest graph the enumerator accepts.
inline constexpr std::size_t kMaxOracleVars = 24;

class OracleLimitError : public std::length_error {
 public:
  explicit OracleLimitError(const std::string& what) : std::length_error(what) {}
};

struct ExactMarginals {
  std::vector<double> marginals;  // P(v = 1)
  double partition_z = 0.0;
};

/// Bit v of the assignment is the value of variable v.
using AssignmentFilter = std::function<bool(std::uint64_t assignment)>;

/// Brute force over all 2^n assignments of prod f(x_a, x_b).
/// Throws OracleLimitError above kMaxOracleVars and DomainError when Z = 0.
ExactMarginals exact_marginals(const FactorGraph& g);

/// Same, restricted to assignments accepted by `admissible` (hard
/// constraints on top of the pairwise product).
ExactMarginals exact_marginals(const FactorGraph& g, const AssignmentFilter& admissible);

/// Mean over variables of the binary KL divergence KL(p_i || q_i). q entries
/// must lie in (0,1); p entries in [0,1] with 0 log 0 = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Mean over variables of |p_i - q_i|.
double mean_abs_error(std::span<const double> p, std::span<const double> q);

double max_abs_error(std::span<const double> p, std::span<const double> q);

}  // namespace bplab
