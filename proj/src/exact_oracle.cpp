#include "bplab/exact_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "bplab/core_math.hpp"

namespace bplab {

namespace {

void check_lengths(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw std::invalid_argument("marginal vectors differ in length (" + std::to_string(p.size()) +
                                " vs " + std::to_string(q.size()) + ")");
  }
}

}  // namespace

ExactMarginals exact_marginals(const FactorGraph& g) {
  return exact_marginals(g, AssignmentFilter{});
}

ExactMarginals exact_marginals(const FactorGraph& g, const AssignmentFilter& admissible) {
  const std::size_t n = g.num_vars();
  if (n > kMaxOracleVars) {
    throw OracleLimitError("refusing to enumerate " + std::to_string(n) +
                           " variables; the bound is " + std::to_string(kMaxOracleVars));
  }

  const auto factors = g.factors();
  std::vector<double> mass_on(n, 0.0);
  double z = 0.0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t x = 0; x < count; ++x) {
    if (admissible && !admissible(x)) continue;
    double mass = 1.0;
    for (const Factor& f : factors) {
      mass *= f.table(static_cast<int>((x >> f.a) & 1U), static_cast<int>((x >> f.b) & 1U));
    }
    if (mass == 0.0) continue;
    z += mass;
    for (std::size_t v = 0; v < n; ++v) {
      if ((x >> v) & 1U) mass_on[v] += mass;
    }
  }
  if (!(z > 0.0)) throw DomainError("partition function is zero");

  ExactMarginals out;
  out.partition_z = z;
  out.marginals.reserve(n);
  for (double m : mass_on) out.marginals.push_back(m / z);
  return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  check_lengths(p, q);
  if (p.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(q[i] > 0.0 && q[i] < 1.0)) throw DomainError("KL reference entry outside (0,1)");
    if (!(p[i] >= 0.0 && p[i] <= 1.0)) throw DomainError("KL entry outside [0,1]");
    double term = 0.0;
    if (p[i] > 0.0) term += p[i] * std::log(p[i] / q[i]);
    if (p[i] < 1.0) term += (1.0 - p[i]) * std::log((1.0 - p[i]) / (1.0 - q[i]));
    total += term;
  }
  return total / static_cast<double>(p.size());
}

double mean_abs_error(std::span<const double> p, std::span<const double> q) {
  check_lengths(p, q);
  if (p.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
  return total / static_cast<double>(p.size());
}

double max_abs_error(std::span<const double> p, std::span<const double> q) {
  check_lengths(p, q);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(p[i] - q[i]));
  return worst;
}

}  // namespace bplab
