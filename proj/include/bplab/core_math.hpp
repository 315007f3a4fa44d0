#pragma once

#include <compare>
#include <stdexcept>
#include <string>

namespace bplab {

/// Guard band for probabilities. Every Probability lives in
/// [kProbEps, 1 - kProbEps].
inline constexpr double kProbEps = 1e-9;

class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A probability strictly inside (0, 1).
///
/// The checked constructor rejects anything outside the open interval and
/// clamps accepted values into the guard band. `clamped` is for results of
/// arithmetic that may round onto 0 or 1 (saturated sigmoids, marginals of
/// near-deterministic factors).
class Probability {
 public:
  constexpr Probability() = default;
  explicit Probability(double p);

  static Probability clamped(double p);

  [[nodiscard]] constexpr double value() const noexcept { return value_; }

  friend constexpr auto operator<=>(Probability, Probability) = default;

 private:
  struct Unchecked {};
  constexpr Probability(double p, Unchecked) : value_(p) {}

  double value_ = 0.5;
};

struct LogOdds {
  double value = 0.0;

  friend constexpr LogOdds operator+(LogOdds a, LogOdds b) { return {a.value + b.value}; }
  friend constexpr LogOdds operator*(double w, LogOdds a) { return {w * a.value}; }
  friend constexpr auto operator<=>(LogOdds, LogOdds) = default;
};

/// Sigmoid FFN parameters: sigma(w0 * logit(m0) + w1 * logit(m1) + b).
/// The prior bias b is exposed raw; mapping a non-uniform prior onto it is
/// left to the caller.
struct FfnParams {
  double w0 = 1.0;
  double w1 = 1.0;
  double b = 0.0;

  static constexpr FfnParams exact_bp() { return {1.0, 1.0, 0.0}; }

  friend constexpr bool operator==(const FfnParams&, const FfnParams&) = default;
};

/// log(p / (1 - p)). Throws DomainError for p <= 0, p >= 1 or NaN.
LogOdds logit(double p);
LogOdds logit(Probability p);

Probability sigmoid(LogOdds x);

/// The log-odds sum m0 (+) m1, computed in ratio form
/// m0 m1 / (m0 m1 + (1 - m0)(1 - m1)).
Probability update_belief(Probability m0, Probability m1);

/// The same operation computed as sigmoid(logit(m0) + logit(m1)). Kept for
/// cross-checking the ratio form.
Probability update_belief_logit_form(Probability m0, Probability m1);

/// sigmoid(w0 logit(m0) + w1 logit(m1) + b). With exact_bp() parameters this
/// returns update_belief(m0, m1) bit for bit.
Probability weighted_update(Probability m0, Probability m1, const FfnParams& params);

}  // namespace bplab
