#include "bplab/core_math.hpp"

#include <algorithm>
#include <cmath>

namespace bplab {

namespace {

std::string describe(double p) { return std::to_string(p); }

}  // namespace

Probability::Probability(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("probability must lie in the open interval (0,1), got " + describe(p));
  }
  value_ = std::clamp(p, kProbEps, 1.0 - kProbEps);
}

Probability Probability::clamped(double p) {
  if (std::isnan(p)) throw DomainError("probability is NaN");
  return Probability(std::clamp(p, kProbEps, 1.0 - kProbEps), Unchecked{});
}

LogOdds logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("logit is undefined outside (0,1), got " + describe(p));
  }
  return {std::log(p / (1.0 - p))};
}

LogOdds logit(Probability p) { return logit(p.value()); }

Probability sigmoid(LogOdds x) {
  if (std::isnan(x.value)) throw DomainError("sigmoid of NaN");
  if (x.value >= 0.0) return Probability::clamped(1.0 / (1.0 + std::exp(-x.value)));
  const double e = std::exp(x.value);
  return Probability::clamped(e / (1.0 + e));
}

Probability update_belief(Probability m0, Probability m1) {
  const double a = m0.value();
  const double b = m1.value();
  const double agree = a * b;
  const double disagree = (1.0 - a) * (1.0 - b);
  return Probability::clamped(agree / (agree + disagree));
}

Probability update_belief_logit_form(Probability m0, Probability m1) {
  return sigmoid(logit(m0) + logit(m1));
}

Probability weighted_update(Probability m0, Probability m1, const FfnParams& params) {
  if (params == FfnParams::exact_bp()) return update_belief(m0, m1);
  return sigmoid(params.w0 * logit(m0) + params.w1 * logit(m1) + LogOdds{params.b});
}

}  // namespace bplab
