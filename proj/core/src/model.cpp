#include "lmsrstop/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lmsrstop/errors.hpp"

namespace lmsrstop {

void validate(const GaussianSpec& g) {
  if (!(g.variance > 0.0) || !std::isfinite(g.variance) || !std::isfinite(g.mean)) {
    throw DomainError("gaussian variance must be positive and finite, got " +
                      std::to_string(g.variance));
  }
}

void validate(const MarketState& state) {
  if (state.t < 1) {
    throw DomainError("market state requires t >= 1, got " + std::to_string(state.t));
  }
  if (!(state.q > 0.0 && state.q < 1.0)) {
    throw DomainError("expert quality must lie in (0, 1), got " + std::to_string(state.q));
  }
  if (!std::isfinite(state.x) || !std::isfinite(state.y)) {
    throw DomainError("market state predictions must be finite");
  }
}

double normal_ccdf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

TailBounds normal_tail_bounds(double lambda) {
  if (!(lambda >= 0.0)) {
    throw DomainError("normal_tail_bounds requires lambda >= 0, got " + std::to_string(lambda));
  }
  const double g = std::exp(-0.5 * lambda * lambda);
  return {g / (lambda + 2.0), g};
}

double lmsr_realized_reward(const GaussianSpec& prior, const GaussianSpec& posterior, double x0) {
  validate(prior);
  validate(posterior);
  const double dm = x0 - prior.mean;
  const double dp = x0 - posterior.mean;
  return 0.5 * std::log(prior.variance / posterior.variance) + dm * dm / (2.0 * prior.variance) -
         dp * dp / (2.0 * posterior.variance);
}

double lmsr_expected_reward(const GaussianSpec& prior, const GaussianSpec& posterior) {
  validate(prior);
  validate(posterior);
  const double shift = posterior.mean - prior.mean;
  const double ratio = posterior.variance / prior.variance;
  // log1p keeps ratio - 1 - log(ratio) accurate when the variances nearly agree.
  const double r1 = ratio - 1.0;
  return shift * shift / (2.0 * prior.variance) + 0.5 * (r1 - std::log1p(r1));
}

double quality_term(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw DomainError("expert quality must lie in (0, 1), got " + std::to_string(q));
  }
  return -0.5 * (q + std::log1p(-q));
}

RewardBreakdown expert_immediate_reward(const MarketState& state) {
  validate(state);
  const double d = state.y - state.x;
  RewardBreakdown out;
  out.deviation_term = d * d / (2.0 * state.t);
  out.quality_term = quality_term(state.q);
  out.total = out.deviation_term + out.quality_term;
  return out;
}

CanonicalState canonical_state(const MarketState& state) {
  validate(state);
  return {state.t, (state.y - state.x) / std::sqrt(state.q)};
}

double expert_policy_reward(const MarketState& state, double psi_value) {
  validate(state);
  return 0.5 * state.q * psi_value + quality_term(state.q);
}

bool should_predict(const MarketState& state, double theta_t) {
  validate(state);
  const double d = state.y - state.x;
  return d * d >= state.q * theta_t * theta_t;
}

}  // namespace lmsrstop
