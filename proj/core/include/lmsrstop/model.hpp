#pragma once

// Market/expert model and logarithmic-scoring-rule rewards.
//
// The market prediction x_t is a Gaussian random walk (run backwards from the
// true value x_0) with N(0,1) steps; the expert sees a less noisy walk y_t
// whose steps have variance 1-q. All functions here are pure.

namespace lmsrstop {

/// A normal belief N(mean, variance).
struct GaussianSpec {
  double mean = 0.0;
  double variance = 1.0;
};

/// Everything the expert observes at t periods before delivery.
struct MarketState {
  int t = 1;         ///< periods remaining
  double x = 0.0;    ///< market prediction x_t
  double y = 0.0;    ///< expert prediction y_t
  double q = 0.5;    ///< expert quality, open interval (0, 1)
};

/// The two summands of the expert's expected reward for predicting now.
struct RewardBreakdown {
  double deviation_term = 0.0;  ///< (y_t - x_t)^2 / (2t)
  double quality_term = 0.0;    ///< -(q + log(1-q)) / 2
  double total = 0.0;
};

/// Position of the canonical walk S_t = (y_t - x_t)/sqrt(q).
struct CanonicalState {
  int t = 1;
  double s = 0.0;
};

struct TailBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Throws DomainError unless variance > 0.
void validate(const GaussianSpec& g);
/// Throws DomainError unless t >= 1 and 0 < q < 1.
void validate(const MarketState& state);

/// Standard normal complementary CDF, P[Z >= x]. Accurate to a few ulp
/// (delegates to std::erfc).
double normal_ccdf(double x);

/// Bracket for P[|S_t| >= lambda*sqrt(t)] = 2*normal_ccdf(lambda):
/// lower = exp(-lambda^2/2)/(lambda+2) (strict), upper = exp(-lambda^2/2).
TailBounds normal_tail_bounds(double lambda);

/// Realized log-score gain log(f_post(x0)/f_prior(x0)). May be negative.
double lmsr_realized_reward(const GaussianSpec& prior, const GaussianSpec& posterior, double x0);

/// Expected log-score gain when x0 ~ posterior, i.e. KL(posterior || prior).
double lmsr_expected_reward(const GaussianSpec& prior, const GaussianSpec& posterior);

/// -(q + log(1-q))/2, strictly positive on (0,1).
double quality_term(double q);

/// Expected reward of predicting at `state`: prior N(x_t, t), posterior
/// N(y_t, (1-q)t).
RewardBreakdown expert_immediate_reward(const MarketState& state);

CanonicalState canonical_state(const MarketState& state);

/// Expected reward of an expert following the optimal policy from `state`,
/// given psi_value = psi_t((y_t - x_t)/sqrt(q)).
double expert_policy_reward(const MarketState& state, double psi_value);

/// Optimal decision: predict now iff (y_t - x_t)^2 >= q * theta_t^2.
bool should_predict(const MarketState& state, double theta_t);

}  // namespace lmsrstop
