#pragma once

// Seedable Monte Carlo engine for the canonical walk and the full
// market/expert scenario.
//
// Every path is a deterministic function of (seed, stream); path i of a run
// uses stream i, so results never depend on evaluation order. Normals come
// from boost::random's ziggurat on std::mt19937_64, both of which are fully
// specified, so output is reproducible across platforms.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lmsrstop/model.hpp"
#include "lmsrstop/solver.hpp"

namespace lmsrstop {

/// Canonical walk, indexed by time remaining: s[t-1] = S_t = Z_1 + ... + Z_t.
/// The observer is shown S_T first and S_1 last.
struct WalkPath {
  int horizon = 0;
  std::vector<double> s;

  double at(int t) const { return s[static_cast<std::size_t>(t - 1)]; }
};

WalkPath sample_walk(int horizon, std::uint64_t seed, std::uint64_t stream);

/// Stop at the first t with |S_t| >= theta(t).
struct OptimalTablePolicy {
  std::reference_wrapper<const PolicyTable> table;
};

/// Stop at the first t with S_t^2/t >= (1 - eps) 2 log log T. Needs T >= 16.
struct FixedLilPolicy {
  double epsilon = 0.2;
};

/// Stop at the first observation, t = T.
struct ImmediateStopPolicy {};

/// Always wait until t = 1.
struct FinalStopPolicy {};

/// Infeasible oracle: best t in hindsight, reward M_T = max_t S_t^2/t.
struct HindsightPolicy {};

using StoppingPolicy = std::variant<OptimalTablePolicy, FixedLilPolicy, ImmediateStopPolicy,
                                    FinalStopPolicy, HindsightPolicy>;

std::string policy_id(const StoppingPolicy& policy);

/// Throws DomainError if `policy` cannot run at horizon T.
void check_applicable(const StoppingPolicy& policy, int horizon);

struct StopOutcome {
  int stop_t = 1;
  double reward = 0.0;
};

/// Scans t = T..1 and stops at the first trigger; every policy stops at t = 1
/// if nothing triggers earlier.
StopOutcome run_policy(const WalkPath& path, const StoppingPolicy& policy);

struct SimResult {
  std::string policy;
  std::int64_t n_paths = 0;
  double mean_reward = 0.0;
  double std_error = 0.0;  ///< sample std / sqrt(n)
  double mean_stop_time = 0.0;
  std::map<int, std::int64_t> stop_time_histogram;
};

struct MonteCarloOptions {
  bool keep_paths = false;
};

struct MonteCarloRun {
  int horizon = 0;
  std::int64_t n_paths = 0;
  std::uint64_t seed = 0;
  std::vector<SimResult> results;
  /// outcomes[policy][path], filled when keep_paths is set.
  std::vector<std::vector<StopOutcome>> outcomes;
};

/// Runs every policy on the same n paths (common random numbers).
MonteCarloRun monte_carlo(std::span<const StoppingPolicy> policies, int horizon, std::int64_t n,
                          std::uint64_t seed, MonteCarloOptions options = {});

/// sqrt(a.se^2 + b.se^2)
double pooled_std_error(const SimResult& a, const SimResult& b);

struct TailFrequency {
  double lambda = 0.0;
  int t = 0;
  std::int64_t n = 0;
  double fraction = 0.0;
  double std_error = 0.0;
  TailBounds bounds;
  /// bounds.lower - 4 se < fraction <= bounds.upper + 4 se
  bool within = false;
};

/// Empirical P[|S_t| >= lambda sqrt(t)] against normal_tail_bounds.
std::vector<TailFrequency> tail_frequencies(std::span<const double> lambdas,
                                            std::span<const int> times, std::int64_t n,
                                            std::uint64_t seed);

struct HindsightReport {
  int horizon = 0;
  double epsilon = 0.0;
  std::int64_t n = 0;
  double level = 0.0;  ///< 2 (1 - eps) log log T
  double fraction = 0.0;
  double std_error = 0.0;
  double gamma2 = 0.0;
  double required = 0.0;  ///< 1 - gamma2 - 4 se
  bool vacuous = false;   ///< gamma2 >= 1
  bool satisfied = false;
};

/// Fraction of paths with M_T > 2 (1 - eps) log log T. Needs T > 16, 0 < eps < 1/2.
HindsightReport hindsight_fraction_above(int horizon, std::int64_t n, std::uint64_t seed,
                                         double epsilon);

struct Crossover {
  double conditional_mean = 0.0;  ///< E[S_{t-1}^2/(t-1) | S_t = c]
  int drift_sign = 0;             ///< sign(conditional_mean - c^2/t)
};

/// Closed form via S_{t-1} | S_t = c ~ N(c (t-1)/t, (t-1)/t). Needs t >= 2.
Crossover martingale_crossover(int t, double c);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo E[S_{t-1}^2/(t-1) | S_t = c], sampling the conditioned walk
/// as a Gaussian bridge pinned at S_t = c.
Estimate empirical_conditional_moment(int t, double c, std::int64_t n, std::uint64_t seed);

/// One market/expert realization. Arrays are indexed by t-1:
/// x[t-1] = x0 + sum_{tau<=t} (a+b), y[t-1] = x0 + sum_{tau<=t} b,
/// with a ~ N(0, q) and b ~ N(0, 1-q).
struct ScenarioPath {
  int horizon = 0;
  double q = 0.5;
  double x0 = 0.0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> a_steps;
  std::vector<double> b_steps;

  MarketState state(int t) const;
};

ScenarioPath sample_scenario(int horizon, double q, double x0, std::uint64_t seed,
                             std::uint64_t stream);

struct ScenarioReport {
  int horizon = 0;
  double q = 0.0;
  std::int64_t n = 0;
  double quality_term = 0.0;
  double mean_realized = 0.0;   ///< log-score gain against the true x0
  double realized_std_error = 0.0;
  double mean_expected = 0.0;   ///< expected reward at the stop state
  double expected_std_error = 0.0;
  double mean_difference = 0.0;  ///< paired realized - expected
  double difference_std_error = 0.0;
  double mean_stop_time = 0.0;
  double negative_fraction = 0.0;  ///< share of paths with a negative realized score
};

/// Expert follows should_predict against the table's thresholds; scores
/// are taken at the stop time with prior N(x_t, t), posterior N(y_t, (1-q)t).
ScenarioReport expert_scenario(int horizon, double q, std::int64_t n, std::uint64_t seed,
                               const PolicyTable& table);

}  // namespace lmsrstop
