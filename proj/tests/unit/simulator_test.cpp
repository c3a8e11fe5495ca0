#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "lmsrstop/errors.hpp"
#include "lmsrstop/simulator.hpp"
#include "oracles.hpp"

namespace {

using namespace lmsrstop;

TEST(Walk, DeterministicPerStream) {
  const WalkPath a = sample_walk(50, 9, 3);
  const WalkPath b = sample_walk(50, 9, 3);
  const WalkPath c = sample_walk(50, 9, 4);
  const WalkPath d = sample_walk(50, 10, 3);
  EXPECT_EQ(a.s, b.s);
  EXPECT_NE(a.s, c.s);
  EXPECT_NE(a.s, d.s);
  EXPECT_THROW(sample_walk(0, 1, 1), DomainError);
}

TEST(Walk, PrefixOfLongerWalk) {
  const WalkPath small = sample_walk(10, 5, 1);
  const WalkPath big = sample_walk(40, 5, 1);
  for (int t = 1; t <= 10; ++t) EXPECT_EQ(small.at(t), big.at(t));
}

TEST(Walk, MomentsMatchDefinition) {
  const int T = 64;
  const int n = 100'000;
  for (int t : {1, T / 2, T}) {
    double sum = 0.0, sumsq = 0.0, sum4 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double s = sample_walk(T, 11, static_cast<std::uint64_t>(i)).at(t);
      sum += s;
      sumsq += s * s;
      sum4 += s * s * s * s;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    EXPECT_NEAR(mean, 0.0, 5.0 * std::sqrt(t / static_cast<double>(n))) << t;
    // Var of the sample second moment is E S^4 - t^2 = 2 t^2.
    const double var_se = std::sqrt((sum4 / n - (sumsq / n) * (sumsq / n)) / n);
    EXPECT_NEAR(var, t, 5.0 * var_se) << t;
  }
}

TEST(Policies, Identifiers) {
  EXPECT_EQ(policy_id(FixedLilPolicy{0.2}), "fixed_lil(0.2)");
  EXPECT_EQ(policy_id(ImmediateStopPolicy{}), "immediate");
  EXPECT_EQ(policy_id(FinalStopPolicy{}), "final");
  EXPECT_EQ(policy_id(HindsightPolicy{}), "hindsight");
  EXPECT_THROW(check_applicable(FixedLilPolicy{0.2}, 15), DomainError);
  EXPECT_NO_THROW(check_applicable(FixedLilPolicy{0.2}, 16));
}

TEST(Policies, TriggersAndRewards) {
  const auto table = solve(SolverConfig::with_gamma(20, 0.02));
  WalkPath path = sample_walk(20, 1, 0);
  const StoppingPolicy optimal = OptimalTablePolicy{std::cref(table)};

  const auto fin = run_policy(path, FinalStopPolicy{});
  EXPECT_EQ(fin.stop_t, 1);
  EXPECT_DOUBLE_EQ(fin.reward, path.at(1) * path.at(1));
  const auto imm = run_policy(path, ImmediateStopPolicy{});
  EXPECT_EQ(imm.stop_t, 20);
  EXPECT_DOUBLE_EQ(imm.reward, path.at(20) * path.at(20) / 20);

  double best = 0.0;
  for (int t = 1; t <= 20; ++t) best = std::max(best, path.at(t) * path.at(t) / t);
  EXPECT_DOUBLE_EQ(run_policy(path, HindsightPolicy{}).reward, best);

  // Force an immediate trigger at t = T.
  path.s.back() = table.theta_at(20) + 0.5;
  const auto first = run_policy(path, optimal);
  EXPECT_EQ(first.stop_t, 20);

  const auto one = solve(SolverConfig::with_gamma(1, 0.01));
  const WalkPath p1 = sample_walk(1, 4, 4);
  const auto r1 = run_policy(p1, OptimalTablePolicy{std::cref(one)});
  EXPECT_EQ(r1.stop_t, 1);
  EXPECT_DOUBLE_EQ(r1.reward, p1.at(1) * p1.at(1));
}

TEST(MonteCarlo, HindsightDominatesPathwiseAndIsDeterministic) {
  const auto table = solve(SolverConfig::with_gamma(30, 0.02));
  const std::vector<StoppingPolicy> pol{OptimalTablePolicy{std::cref(table)}, FixedLilPolicy{0.2},
                                        HindsightPolicy{}};
  const auto run = monte_carlo(pol, 30, 5000, 77, {.keep_paths = true});
  const auto again = monte_carlo(pol, 30, 5000, 77, {.keep_paths = true});
  ASSERT_EQ(run.outcomes.size(), 3u);
  for (std::size_t i = 0; i < 5000; ++i) {
    EXPECT_GE(run.outcomes[2][i].reward, run.outcomes[0][i].reward);
    EXPECT_GE(run.outcomes[2][i].reward, run.outcomes[1][i].reward);
  }
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(run.results[k].mean_reward, again.results[k].mean_reward);
    EXPECT_EQ(run.results[k].std_error, again.results[k].std_error);
  }
  std::int64_t hist = 0;
  for (const auto& [t, count] : run.results[0].stop_time_histogram) hist += count;
  EXPECT_EQ(hist, 5000);
  EXPECT_THROW(monte_carlo(pol, 10, 100, 1), DomainError);
}

TEST(Tails, FractionsWithinSandwich) {
  const std::vector<double> lambdas{0.5, 1.0, 2.0};
  const std::vector<int> times{5, 20};
  const auto freqs = tail_frequencies(lambdas, times, 50'000, 3);
  ASSERT_EQ(freqs.size(), 6u);
  for (const auto& f : freqs) {
    EXPECT_TRUE(f.within) << f.lambda << ' ' << f.t;
    EXPECT_NEAR(f.fraction, oracle::two_sided_tail(f.lambda), 5.0 * f.std_error);
  }
}

TEST(Crossover, ClosedFormMatchesOracleAndSign) {
  for (int t : {2, 5, 10, 100, 1000}) {
    for (double u = 0.0; u <= 3.0; u += 0.125) {
      const double c = u * std::sqrt(static_cast<double>(t));
      const Crossover x = martingale_crossover(t, c);
      EXPECT_NEAR(x.conditional_mean, oracle::crossover_mean(t, c), 1e-12 * (1 + c * c));
      const double gap = 1.0 - c * c / t;
      const int expected = std::abs(gap) < 1e-12 ? 0 : (gap > 0 ? 1 : -1);
      EXPECT_EQ(x.drift_sign, expected) << t << ' ' << c;
    }
  }
  EXPECT_THROW(martingale_crossover(1, 0.0), DomainError);
}

TEST(Crossover, EmpiricalBridgeMoment) {
  for (double c : {0.0, std::sqrt(10.0), 2.0 * std::sqrt(10.0)}) {
    const Estimate e = empirical_conditional_moment(10, c, 200'000, 5);
    EXPECT_NEAR(e.mean, oracle::crossover_mean(10, c), 4.0 * e.std_error) << c;
  }
}

TEST(Scenario, PathIdentities) {
  const ScenarioPath p = sample_scenario(40, 0.3, 1.5, 8, 2);
  double sa = 0.0, sb = 0.0;
  for (int t = 1; t <= 40; ++t) {
    sa += p.a_steps[t - 1];
    sb += p.b_steps[t - 1];
    EXPECT_NEAR(p.x[t - 1], 1.5 + sa + sb, 1e-12);
    EXPECT_NEAR(p.y[t - 1], 1.5 + sb, 1e-12);
    const MarketState s = p.state(t);
    EXPECT_EQ(s.t, t);
    EXPECT_NEAR(canonical_state(s).s, -sa / std::sqrt(0.3), 1e-9);
  }
}

TEST(Scenario, CanonicalWalkHasUnitSteps) {
  const int n = 40'000;
  double sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_scenario(8, 0.7, 0.0, 21, static_cast<std::uint64_t>(i));
    const double s = canonical_state(p.state(8)).s;
    sumsq += s * s;
  }
  EXPECT_NEAR(sumsq / n, 8.0, 5.0 * 8.0 * std::sqrt(2.0 / n));
}

TEST(Scenario, RealizedMatchesExpectedSmall) {
  const auto table = solve(SolverConfig::with_gamma(30, 0.02));
  const auto r = expert_scenario(30, 0.5, 20'000, 12, table);
  EXPECT_NEAR(r.mean_difference, 0.0, 4.0 * r.difference_std_error);
  EXPECT_NEAR(r.quality_term, quality_term(0.5), 1e-15);
  EXPECT_GT(r.mean_expected, r.quality_term);
  EXPECT_GT(r.negative_fraction, 0.0);
}

}  // namespace
