#include "lmsrstop/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "lmsrstop/bounds.hpp"
#include "lmsrstop/policy_io.hpp"
#include "lmsrstop/simulator.hpp"

namespace lmsrstop {

GridInvariantReport check_grid_invariants(const PolicyTable& table, double slope_slack,
                                          double tolerance) {
  GridInvariantReport rep;
  for (const auto& [t, row] : table.rows) {
    ++rep.rows_checked;
    const double gamma = row.gamma;
    const auto& v = row.values;
    double prev_excess = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      ++rep.points_checked;
      const double c = static_cast<double>(i) * gamma;
      const double stop = c * c / t;
      if (v[i] < stop - tolerance) ++rep.below_stop_value;
      const double excess = v[i] - stop;
      if (i > 0) {
        const double rise = excess - prev_excess;
        if (rise > tolerance) ++rep.excess_increases;
        rep.worst_excess_increase = std::max(rep.worst_excess_increase, rise);
        const double slope = std::abs(v[i] - v[i - 1]) / gamma;
        const double c_left = c - gamma;
        const double allowed = 2.0 * (c_left + gamma) / t + slope_slack * gamma / t;
        const double margin = slope - allowed;
        if (margin > tolerance) ++rep.slope_violations;
        rep.worst_slope_margin = i == 1 ? margin : std::max(rep.worst_slope_margin, margin);
      }
      prev_excess = excess;
    }
  }
  return rep;
}

ThresholdReport check_thresholds(const PolicyTable& table, double tolerance) {
  ThresholdReport rep;
  rep.theta1_zero = table.horizon() >= 1 && table.theta_at(1) == 0.0;
  // theta is the upper end of its bracket, so it may sit above the exact
  // boundary by up to the bracket width. At t = 2 the envelope is tight.
  const double resolution =
      table.config.refine_theta ? table.config.gamma / 16.0 : table.config.gamma;
  for (int t = 1; t <= table.horizon(); ++t) {
    const double th = table.theta_at(t);
    const double p0 = table.psi0_at(t);
    if (th - resolution > t * std::sqrt(std::max(p0, 0.0)) + tolerance) ++rep.envelope_violations;
    if (t >= 2) {
      if (!(th > 0.0)) ++rep.nonpositive;
      if (p0 > th * th / t + tolerance) ++rep.psi0_violations;
    }
  }
  return rep;
}

namespace {

std::string describe(const std::ostringstream& os) { return os.str(); }

CheckResult threshold_check(const PolicyTable& table) {
  const ThresholdReport r = check_thresholds(table);
  std::ostringstream os;
  os << "theta(1)=0:" << (r.theta1_zero ? "yes" : "no")
     << " envelope_violations=" << r.envelope_violations
     << " psi0_violations=" << r.psi0_violations << " nonpositive=" << r.nonpositive;
  return {"threshold_envelope", r.ok(), describe(os)};
}

CheckResult grid_check(const PolicyTable& table) {
  if (table.rows.size() < static_cast<std::size_t>(table.horizon())) {
    return {"grid_invariants", false, "full grid not retained"};
  }
  const GridInvariantReport r = check_grid_invariants(table);
  std::ostringstream os;
  os << "rows=" << r.rows_checked << " points=" << r.points_checked
     << " below_stop=" << r.below_stop_value << " excess_increases=" << r.excess_increases
     << " slope=" << r.slope_violations;
  return {"grid_invariants", r.violations() == 0, describe(os)};
}

CheckResult second_derivative_check(const PolicyTable& table) {
  std::ostringstream os;
  bool ok = true;
  int checked = 0;
  for (int t : {2, 10, 100}) {
    if (t > table.horizon() || !table.has_row(t)) continue;
    const auto r = second_derivative_diagnostic(table, t);
    const bool good = r.within_bounds == r.interior_points && r.stop_region_max_deviation < 1e-6;
    ok = ok && good;
    ++checked;
    os << "t=" << t << " within=" << r.within_bounds << "/" << r.interior_points
       << " stop_dev=" << format_real(r.stop_region_max_deviation) << ' ';
  }
  if (checked == 0) return {"second_derivative", false, "no retained rows at t in {2,10,100}"};
  return {"second_derivative", ok, os.str()};
}

CheckResult dp_mc_check(const PolicyTable& table, const VerifyOptions& opt) {
  const int T = table.horizon();
  const std::array<StoppingPolicy, 1> policies{OptimalTablePolicy{std::cref(table)}};
  const auto run = monte_carlo(policies, T, opt.n_paths, opt.seed);
  const auto& r = run.results.front();
  const double gap = std::abs(r.mean_reward - table.capital_psi_at(T));
  const double allowed = 4.0 * r.std_error + table.accumulated_error_bound();
  std::ostringstream os;
  os << "mc=" << format_real(r.mean_reward) << " se=" << format_real(r.std_error)
     << " Psi(T)=" << format_real(table.capital_psi_at(T)) << " gap=" << format_real(gap)
     << " allowed=" << format_real(allowed);
  return {"dp_mc_agreement", gap <= allowed, os.str()};
}

CheckResult ordering_check(const PolicyTable& table, const VerifyOptions& opt) {
  const int T = table.horizon();
  std::vector<StoppingPolicy> policies{HindsightPolicy{}, OptimalTablePolicy{std::cref(table)}};
  const bool with_lil = T >= 16;
  if (with_lil) policies.emplace_back(FixedLilPolicy{0.2});
  policies.emplace_back(FinalStopPolicy{});
  const auto run = monte_carlo(policies, T, opt.n_paths, opt.seed, {.keep_paths = true});
  const auto& res = run.results;

  std::size_t pathwise = 0;
  for (std::size_t i = 0; i < run.outcomes[0].size(); ++i) {
    if (run.outcomes[0][i].reward < run.outcomes[1][i].reward) ++pathwise;
  }
  bool ok = pathwise == 0;
  std::ostringstream os;
  for (std::size_t k = 0; k + 1 < res.size(); ++k) {
    const double slack = 3.0 * pooled_std_error(res[k], res[k + 1]);
    ok = ok && res[k].mean_reward >= res[k + 1].mean_reward - slack;
  }
  for (const auto& r : res) os << r.policy << '=' << format_real(r.mean_reward) << ' ';
  os << "pathwise_exceptions=" << pathwise;
  return {"policy_ordering", ok, os.str()};
}

CheckResult concentration_check(const PolicyTable& table, const VerifyOptions& opt) {
  const std::array<double, 4> lambdas{0.5, 1.0, 2.0, 3.0};
  std::vector<int> times;
  for (int t : {10, 100}) {
    if (t <= table.horizon()) times.push_back(t);
  }
  if (times.empty()) times.push_back(table.horizon());
  const auto freqs = tail_frequencies(lambdas, times, opt.tail_paths, opt.seed);
  std::size_t bad = 0;
  for (const auto& f : freqs) bad += f.within ? 0 : 1;
  std::ostringstream os;
  os << "cases=" << freqs.size() << " outside=" << bad;
  return {"concentration_sandwich", bad == 0, os.str()};
}

CheckResult bounds_check(const PolicyTable& table) {
  const int T = table.horizon();
  if (T <= 10) return {"bounds_sandwich", true, "T <= 10: bounds not defined, skipped"};
  const Horizon h = Horizon::from_t(T);
  const double psi = table.capital_psi_at(T);
  const double err = table.accumulated_error_bound();
  const auto up = min_upper_bound(h);
  bool ok = psi <= up.value + err;
  std::ostringstream os;
  os << "Psi(T)=" << format_real(psi) << " upper=" << format_real(up.value) << "@eps="
     << format_real(up.epsilon);
  if (T > 16) {
    const auto lo = max_lower_bound(h);
    ok = ok && psi >= lo.value - err;
    os << " lower=" << format_real(lo.value) << (lo.value <= 0.0 ? " (vacuous)" : "");
  }
  return {"bounds_sandwich", ok, os.str()};
}

CheckResult crossover_check(const VerifyOptions& opt) {
  bool ok = true;
  for (int t : {2, 3, 5, 10, 50, 100}) {
    for (double r : {0.0, 0.25, 0.5, 0.9, 1.1, 2.0, 4.0}) {
      const double c = std::sqrt(r * t);
      const int expect = r < 1.0 ? 1 : (r > 1.0 ? -1 : 0);
      ok = ok && martingale_crossover(t, c).drift_sign == expect;
    }
  }
  std::ostringstream os;
  const double root10 = std::sqrt(10.0);
  for (double c : {0.0, root10, 2.0 * root10}) {
    const auto est = empirical_conditional_moment(10, c, opt.n_paths, opt.seed);
    const double exact = martingale_crossover(10, c).conditional_mean;
    const bool good = std::abs(est.mean - exact) <= 4.0 * est.std_error;
    ok = ok && good;
    os << "c=" << format_real(c) << " mc=" << format_real(est.mean)
       << " exact=" << format_real(exact) << ' ';
  }
  return {"martingale_crossover", ok, os.str()};
}

}  // namespace

std::vector<CheckResult> run_verification(const PolicyTable& table, const VerifyOptions& options) {
  std::vector<CheckResult> out;
  out.push_back(threshold_check(table));
  out.push_back(grid_check(table));
  out.push_back(second_derivative_check(table));
  out.push_back(dp_mc_check(table, options));
  out.push_back(ordering_check(table, options));
  out.push_back(concentration_check(table, options));
  out.push_back(bounds_check(table));
  out.push_back(crossover_check(options));
  return out;
}

}  // namespace lmsrstop
