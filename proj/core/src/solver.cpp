#include "lmsrstop/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "lmsrstop/errors.hpp"

namespace lmsrstop {

namespace {

// Allocation ceilings, counted in doubles.
constexpr std::size_t kMaxNodes = 50'000'000;
constexpr std::size_t kMaxRowPoints = 200'000'000;
constexpr std::size_t kMaxRetained = 500'000'000;

// Slack on the sweep beyond the t*sqrt(psi_t(0)) envelope, in grid steps.
constexpr std::size_t kEnvelopeMargin = 16;

std::string fmt(double v) { return std::to_string(v); }

}  // namespace

double truncation_bound(int horizon, double epsilon) {
  if (horizon < 1) throw DomainError("horizon must be >= 1, got " + std::to_string(horizon));
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw DomainError("epsilon must lie in (0, 1), got " + fmt(epsilon));
  }
  return std::sqrt(6.0 * std::log(2.0 * horizon / epsilon));
}

GridParameters default_parameters(int horizon, double epsilon) {
  if (horizon <= 2) {
    throw DomainError("default_parameters requires T >= 3 (log log T must be positive), got " +
                      std::to_string(horizon));
  }
  const double T = horizon;
  const double h = truncation_bound(horizon, epsilon);
  const double gamma = std::sqrt(epsilon) / (T * std::log(T) * std::log(std::log(T)));
  return {gamma, h};
}

SolverConfig SolverConfig::certified_defaults(int horizon, double epsilon) {
  SolverConfig cfg;
  cfg.horizon = horizon;
  cfg.epsilon = epsilon;
  cfg.h = truncation_bound(horizon, epsilon);
  cfg.gamma = horizon >= 3 ? std::min(default_parameters(horizon, epsilon).gamma, kMaxDefaultGamma)
                           : kMaxDefaultGamma;
  cfg.certified = true;
  return cfg;
}

SolverConfig SolverConfig::with_gamma(int horizon, double gamma, double epsilon) {
  SolverConfig cfg;
  cfg.horizon = horizon;
  cfg.epsilon = epsilon;
  cfg.h = truncation_bound(horizon, epsilon);
  cfg.gamma = gamma;
  cfg.certified = horizon >= 3 ? gamma <= default_parameters(horizon, epsilon).gamma
                               : gamma <= kMaxDefaultGamma;
  return cfg;
}

void SolverConfig::validate() const {
  if (horizon < 1) throw DomainError("horizon T must be >= 1, got " + std::to_string(horizon));
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw DomainError("epsilon must lie in (0, 1), got " + fmt(epsilon));
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw DomainError("grid width gamma must be positive, got " + fmt(gamma));
  }
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw DomainError("truncation bound h must be positive, got " + fmt(h));
  }
  if (retain_row && (*retain_row < 1 || *retain_row > horizon)) {
    throw DomainError("retained row " + std::to_string(*retain_row) + " outside [1, T]");
  }
}

double psi_star(const PsiRow& row, double theta_t, double c) {
  const double a = std::abs(c);
  const double inv_t = 1.0 / row.t;
  if (a >= theta_t) return a * a * inv_t;
  const double pos = a / row.gamma;
  const auto i = static_cast<std::size_t>(pos);
  const double left = row.values[i];
  double right_c = static_cast<double>(i + 1) * row.gamma;
  double right;
  if (i + 2 < row.values.size() && right_c < theta_t) {
    right = row.values[i + 1];
  } else {
    // Last continuation cell: the right node is the threshold itself.
    right_c = theta_t;
    right = theta_t * theta_t * inv_t;
  }
  const double left_c = static_cast<double>(i) * row.gamma;
  const double w = (a - left_c) / (right_c - left_c);
  return left + w * (right - left);
}

namespace detail {

NormalRectangleRule::NormalRectangleRule(double gamma, double h) {
  const double kmax = std::floor(h / gamma);
  if (!(kmax >= 0.0) || 2.0 * kmax + 1.0 > static_cast<double>(kMaxNodes)) {
    throw CapacityError("quadrature needs " + fmt(2.0 * kmax + 1.0) + " nodes (gamma=" +
                        fmt(gamma) + ", h=" + fmt(h) + "), limit " + std::to_string(kMaxNodes));
  }
  const auto k = static_cast<long>(kmax);
  nodes_.reserve(static_cast<std::size_t>(2 * k + 1));
  weights_.reserve(static_cast<std::size_t>(2 * k + 1));
  const double scale = gamma * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
  for (long i = -k; i <= k; ++i) {
    const double x = static_cast<double>(i) * gamma;
    nodes_.push_back(x);
    weights_.push_back(scale * std::exp(-0.5 * x * x));
  }
}

double wait_value(const NormalRectangleRule& rule, int t, double c, const PsiRow& prev,
                  double prev_theta) {
  const double shrink = static_cast<double>(t - 1) / t;
  const double spread = std::sqrt(shrink);
  const double center = shrink * c;
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    sum += weights[k] * psi_star(prev, prev_theta, center - spread * nodes[k]);
  }
  return sum;
}

}  // namespace detail

double psi_wait(int t, double c, const PsiRow& prev, double prev_theta, const SolverConfig& cfg) {
  if (t < 2) throw DomainError("psi_wait requires t >= 2, got " + std::to_string(t));
  cfg.validate();
  const detail::NormalRectangleRule rule(cfg.gamma, cfg.h);
  return detail::wait_value(rule, t, c, prev, prev_theta);
}

double PolicyTable::theta_at(int t) const {
  if (t < 1 || t > horizon()) throw DomainError("t=" + std::to_string(t) + " outside table");
  return theta[static_cast<std::size_t>(t - 1)];
}

double PolicyTable::psi0_at(int t) const {
  if (t < 1 || t > horizon()) throw DomainError("t=" + std::to_string(t) + " outside table");
  return psi0[static_cast<std::size_t>(t - 1)];
}

double PolicyTable::capital_psi_at(int t) const {
  if (t < 1 || t > horizon()) throw DomainError("t=" + std::to_string(t) + " outside table");
  return capital_psi[static_cast<std::size_t>(t - 1)];
}

double PolicyTable::error_bound_at(int t) const {
  if (t < 1 || t > horizon()) throw DomainError("t=" + std::to_string(t) + " outside table");
  return error_bound[static_cast<std::size_t>(t - 1)];
}

double PolicyTable::accumulated_error_bound() const {
  return error_bound.empty() ? 0.0 : error_bound.back();
}

const PsiRow& PolicyTable::row(int t) const {
  auto it = rows.find(t);
  if (it == rows.end()) {
    throw StateError("psi row for t=" + std::to_string(t) +
                     " was not retained (solve with store_full_grid)");
  }
  return it->second;
}

double PolicyTable::psi(int t, double c) const {
  const double th = theta_at(t);
  if (std::abs(c) >= th) return c * c / t;
  return psi_star(row(t), th, c);
}

namespace {

double integrate_row(const detail::NormalRectangleRule& rule, const PsiRow& row, double theta_t) {
  const double root_t = std::sqrt(static_cast<double>(row.t));
  const auto nodes = rule.nodes();
  const auto weights = rule.weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    sum += weights[k] * psi_star(row, theta_t, nodes[k] * root_t);
  }
  return sum;
}

// Bisects between the last wait-dominant grid point and the first
// stop-dominant one until the bracket is at most gamma/16.
double refine_threshold(const detail::NormalRectangleRule& rule, int t, double lo, double hi,
                        const PsiRow& prev, double prev_theta, double gamma) {
  const double target = gamma / 16.0;
  while (hi - lo > target) {
    const double mid = 0.5 * (lo + hi);
    const double stop = mid * mid / t;
    if (stop >= detail::wait_value(rule, t, mid, prev, prev_theta)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace

PolicyTable solve(const SolverConfig& cfg) {
  cfg.validate();
  const int T = cfg.horizon;
  const double gamma = cfg.gamma;
  const detail::NormalRectangleRule rule(gamma, cfg.h);

  PolicyTable table;
  table.config = cfg;
  table.theta.reserve(static_cast<std::size_t>(T));
  table.psi0.reserve(static_cast<std::size_t>(T));
  table.capital_psi.reserve(static_cast<std::size_t>(T));
  table.error_bound.reserve(static_cast<std::size_t>(T));

  std::size_t retained = 0;
  auto keep = [&](const PsiRow& row) {
    if (!(cfg.store_full_grid || (cfg.retain_row && *cfg.retain_row == row.t))) return;
    retained += row.values.size();
    if (retained > kMaxRetained) {
      throw CapacityError("retained grid reached " + std::to_string(retained) +
                          " values at t=" + std::to_string(row.t) + " (T=" + std::to_string(T) +
                          ", gamma=" + fmt(gamma) + "), limit " + std::to_string(kMaxRetained));
    }
    table.rows.emplace(row.t, row);
  };
  auto record = [&](const PsiRow& row, double theta_t) {
    table.theta.push_back(theta_t);
    table.psi0.push_back(row.values.front());
    table.capital_psi.push_back(integrate_row(rule, row, theta_t));
    table.error_bound.push_back(cfg.epsilon * row.t / T);
    keep(row);
  };

  // psi_1(c) = c^2, theta(1) = 0: every read goes through the stop branch.
  PsiRow prev{1, gamma, {0.0}};
  double prev_theta = 0.0;
  record(prev, prev_theta);

  for (int t = 2; t <= T; ++t) {
    PsiRow row{t, gamma, {}};
    const double wait0 = detail::wait_value(rule, t, 0.0, prev, prev_theta);
    const double envelope = t * std::sqrt(std::max(wait0, 0.0));
    const double jmax_d = std::ceil(envelope / gamma) + static_cast<double>(kEnvelopeMargin);
    if (jmax_d + 1.0 > static_cast<double>(kMaxRowPoints)) {
      throw CapacityError("row t=" + std::to_string(t) + " may need " + fmt(jmax_d + 1.0) +
                          " grid points (gamma=" + fmt(gamma) + "), limit " +
                          std::to_string(kMaxRowPoints));
    }
    const auto jmax = static_cast<std::size_t>(jmax_d);

    double theta_t = 0.0;
    bool stopped = false;
    for (std::size_t j = 0; j <= jmax; ++j) {
      const double c = static_cast<double>(j) * gamma;
      const double stop = c * c / t;
      const double wait = j == 0 ? wait0 : detail::wait_value(rule, t, c, prev, prev_theta);
      row.values.push_back(std::max(wait, stop));
      if (stop >= wait) {
        theta_t = c;
        stopped = true;
        break;
      }
    }
    if (!stopped) {
      // Numerical noise kept the wait value above the envelope; force a stop.
      ++table.envelope_clamps;
      theta_t = static_cast<double>(jmax) * gamma;
      row.values.back() = theta_t * theta_t / t;
    } else if (cfg.refine_theta && row.values.size() >= 2) {
      theta_t = refine_threshold(rule, t, theta_t - gamma, theta_t, prev, prev_theta, gamma);
    }

    record(row, theta_t);
    prev = std::move(row);
    prev_theta = theta_t;
  }
  return table;
}

double capital_psi(const PolicyTable& table, int t) {
  if (t < 1 || t > table.horizon()) {
    throw DomainError("capital_psi: t=" + std::to_string(t) + " outside [1, " +
                      std::to_string(table.horizon()) + "]");
  }
  if (!table.has_row(t)) return table.capital_psi_at(t);
  const detail::NormalRectangleRule rule(table.config.gamma, table.config.h);
  return integrate_row(rule, table.row(t), table.theta_at(t));
}

SecondDerivativeReport second_derivative_diagnostic(const PolicyTable& table, int t,
                                                    std::optional<double> tolerance) {
  if (t < 2 || t > table.horizon()) {
    throw DomainError("second_derivative_diagnostic requires 2 <= t <= T, got " +
                      std::to_string(t));
  }
  const PsiRow& row = table.row(t);
  const double gamma = row.gamma;
  const double th = table.theta_at(t);
  const double th_prev = table.theta_at(t - 1);

  SecondDerivativeReport rep;
  rep.t = t;
  rep.tolerance = tolerance.value_or(10.0 * gamma);
  rep.lower_bound = -th * th / t - rep.tolerance;
  rep.upper_bound = (3.0 + th_prev * th_prev) / t + rep.tolerance;
  rep.min_second_derivative = std::numeric_limits<double>::infinity();
  rep.max_second_derivative = -std::numeric_limits<double>::infinity();

  auto second = [&](double c) {
    return (psi_star(row, th, c + gamma) - 2.0 * psi_star(row, th, c) +
            psi_star(row, th, c - gamma)) /
           (gamma * gamma);
  };

  double max_abs = 0.0;
  // The stencil must stay inside |c| < theta: psi has a kink at theta.
  for (std::size_t i = 0; static_cast<double>(i + 1) * gamma < th; ++i) {
    const double d2 = second(static_cast<double>(i) * gamma);
    ++rep.interior_points;
    if (d2 >= rep.lower_bound && d2 <= rep.upper_bound) ++rep.within_bounds;
    rep.min_second_derivative = std::min(rep.min_second_derivative, d2);
    rep.max_second_derivative = std::max(rep.max_second_derivative, d2);
    max_abs = std::max(max_abs, std::abs(d2));
  }
  rep.fraction_within = rep.interior_points == 0
                            ? 1.0
                            : static_cast<double>(rep.within_bounds) /
                                  static_cast<double>(rep.interior_points);
  rep.loglog_scaled_max = t >= 3 ? max_abs * t / std::log(std::log(static_cast<double>(t)))
                                 : std::numeric_limits<double>::quiet_NaN();

  const double stop_curvature = 2.0 / t;
  for (int k = 0; k < 64; ++k) {
    const double c = th + 2.0 * gamma + k * gamma;
    rep.stop_region_max_deviation =
        std::max(rep.stop_region_max_deviation, std::abs(second(c) - stop_curvature));
  }
  return rep;
}

}  // namespace lmsrstop
