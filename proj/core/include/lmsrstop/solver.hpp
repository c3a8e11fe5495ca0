#pragma once

// Backward dynamic programming for the canonical stopping problem: an observer
// sees a standard Gaussian walk S_T, S_{T-1}, ..., S_1 and may stop once, at
// t, collecting S_t^2/t.
//
//   psi_t(c)      optimal expected reward given S_t = c
//   theta(t)      smallest c >= 0 with psi_t(c) = c^2/t (stop iff |S_t| >= theta)
//   Psi(t)        E[psi_t(S_t)], S_t ~ N(0, t)
//
// Rows are computed on the grid c = i*gamma, i >= 0 (psi_t is even). The
// one-step wait value is a rectangle-rule sum over standard-normal nodes
// x_k = k*gamma in [-h, h]; the previous row is read between grid points by
// linear interpolation.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace lmsrstop {

struct GridParameters {
  double gamma = 0.0;  ///< rectangle / grid width
  double h = 0.0;      ///< truncation bound, integration over [-h, h]
};

/// Widths that certify an eps*t/T accumulated error:
/// gamma = sqrt(eps)/(T log T log log T), h = sqrt(6 log(2T/eps)).
/// Requires T >= 3 and 0 < eps < 1.
GridParameters default_parameters(int horizon, double epsilon);

/// sqrt(6 log(2T/eps)); defined for every T >= 1.
double truncation_bound(int horizon, double epsilon);

struct SolverConfig {
  int horizon = 1;
  double epsilon = 0.1;
  double gamma = 0.01;
  double h = 0.0;
  bool refine_theta = true;
  bool store_full_grid = false;
  /// Keep this one row even when store_full_grid is off (profile export).
  std::optional<int> retain_row;
  /// True when gamma and h are no coarser than default_parameters(); the
  /// eps*t/T error bound then holds as a certificate rather than a heuristic.
  bool certified = false;

  /// Largest gamma the defaults will use. Smaller widths only tighten the
  /// certified error, and the closed-form gamma is impractically coarse for
  /// T < 12.
  static constexpr double kMaxDefaultGamma = 0.01;

  /// Certified widths (gamma capped at kMaxDefaultGamma; T <= 2 uses the cap).
  static SolverConfig certified_defaults(int horizon, double epsilon = 0.1);
  /// User-chosen gamma; h still follows the truncation bound.
  static SolverConfig with_gamma(int horizon, double gamma, double epsilon = 0.1);

  /// Throws DomainError on T < 1, gamma <= 0, h <= 0 or eps outside (0, 1).
  void validate() const;
};

/// psi_t on the non-negative grid. values[i] = psi_t(i*gamma) for
/// i = 0..J where J*gamma is the first grid point at which stopping dominates;
/// the last entry therefore equals (J*gamma)^2/t.
struct PsiRow {
  int t = 1;
  double gamma = 0.0;
  std::vector<double> values;
};

/// psi_t at an arbitrary c: (c^2)/t for |c| >= theta_t, otherwise linear
/// interpolation of the row (the node at theta_t carries theta_t^2/t). Even in c.
double psi_star(const PsiRow& row, double theta_t, double c);

/// Rectangle-rule value of waiting one period at S_t = c, reading psi_{t-1}
/// from `prev` through psi_star. Requires t >= 2.
double psi_wait(int t, double c, const PsiRow& prev, double prev_theta, const SolverConfig& cfg);

/// Solver output. Arrays are indexed by t-1.
struct PolicyTable {
  SolverConfig config;
  std::vector<double> theta;
  std::vector<double> psi0;
  std::vector<double> capital_psi;
  std::vector<double> error_bound;  ///< eps*t/T
  std::map<int, PsiRow> rows;
  /// Periods whose sweep hit the threshold envelope without a stop decision.
  int envelope_clamps = 0;

  int horizon() const { return static_cast<int>(theta.size()); }
  double theta_at(int t) const;
  double psi0_at(int t) const;
  double capital_psi_at(int t) const;
  double error_bound_at(int t) const;
  double accumulated_error_bound() const;
  bool has_row(int t) const { return rows.contains(t); }
  const PsiRow& row(int t) const;  ///< throws StateError if not retained

  /// psi_t(c); needs the row only when |c| < theta(t).
  double psi(int t, double c) const;
};

/// Runs the backward recursion for t = 1..T.
/// Throws CapacityError if a row, the quadrature node set or the retained
/// grid would exceed the engine's allocation limits.
PolicyTable solve(const SolverConfig& cfg);

/// E[psi_t(x sqrt(t))], x ~ N(0,1), by the same rectangle rule on [-h, h].
double capital_psi(const PolicyTable& table, int t);

struct SecondDerivativeReport {
  int t = 0;
  double lower_bound = 0.0;  ///< -theta(t)^2/t - tol
  double upper_bound = 0.0;  ///< (3 + theta(t-1)^2)/t + tol
  double tolerance = 0.0;
  std::size_t interior_points = 0;
  std::size_t within_bounds = 0;
  double fraction_within = 0.0;
  double min_second_derivative = 0.0;
  double max_second_derivative = 0.0;
  /// max |psi''| * t / log log t; NaN for t < 3. Reported only.
  double loglog_scaled_max = 0.0;
  /// max |psi'' - 2/t| over stop-region points c >= theta(t) + 2 gamma.
  double stop_region_max_deviation = 0.0;
};

/// Central-difference psi_t'' at grid points c with c + gamma < theta(t), versus the
/// analytic bounds. Requires t >= 2 and row t retained.
SecondDerivativeReport second_derivative_diagnostic(const PolicyTable& table, int t,
                                                    std::optional<double> tolerance = std::nullopt);

namespace detail {

/// Precomputed rectangle nodes x_k = k*gamma on [-h, h] with weights
/// gamma * phi(x_k).
class NormalRectangleRule {
 public:
  NormalRectangleRule(double gamma, double h);

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

double wait_value(const NormalRectangleRule& rule, int t, double c, const PsiRow& prev,
                  double prev_theta);

}  // namespace detail

}  // namespace lmsrstop
