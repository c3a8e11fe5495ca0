#pragma once

// Closed-form upper and lower bounds on Psi(T), the optimal expected
// canonical reward at horizon T. All logarithms are natural.
//
// Horizons enter only through log T, so every function has an overload on
// Horizon for values of T far beyond double range (e.g. T = e^100).

#include <optional>
#include <vector>

namespace lmsrstop {

struct Horizon {
  double log_t = 0.0;

  static Horizon from_t(double t);
  static Horizon from_log(double log_t) { return {log_t}; }
  double loglog() const;
};

/// 12 / [log(1 + (sqrt(1+eps) - sqrt(1+eps/2))^2/(1+eps/2)) * (log T)^(eps/2)].
/// Requires T > 10, eps > 0.
double gamma1(Horizon horizon, double epsilon);
double gamma1(double horizon, double epsilon);

/// Simplified forms 12/log(1+eps^2/4) (log T)^(-eps/2) and
/// 96/eps^2 (log T)^(-eps/2). The second dominates the first on (0, 1], but
/// neither bounds gamma1: (sqrt(1+eps) - sqrt(1+eps/2))^2 < eps^2/16, so
/// gamma1 exceeds the log form for every eps > 0.
double gamma1_log_form(Horizon horizon, double epsilon);
double gamma1_power_form(Horizon horizon, double epsilon);

/// exp(-(log T)^(eps/4 - eps^2/64) / [((1-eps/8) sqrt(2 log log T) + 2) log(20/eps^2)])
///   + (log T)^(-eps/8).  Requires T > 16, 0 < eps < 1/2.
double gamma2(Horizon horizon, double epsilon);
double gamma2(double horizon, double epsilon);

/// (1+eps) 2 log log T + gamma1(T, eps).
double psi_upper_bound(Horizon horizon, double epsilon);
double psi_upper_bound(double horizon, double epsilon);

/// (1 - gamma2) (1-eps) 2 log log T. May be <= 0 (vacuous).
double psi_lower_bound(Horizon horizon, double epsilon);
double psi_lower_bound(double horizon, double epsilon);

struct Envelope {
  double lower = 0.0;
  double upper = 0.0;
};

/// 2 log log T - 32 log log log T - 8 and 2 log log T + 8 log log log T + 6.
/// Requires log log T >= 4.
Envelope corollary_envelope(Horizon horizon);
Envelope corollary_envelope(double horizon);

enum class ThetaEnvelopeBranch {
  kClosedForm,   ///< log log T >= 35: t sqrt(3 log log T)
  kSolverPsi0,   ///< t sqrt(psi_t(0)) from a solved table
  kUpperProxy,   ///< t sqrt(min_eps psi_upper_bound(T, eps)), T > 10
  kUnavailable,  ///< no closed form and no solver input; value is +inf
};

struct ThetaEnvelope {
  double value = 0.0;
  ThetaEnvelopeBranch branch = ThetaEnvelopeBranch::kUnavailable;
};

/// Upper envelope on theta(t) for t <= T.
ThetaEnvelope theta_envelope(int t, Horizon horizon, std::optional<double> psi0 = std::nullopt);
ThetaEnvelope theta_envelope(int t, double horizon, std::optional<double> psi0 = std::nullopt);

/// {0.05, 0.10, ..., 3.00}
std::vector<double> upper_epsilon_grid();
/// {0.01, 0.02, ..., 0.49}
std::vector<double> lower_epsilon_grid();

struct OptimizedBound {
  double value = 0.0;
  double epsilon = 0.0;
};

/// Tightest upper bound over upper_epsilon_grid(). Requires T > 10.
OptimizedBound min_upper_bound(Horizon horizon);
/// Tightest lower bound over lower_epsilon_grid(). Requires T > 16.
OptimizedBound max_lower_bound(Horizon horizon);

struct BoundReport {
  double horizon = 0.0;
  double epsilon = 0.0;
  std::optional<double> upper;
  std::optional<double> lower;
  std::optional<double> gamma1;
  std::optional<double> gamma2;
  std::optional<double> corollary_upper;
  std::optional<double> corollary_lower;
  bool admissible_upper = false;      ///< T > 10, eps > 0
  bool admissible_lower = false;      ///< T > 16, 0 < eps < 1/2
  bool admissible_corollary = false;  ///< log log T >= 4
};

/// Evaluates every bound that is defined at (T, eps); the rest stay empty.
BoundReport bound_report(double horizon, double epsilon);

}  // namespace lmsrstop
