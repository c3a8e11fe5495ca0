#include "lmsrstop/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lmsrstop/errors.hpp"

namespace lmsrstop {

namespace {

const double kLog10 = std::log(10.0);
const double kLog16 = std::log(16.0);

std::string num(double v) { return std::to_string(v); }

void require_upper_domain(Horizon h, double eps) {
  if (!(h.log_t > kLog10)) throw DomainError("upper bound requires T > 10");
  if (!(eps > 0.0)) throw DomainError("upper bound requires eps > 0, got " + num(eps));
}

void require_lower_domain(Horizon h, double eps) {
  if (!(h.log_t > kLog16)) throw DomainError("lower bound requires T > 16");
  if (!(eps > 0.0 && eps < 0.5)) {
    throw DomainError("lower bound requires 0 < eps < 1/2, got " + num(eps));
  }
}

std::vector<double> step_grid(int first, int last, double step) {
  std::vector<double> out;
  for (int k = first; k <= last; ++k) out.push_back(k * step);
  return out;
}

}  // namespace

Horizon Horizon::from_t(double t) {
  if (!(t > 0.0)) throw DomainError("horizon must be positive, got " + num(t));
  return {std::log(t)};
}

double Horizon::loglog() const {
  if (!(log_t > 0.0)) throw DomainError("log log T undefined for T <= 1");
  return std::log(log_t);
}

double gamma1(Horizon h, double eps) {
  require_upper_domain(h, eps);
  const double gap = std::sqrt(1.0 + eps) - std::sqrt(1.0 + eps / 2.0);
  const double log_a = std::log1p(gap * gap / (1.0 + eps / 2.0));
  return 12.0 / (log_a * std::pow(h.log_t, eps / 2.0));
}

double gamma1(double horizon, double eps) { return gamma1(Horizon::from_t(horizon), eps); }

double gamma1_log_form(Horizon h, double eps) {
  require_upper_domain(h, eps);
  return 12.0 / (std::log1p(eps * eps / 4.0) * std::pow(h.log_t, eps / 2.0));
}

double gamma1_power_form(Horizon h, double eps) {
  require_upper_domain(h, eps);
  return 96.0 / (eps * eps) * std::pow(h.log_t, -eps / 2.0);
}

double gamma2(Horizon h, double eps) {
  require_lower_domain(h, eps);
  const double ll = h.loglog();
  const double numer = std::pow(h.log_t, eps / 4.0 - eps * eps / 64.0);
  const double denom =
      ((1.0 - eps / 8.0) * std::sqrt(2.0 * ll) + 2.0) * std::log(20.0 / (eps * eps));
  return std::exp(-numer / denom) + std::pow(h.log_t, -eps / 8.0);
}

double gamma2(double horizon, double eps) { return gamma2(Horizon::from_t(horizon), eps); }

double psi_upper_bound(Horizon h, double eps) {
  return (1.0 + eps) * 2.0 * h.loglog() + gamma1(h, eps);
}

double psi_upper_bound(double horizon, double eps) {
  return psi_upper_bound(Horizon::from_t(horizon), eps);
}

double psi_lower_bound(Horizon h, double eps) {
  const double g2 = gamma2(h, eps);
  return (1.0 - g2) * (1.0 - eps) * 2.0 * h.loglog();
}

double psi_lower_bound(double horizon, double eps) {
  return psi_lower_bound(Horizon::from_t(horizon), eps);
}

Envelope corollary_envelope(Horizon h) {
  if (!(h.log_t > 1.0) || !(h.loglog() >= 4.0)) {
    throw DomainError("corollary envelope requires log log T >= 4 (T >= e^(e^4) ~ 5.1e23)");
  }
  const double ll = h.loglog();
  const double lll = std::log(ll);
  return {2.0 * ll - 32.0 * lll - 8.0, 2.0 * ll + 8.0 * lll + 6.0};
}

Envelope corollary_envelope(double horizon) {
  return corollary_envelope(Horizon::from_t(horizon));
}

ThetaEnvelope theta_envelope(int t, Horizon h, std::optional<double> psi0) {
  if (t < 1) throw DomainError("theta_envelope requires t >= 1");
  if (std::log(static_cast<double>(t)) > h.log_t + 1e-12) {
    throw DomainError("theta_envelope requires t <= T");
  }
  if (h.log_t > 1.0 && h.loglog() >= 35.0) {
    return {t * std::sqrt(3.0 * h.loglog()), ThetaEnvelopeBranch::kClosedForm};
  }
  if (psi0) {
    return {t * std::sqrt(std::max(*psi0, 0.0)), ThetaEnvelopeBranch::kSolverPsi0};
  }
  if (h.log_t > kLog10) {
    return {t * std::sqrt(min_upper_bound(h).value), ThetaEnvelopeBranch::kUpperProxy};
  }
  return {std::numeric_limits<double>::infinity(), ThetaEnvelopeBranch::kUnavailable};
}

ThetaEnvelope theta_envelope(int t, double horizon, std::optional<double> psi0) {
  return theta_envelope(t, Horizon::from_t(horizon), psi0);
}

std::vector<double> upper_epsilon_grid() { return step_grid(1, 60, 0.05); }
std::vector<double> lower_epsilon_grid() { return step_grid(1, 49, 0.01); }

OptimizedBound min_upper_bound(Horizon h) {
  OptimizedBound best{std::numeric_limits<double>::infinity(), 0.0};
  for (double eps : upper_epsilon_grid()) {
    const double v = psi_upper_bound(h, eps);
    if (v < best.value) best = {v, eps};
  }
  return best;
}

OptimizedBound max_lower_bound(Horizon h) {
  OptimizedBound best{-std::numeric_limits<double>::infinity(), 0.0};
  for (double eps : lower_epsilon_grid()) {
    const double v = psi_lower_bound(h, eps);
    if (v > best.value) best = {v, eps};
  }
  return best;
}

BoundReport bound_report(double horizon, double eps) {
  const Horizon h = Horizon::from_t(horizon);
  BoundReport rep;
  rep.horizon = horizon;
  rep.epsilon = eps;
  rep.admissible_upper = h.log_t > kLog10 && eps > 0.0;
  rep.admissible_lower = h.log_t > kLog16 && eps > 0.0 && eps < 0.5;
  rep.admissible_corollary = h.log_t > 1.0 && h.loglog() >= 4.0;
  if (rep.admissible_upper) {
    rep.gamma1 = gamma1(h, eps);
    rep.upper = psi_upper_bound(h, eps);
  }
  if (rep.admissible_lower) {
    rep.gamma2 = gamma2(h, eps);
    rep.lower = psi_lower_bound(h, eps);
  }
  if (rep.admissible_corollary) {
    const Envelope env = corollary_envelope(h);
    rep.corollary_lower = env.lower;
    rep.corollary_upper = env.upper;
  }
  return rep;
}

}  // namespace lmsrstop
