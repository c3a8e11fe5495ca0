#pragma once

// Cross-module consistency checks over a solved policy table: structural
// grid properties, Monte Carlo agreement, bound sandwiches and diagnostics.

#include <cstdint>
#include <string>
#include <vector>

#include "lmsrstop/solver.hpp"

namespace lmsrstop {

struct GridInvariantReport {
  std::size_t rows_checked = 0;
  std::size_t points_checked = 0;
  std::size_t below_stop_value = 0;      ///< psi_t(c) < c^2/t
  std::size_t excess_increases = 0;      ///< psi_t(c) - c^2/t increased in c
  std::size_t slope_violations = 0;      ///< discrete slope above 2(|c|+gamma)/t + slack
  double worst_excess_increase = 0.0;
  double worst_slope_margin = 0.0;       ///< max(slope - allowed), <= 0 when clean

  std::size_t violations() const {
    return below_stop_value + excess_increases + slope_violations;
  }
};

/// Checks every retained row. `slope_slack` is in units of gamma/t and
/// `tolerance` is the absolute slack for the value comparisons.
GridInvariantReport check_grid_invariants(const PolicyTable& table, double slope_slack = 10.0,
                                          double tolerance = 1e-9);

struct ThresholdReport {
  std::size_t envelope_violations = 0;  ///< theta(t) > t sqrt(psi_t(0))
  std::size_t psi0_violations = 0;      ///< psi_t(0) > theta(t)^2/t, t >= 2
  std::size_t nonpositive = 0;          ///< theta(t) <= 0, t >= 2
  bool theta1_zero = false;

  bool ok() const {
    return theta1_zero && envelope_violations == 0 && psi0_violations == 0 && nonpositive == 0;
  }
};

/// The envelope comparison allows theta its bracket width (gamma/16 refined, gamma otherwise).
ThresholdReport check_thresholds(const PolicyTable& table, double tolerance = 1e-9);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::int64_t n_paths = 100'000;
  std::int64_t tail_paths = 100'000;
  std::uint64_t seed = 42;
};

/// Runs every check that applies to the table (grid checks need retained
/// rows; Monte Carlo checks use options.n_paths paths).
std::vector<CheckResult> run_verification(const PolicyTable& table, const VerifyOptions& options);

}  // namespace lmsrstop
