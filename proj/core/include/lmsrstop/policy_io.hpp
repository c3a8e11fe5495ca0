#pragma once

// Policy-table persistence and profile export.
//
// CSV numbers are printed with 12 significant digits, '.' decimal point and
// no locale dependence. JSON carries full double precision.

#include <iosfwd>
#include <string>

#include "lmsrstop/solver.hpp"

namespace lmsrstop {

/// Shortest-form rendering with 12 significant digits ("1.41421356237").
std::string format_real(double v);

/// Header `t,theta,theta_sq_over_t,psi0,capital_psi`, one row per t.
void write_policy_csv(const PolicyTable& table, std::ostream& out);

/// {T, config{...}, theta, psi0, capital_psi, error_bound, rows?}
void write_policy_json(const PolicyTable& table, std::ostream& out, bool include_rows);

/// Inverse of write_policy_json. Throws DomainError on malformed input.
PolicyTable read_policy_json(std::istream& in);

/// Reads theta, psi0 and capital_psi back from a policy CSV. The config
/// carries only the horizon; error bounds are left at zero.
PolicyTable read_policy_csv(std::istream& in);

/// `c,psi` on c = i*gamma from 0 past theta(t). Needs row t when theta(t) > 0.
void write_profile_csv(const PolicyTable& table, int t, std::ostream& out);

/// `t,theta_sq_over_t,psi0,two_loglog_t`; the last column is empty for t < 3.
void write_threshold_curve_csv(const PolicyTable& table, std::ostream& out);

}  // namespace lmsrstop
