#include "lmsrstop/policy_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "lmsrstop/errors.hpp"

namespace lmsrstop {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxProfilePoints = 200'000;

double parse_real(const std::string& field) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) throw DomainError("malformed number '" + field + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

json config_to_json(const SolverConfig& cfg) {
  json j = {{"T", cfg.horizon},
            {"epsilon", cfg.epsilon},
            {"gamma", cfg.gamma},
            {"h", cfg.h},
            {"refine_theta", cfg.refine_theta},
            {"store_full_grid", cfg.store_full_grid},
            {"certified", cfg.certified}};
  j["retain_row"] = cfg.retain_row ? json(*cfg.retain_row) : json(nullptr);
  return j;
}

SolverConfig config_from_json(const json& j) {
  SolverConfig cfg;
  cfg.horizon = j.at("T").get<int>();
  cfg.epsilon = j.at("epsilon").get<double>();
  cfg.gamma = j.at("gamma").get<double>();
  cfg.h = j.at("h").get<double>();
  cfg.refine_theta = j.at("refine_theta").get<bool>();
  cfg.store_full_grid = j.at("store_full_grid").get<bool>();
  cfg.certified = j.at("certified").get<bool>();
  if (j.contains("retain_row") && !j["retain_row"].is_null()) {
    cfg.retain_row = j["retain_row"].get<int>();
  }
  return cfg;
}

}  // namespace

std::string format_real(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v,
                                 std::chars_format::general, 12);
  if (ec != std::errc{}) throw DomainError("cannot format number");
  return std::string(buf.data(), ptr);
}

void write_policy_csv(const PolicyTable& table, std::ostream& out) {
  out << "t,theta,theta_sq_over_t,psi0,capital_psi\n";
  for (int t = 1; t <= table.horizon(); ++t) {
    const double th = table.theta_at(t);
    out << t << ',' << format_real(th) << ',' << format_real(th * th / t) << ','
        << format_real(table.psi0_at(t)) << ',' << format_real(table.capital_psi_at(t)) << '\n';
  }
}

void write_policy_json(const PolicyTable& table, std::ostream& out, bool include_rows) {
  json j;
  j["T"] = table.horizon();
  j["config"] = config_to_json(table.config);
  j["theta"] = table.theta;
  j["psi0"] = table.psi0;
  j["capital_psi"] = table.capital_psi;
  j["error_bound"] = table.error_bound;
  j["envelope_clamps"] = table.envelope_clamps;
  if (include_rows) {
    json rows = json::array();
    for (const auto& [t, row] : table.rows) {
      rows.push_back({{"t", t}, {"gamma", row.gamma}, {"values", row.values}});
    }
    j["rows"] = std::move(rows);
  }
  out << j.dump(1) << '\n';
}

PolicyTable read_policy_json(std::istream& in) {
  try {
    const json j = json::parse(in);
    PolicyTable table;
    table.config = config_from_json(j.at("config"));
    table.theta = j.at("theta").get<std::vector<double>>();
    table.psi0 = j.at("psi0").get<std::vector<double>>();
    table.capital_psi = j.at("capital_psi").get<std::vector<double>>();
    table.error_bound = j.at("error_bound").get<std::vector<double>>();
    table.envelope_clamps = j.value("envelope_clamps", 0);
    const auto T = static_cast<std::size_t>(j.at("T").get<int>());
    if (table.theta.size() != T || table.psi0.size() != T || table.capital_psi.size() != T ||
        table.error_bound.size() != T) {
      throw DomainError("policy json arrays do not match T");
    }
    if (j.contains("rows")) {
      for (const auto& r : j["rows"]) {
        PsiRow row{r.at("t").get<int>(), r.at("gamma").get<double>(),
                   r.at("values").get<std::vector<double>>()};
        table.rows.emplace(row.t, std::move(row));
      }
    }
    return table;
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed policy json: ") + e.what());
  }
}

PolicyTable read_policy_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "t,theta,theta_sq_over_t,psi0,capital_psi") {
    throw DomainError("policy csv header mismatch");
  }
  PolicyTable table;
  int expected_t = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 5) throw DomainError("policy csv row has " + std::to_string(f.size()) + " fields");
    if (static_cast<int>(parse_real(f[0])) != expected_t) {
      throw DomainError("policy csv rows out of order at t=" + f[0]);
    }
    table.theta.push_back(parse_real(f[1]));
    table.psi0.push_back(parse_real(f[3]));
    table.capital_psi.push_back(parse_real(f[4]));
    table.error_bound.push_back(0.0);
    ++expected_t;
  }
  table.config.horizon = table.horizon();
  return table;
}

void write_profile_csv(const PolicyTable& table, int t, std::ostream& out) {
  const double th = table.theta_at(t);
  const double gamma = table.config.gamma;
  const double c_max = std::max(1.5 * th, th + std::sqrt(static_cast<double>(t)));
  const double points = std::ceil(c_max / gamma);
  const auto stride = static_cast<std::size_t>(
      std::max(1.0, std::ceil(points / static_cast<double>(kMaxProfilePoints))));
  out << "c,psi\n";
  for (std::size_t i = 0; static_cast<double>(i) * gamma <= c_max; i += stride) {
    const double c = static_cast<double>(i) * gamma;
    out << format_real(c) << ',' << format_real(table.psi(t, c)) << '\n';
  }
}

void write_threshold_curve_csv(const PolicyTable& table, std::ostream& out) {
  out << "t,theta_sq_over_t,psi0,two_loglog_t\n";
  for (int t = 1; t <= table.horizon(); ++t) {
    const double th = table.theta_at(t);
    out << t << ',' << format_real(th * th / t) << ',' << format_real(table.psi0_at(t)) << ',';
    if (t >= 3) out << format_real(2.0 * std::log(std::log(static_cast<double>(t))));
    out << '\n';
  }
}

}  // namespace lmsrstop
