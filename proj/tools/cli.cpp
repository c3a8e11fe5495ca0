#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lmsrstop/bounds.hpp"
#include "lmsrstop/errors.hpp"
#include "lmsrstop/policy_io.hpp"
#include "lmsrstop/simulator.hpp"
#include "lmsrstop/solver.hpp"
#include "lmsrstop/verify.hpp"

namespace lmsrstop::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr double kVerifyGamma = 0.01;

std::string command_name(Command c) {
  switch (c) {
    case Command::kSolve: return "solve";
    case Command::kProfile: return "profile";
    case Command::kSimulate: return "simulate";
    case Command::kBounds: return "bounds";
    case Command::kVerify: return "verify";
  }
  return "unknown";
}

std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) {
    os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  }
  return os.str();
}

// Artifacts are assembled in memory and only written once the command has
// finished, each through a temporary file renamed into place.
class ArtifactSet {
 public:
  void add(std::string name, std::string content) {
    files_.emplace_back(std::move(name), std::move(content));
  }

  json digests() const {
    json j = json::object();
    for (const auto& [name, content] : files_) j[name] = sha256_hex(content);
    return j;
  }

  void commit(const fs::path& dir) const {
    fs::create_directories(dir);
    for (const auto& [name, content] : files_) {
      const fs::path target = dir / name;
      fs::path tmp = target;
      tmp += ".tmp";
      {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open " + tmp.string());
        f << content;
        if (!f) throw std::runtime_error("failed writing " + tmp.string());
      }
      fs::rename(tmp, target);
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

json config_json(const RunConfig& cfg) {
  json j = {{"command", command_name(cfg.command)},
            {"T", cfg.horizon},
            {"epsilon", cfg.epsilon},
            {"q", cfg.q},
            {"n", cfg.n_paths},
            {"seed", cfg.seed},
            {"refine_theta", cfg.refine_theta},
            {"store_grid", cfg.store_grid},
            {"dump_paths", cfg.dump_paths},
            {"lil_epsilon", cfg.lil_epsilon}};
  j["gamma"] = cfg.gamma ? json(*cfg.gamma) : json(nullptr);
  j["profile_t"] = cfg.profile_t ? json(*cfg.profile_t) : json(nullptr);
  if (!cfg.inject_fault.empty()) j["inject_fault"] = cfg.inject_fault;
  return j;
}

void finish(const RunConfig& cfg, ArtifactSet& artifacts, const json& extra) {
  json manifest;
  manifest["config"] = config_json(cfg);
  manifest["seed"] = cfg.seed;
  manifest["artifacts"] = artifacts.digests();
  if (!extra.is_null()) manifest["run"] = extra;
  artifacts.add("manifest.json", manifest.dump(1) + "\n");
  artifacts.commit(cfg.out_dir);
}

SolverConfig solver_config(const RunConfig& cfg, std::optional<double> fallback_gamma) {
  SolverConfig sc;
  if (cfg.gamma) {
    sc = SolverConfig::with_gamma(cfg.horizon, *cfg.gamma, cfg.epsilon);
  } else if (fallback_gamma) {
    sc = SolverConfig::with_gamma(cfg.horizon, *fallback_gamma, cfg.epsilon);
  } else {
    sc = SolverConfig::certified_defaults(cfg.horizon, cfg.epsilon);
  }
  sc.refine_theta = cfg.refine_theta;
  sc.store_full_grid = cfg.store_grid;
  sc.validate();
  return sc;
}

json solver_json(const PolicyTable& table) {
  return {{"gamma", table.config.gamma},
          {"h", table.config.h},
          {"certified", table.config.certified},
          {"accumulated_error_bound", table.accumulated_error_bound()},
          {"error_kind", table.config.certified ? "certified" : "heuristic"},
          {"envelope_clamps", table.envelope_clamps}};
}

void print_solution(const PolicyTable& table, double seconds, std::ostream& out) {
  const int T = table.horizon();
  out << "T=" << T << " gamma=" << format_real(table.config.gamma)
      << " h=" << format_real(table.config.h) << '\n'
      << "theta(T)=" << format_real(table.theta_at(T)) << '\n'
      << "psi_T(0)=" << format_real(table.psi0_at(T)) << '\n'
      << "Psi(T)=" << format_real(table.capital_psi_at(T)) << '\n'
      << "accumulated_error=" << format_real(table.accumulated_error_bound()) << " ("
      << (table.config.certified ? "certified" : "heuristic") << ")\n"
      << "wall_time_s=" << std::fixed << std::setprecision(3) << seconds << std::defaultfloat
      << '\n';
}

PolicyTable timed_solve(const SolverConfig& sc, double& seconds) {
  const auto start = std::chrono::steady_clock::now();
  PolicyTable table = solve(sc);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return table;
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const SolverConfig sc = solver_config(cfg, std::nullopt);
  double seconds = 0.0;
  const PolicyTable table = timed_solve(sc, seconds);

  std::ostringstream csv;
  write_policy_csv(table, csv);
  std::ostringstream js;
  write_policy_json(table, js, cfg.store_grid);
  ArtifactSet artifacts;
  artifacts.add("policy.json", js.str());
  artifacts.add("policy.csv", csv.str());
  finish(cfg, artifacts, {{"solver", solver_json(table)}});
  print_solution(table, seconds, out);
  return kExitOk;
}

int cmd_profile(const RunConfig& cfg, std::ostream& out) {
  const int at = cfg.profile_t.value_or(cfg.horizon);
  SolverConfig sc = solver_config(cfg, std::nullopt);
  sc.retain_row = at;
  double seconds = 0.0;
  const PolicyTable table = timed_solve(sc, seconds);

  std::ostringstream fig2;
  write_threshold_curve_csv(table, fig2);
  std::ostringstream fig3;
  write_profile_csv(table, at, fig3);
  ArtifactSet artifacts;
  artifacts.add("figure2.csv", fig2.str());
  artifacts.add("figure3.csv", fig3.str());
  finish(cfg, artifacts, {{"solver", solver_json(table)}, {"profile_t", at}});
  print_solution(table, seconds, out);
  out << "profile_t=" << at << " theta=" << format_real(table.theta_at(at)) << '\n';
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const SolverConfig sc = solver_config(cfg, std::nullopt);
  double seconds = 0.0;
  const PolicyTable table = timed_solve(sc, seconds);

  std::vector<StoppingPolicy> policies{OptimalTablePolicy{std::cref(table)}};
  if (cfg.horizon >= 16) policies.emplace_back(FixedLilPolicy{cfg.lil_epsilon});
  policies.emplace_back(ImmediateStopPolicy{});
  policies.emplace_back(FinalStopPolicy{});
  policies.emplace_back(HindsightPolicy{});
  const auto run =
      monte_carlo(policies, cfg.horizon, cfg.n_paths, cfg.seed, {.keep_paths = cfg.dump_paths});
  const auto scenario = expert_scenario(cfg.horizon, cfg.q, cfg.n_paths, cfg.seed, table);

  ArtifactSet artifacts;
  std::ostringstream sim;
  sim << "policy,n,mean_reward,stderr,mean_stop_time\n";
  for (const auto& r : run.results) {
    sim << r.policy << ',' << r.n_paths << ',' << format_real(r.mean_reward) << ','
        << format_real(r.std_error) << ',' << format_real(r.mean_stop_time) << '\n';
  }
  artifacts.add("simulation.csv", sim.str());

  if (cfg.dump_paths) {
    std::ostringstream paths;
    paths << "path_id,policy,stop_t,reward\n";
    for (std::size_t i = 0; i < static_cast<std::size_t>(run.n_paths); ++i) {
      for (std::size_t k = 0; k < run.results.size(); ++k) {
        const auto& o = run.outcomes[k][i];
        paths << i << ',' << run.results[k].policy << ',' << o.stop_t << ','
              << format_real(o.reward) << '\n';
      }
    }
    artifacts.add("paths.csv", paths.str());
  }

  std::ostringstream sc_csv;
  sc_csv << "q,T,n,quality_term,mean_realized,stderr_realized,mean_expected,stderr_expected,"
            "mean_difference,stderr_difference,mean_stop_time\n"
         << format_real(scenario.q) << ',' << scenario.horizon << ',' << scenario.n << ','
         << format_real(scenario.quality_term) << ',' << format_real(scenario.mean_realized)
         << ',' << format_real(scenario.realized_std_error) << ','
         << format_real(scenario.mean_expected) << ',' << format_real(scenario.expected_std_error)
         << ',' << format_real(scenario.mean_difference) << ','
         << format_real(scenario.difference_std_error) << ','
         << format_real(scenario.mean_stop_time) << '\n';
  artifacts.add("scenario.csv", sc_csv.str());
  finish(cfg, artifacts, {{"solver", solver_json(table)}});

  out << "Psi(T)=" << format_real(table.capital_psi_at(cfg.horizon)) << '\n';
  for (const auto& r : run.results) {
    out << std::left << std::setw(16) << r.policy << " mean=" << format_real(r.mean_reward)
        << " se=" << format_real(r.std_error) << " stop_t=" << format_real(r.mean_stop_time)
        << '\n';
  }
  out << "scenario q=" << format_real(cfg.q) << " realized=" << format_real(scenario.mean_realized)
      << " expected=" << format_real(scenario.mean_expected) << '\n';
  return kExitOk;
}

int cmd_bounds(const RunConfig& cfg, std::ostream& out) {
  const double T = cfg.horizon;
  std::vector<double> eps = upper_epsilon_grid();
  for (double e : lower_epsilon_grid()) eps.push_back(e);
  std::sort(eps.begin(), eps.end());
  eps.erase(std::unique(eps.begin(), eps.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            eps.end());

  auto cell = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  std::ostringstream csv;
  csv << "T,eps,upper,lower,gamma1,gamma2,admissible_upper,admissible_lower\n";
  for (double e : eps) {
    const BoundReport r = bound_report(T, e);
    csv << cfg.horizon << ',' << format_real(e) << ',' << cell(r.upper) << ',' << cell(r.lower)
        << ',' << cell(r.gamma1) << ',' << cell(r.gamma2) << ',' << (r.admissible_upper ? 1 : 0)
        << ',' << (r.admissible_lower ? 1 : 0) << '\n';
  }
  ArtifactSet artifacts;
  artifacts.add("bounds.csv", csv.str());

  json extra = json::object();
  const Horizon h = Horizon::from_t(T);
  if (cfg.horizon > 10) {
    const auto up = min_upper_bound(h);
    extra["min_upper"] = {{"value", up.value}, {"epsilon", up.epsilon}};
    out << "min upper bound " << format_real(up.value) << " at eps=" << format_real(up.epsilon)
        << '\n';
  }
  if (cfg.horizon > 16) {
    const auto lo = max_lower_bound(h);
    extra["max_lower"] = {{"value", lo.value}, {"epsilon", lo.epsilon}};
    out << "max lower bound " << format_real(lo.value) << " at eps=" << format_real(lo.epsilon)
        << (lo.value <= 0.0 ? " (vacuous)" : "") << '\n';
  }
  if (cfg.horizon >= 3) {
    out << "2 log log T = " << format_real(2.0 * h.loglog()) << '\n';
  }
  finish(cfg, artifacts, extra);
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  SolverConfig sc = solver_config(cfg, kVerifyGamma);
  sc.store_full_grid = true;
  double seconds = 0.0;
  PolicyTable table = timed_solve(sc, seconds);
  if (cfg.inject_fault == "zero-theta") {
    std::fill(table.theta.begin(), table.theta.end(), 0.0);
  }

  VerifyOptions opt;
  opt.n_paths = cfg.n_paths;
  opt.tail_paths = cfg.n_paths;
  opt.seed = cfg.seed;
  const auto checks = run_verification(table, opt);

  std::ostringstream csv;
  csv << "check,passed,detail\n";
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.passed;
    out << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(24) << c.name << c.detail
        << '\n';
    csv << c.name << ',' << (c.passed ? 1 : 0) << ',' << c.detail << '\n';
  }
  ArtifactSet artifacts;
  artifacts.add("verify.csv", csv.str());
  finish(cfg, artifacts, {{"solver", solver_json(table)}, {"passed", all}});
  out << (all ? "verify: all checks passed" : "verify: FAILED") << '\n';
  return all ? kExitOk : kExitVerifyFailed;
}

void add_shared_flags(CLI::App& sub, RunConfig& cfg) {
  sub.add_option("--T", cfg.horizon, "horizon T (periods)");
  sub.add_option("--epsilon", cfg.epsilon, "accuracy target in (0,1)");
  sub.add_option("--gamma", cfg.gamma, "grid width override (heuristic error)");
  sub.add_option("--q", cfg.q, "expert quality in (0,1)");
  sub.add_option("--n", cfg.n_paths, "Monte Carlo paths");
  sub.add_option("--seed", cfg.seed, "random seed");
  sub.add_option("--out", cfg.out_dir, "output directory");
  sub.add_flag("--refine-theta,!--no-refine-theta", cfg.refine_theta,
               "bisect theta between grid points");
  sub.add_flag("--store-grid", cfg.store_grid, "keep every psi_t row");
  sub.add_flag("--dump-paths", cfg.dump_paths, "write per-path outcomes");
}

}  // namespace

void validate(const RunConfig& cfg) {
  if (cfg.horizon < 1) throw DomainError("--T must be >= 1");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw DomainError("--epsilon must lie in (0,1)");
  if (cfg.gamma && !(*cfg.gamma > 0.0 && std::isfinite(*cfg.gamma))) {
    throw DomainError("--gamma must be positive");
  }
  if (!(cfg.q > 0.0 && cfg.q < 1.0)) throw DomainError("--q must lie in (0,1)");
  if (cfg.n_paths < 2) throw DomainError("--n must be >= 2");
  if (cfg.profile_t && (*cfg.profile_t < 1 || *cfg.profile_t > cfg.horizon)) {
    throw DomainError("--profile-t must lie in [1, T]");
  }
  if (!(cfg.lil_epsilon > 0.0 && cfg.lil_epsilon < 1.0)) {
    throw DomainError("--lil-eps must lie in (0,1)");
  }
  if (!cfg.inject_fault.empty() && cfg.inject_fault != "zero-theta") {
    throw DomainError("unknown --inject-fault '" + cfg.inject_fault + "'");
  }
  if (cfg.command == Command::kBounds && cfg.horizon < 3) {
    throw DomainError("bounds need T >= 3");
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Optimal prediction timing: solver, simulator and bounds"};
  app.require_subcommand(1);

  auto* solve_cmd = app.add_subcommand("solve", "compute theta(t), psi_t(0) and Psi(t)");
  auto* profile_cmd = app.add_subcommand("profile", "emit threshold curve and psi profile CSVs");
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo policy comparison");
  auto* bounds_cmd = app.add_subcommand("bounds", "closed-form bounds on Psi(T)");
  auto* verify_cmd = app.add_subcommand("verify", "run the cross-module invariant suite");
  for (auto* sub : {solve_cmd, profile_cmd, simulate_cmd, bounds_cmd, verify_cmd}) {
    add_shared_flags(*sub, cfg);
  }
  profile_cmd->add_option("--profile-t", cfg.profile_t, "period of the psi profile (default T)");
  simulate_cmd->add_option("--lil-eps", cfg.lil_epsilon, "epsilon of the fixed LIL baseline");
  verify_cmd->add_option("--inject-fault", cfg.inject_fault, "negative control: zero-theta");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitDomain;
  }

  if (solve_cmd->parsed()) cfg.command = Command::kSolve;
  if (profile_cmd->parsed()) cfg.command = Command::kProfile;
  if (simulate_cmd->parsed()) cfg.command = Command::kSimulate;
  if (bounds_cmd->parsed()) cfg.command = Command::kBounds;
  if (verify_cmd->parsed()) cfg.command = Command::kVerify;

  try {
    validate(cfg);
    switch (cfg.command) {
      case Command::kSolve: return cmd_solve(cfg, out);
      case Command::kProfile: return cmd_profile(cfg, out);
      case Command::kSimulate: return cmd_simulate(cfg, out);
      case Command::kBounds: return cmd_bounds(cfg, out);
      case Command::kVerify: return cmd_verify(cfg, out);
    }
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const StateError& e) {
    err << "state error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace lmsrstop::cli
