#include "lmsrstop/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <boost/random/normal_distribution.hpp>

#include "lmsrstop/bounds.hpp"
#include "lmsrstop/errors.hpp"

namespace lmsrstop {

namespace {

constexpr double kMaxSteps = 2e11;
constexpr std::int64_t kMaxPaths = 1'000'000'000;

// Stream domains, so walk, scenario and bridge draws never share a sequence.
constexpr std::uint64_t kWalkDomain = 0x57414c4bULL;
constexpr std::uint64_t kScenarioDomain = 0x5343454eULL;
constexpr std::uint64_t kBridgeDomain = 0x42524447ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t domain)
      : engine_(splitmix64(seed ^ splitmix64(stream ^ splitmix64(domain)))) {}

  double operator()() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
};

// Welford accumulator; fed in path order so sums are reproducible.
struct Moments {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  double std_error() const {
    if (n < 2) return 0.0;
    return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

void check_sizes(int horizon, std::int64_t n) {
  if (horizon < 1) throw DomainError("horizon must be >= 1, got " + std::to_string(horizon));
  if (n > kMaxPaths ||
      static_cast<double>(n) * static_cast<double>(horizon) > kMaxSteps) {
    throw CapacityError("simulation of n=" + std::to_string(n) + " paths x T=" +
                        std::to_string(horizon) + " steps exceeds the engine limit");
  }
}

double lil_level(int horizon, double epsilon) {
  return (1.0 - epsilon) * 2.0 * std::log(std::log(static_cast<double>(horizon)));
}

struct Scanner {
  const WalkPath& path;

  StopOutcome operator()(const OptimalTablePolicy& p) const {
    const PolicyTable& table = p.table.get();
    for (int t = path.horizon; t >= 1; --t) {
      const double s = path.at(t);
      if (std::abs(s) >= table.theta_at(t)) return {t, s * s / t};
    }
    return final();
  }
  StopOutcome operator()(const FixedLilPolicy& p) const {
    const double level = lil_level(path.horizon, p.epsilon);
    for (int t = path.horizon; t >= 1; --t) {
      const double s = path.at(t);
      if (s * s / t >= level) return {t, s * s / t};
    }
    return final();
  }
  StopOutcome operator()(const ImmediateStopPolicy&) const {
    const double s = path.at(path.horizon);
    return {path.horizon, s * s / path.horizon};
  }
  StopOutcome operator()(const FinalStopPolicy&) const { return final(); }
  StopOutcome operator()(const HindsightPolicy&) const {
    StopOutcome best{1, -1.0};
    for (int t = path.horizon; t >= 1; --t) {
      const double s = path.at(t);
      const double r = s * s / t;
      if (r > best.reward) best = {t, r};
    }
    return best;
  }

  StopOutcome final() const {
    const double s = path.at(1);
    return {1, s * s};
  }
};

}  // namespace

WalkPath sample_walk(int horizon, std::uint64_t seed, std::uint64_t stream) {
  if (horizon < 1) throw DomainError("sample_walk requires T >= 1, got " + std::to_string(horizon));
  NormalStream normal(seed, stream, kWalkDomain);
  WalkPath path{horizon, std::vector<double>(static_cast<std::size_t>(horizon))};
  double sum = 0.0;
  for (auto& v : path.s) {
    sum += normal();
    v = sum;
  }
  return path;
}

std::string policy_id(const StoppingPolicy& policy) {
  struct Namer {
    std::string operator()(const OptimalTablePolicy&) const { return "optimal"; }
    std::string operator()(const FixedLilPolicy& p) const {
      std::ostringstream os;
      os << "fixed_lil(" << p.epsilon << ")";
      return os.str();
    }
    std::string operator()(const ImmediateStopPolicy&) const { return "immediate"; }
    std::string operator()(const FinalStopPolicy&) const { return "final"; }
    std::string operator()(const HindsightPolicy&) const { return "hindsight"; }
  };
  return std::visit(Namer{}, policy);
}

void check_applicable(const StoppingPolicy& policy, int horizon) {
  if (const auto* opt = std::get_if<OptimalTablePolicy>(&policy)) {
    if (opt->table.get().horizon() < horizon) {
      throw DomainError("policy table horizon " + std::to_string(opt->table.get().horizon()) +
                        " is shorter than T=" + std::to_string(horizon));
    }
  } else if (const auto* lil = std::get_if<FixedLilPolicy>(&policy)) {
    if (horizon < 16) {
      throw DomainError("fixed LIL policy requires T >= 16, got " + std::to_string(horizon));
    }
    if (!(lil->epsilon > 0.0 && lil->epsilon < 1.0)) {
      throw DomainError("fixed LIL policy requires 0 < eps < 1");
    }
  }
}

StopOutcome run_policy(const WalkPath& path, const StoppingPolicy& policy) {
  return std::visit(Scanner{path}, policy);
}

MonteCarloRun monte_carlo(std::span<const StoppingPolicy> policies, int horizon, std::int64_t n,
                          std::uint64_t seed, MonteCarloOptions options) {
  if (n < 2) throw DomainError("monte_carlo requires n >= 2, got " + std::to_string(n));
  check_sizes(horizon, n);
  for (const auto& p : policies) check_applicable(p, horizon);

  MonteCarloRun run;
  run.horizon = horizon;
  run.n_paths = n;
  run.seed = seed;
  const std::size_t np = policies.size();
  std::vector<Moments> reward(np);
  std::vector<Moments> stop(np);
  run.results.resize(np);
  if (options.keep_paths) {
    run.outcomes.assign(np, std::vector<StopOutcome>(static_cast<std::size_t>(n)));
  }

  for (std::int64_t i = 0; i < n; ++i) {
    const WalkPath path = sample_walk(horizon, seed, static_cast<std::uint64_t>(i));
    for (std::size_t k = 0; k < np; ++k) {
      const StopOutcome out = run_policy(path, policies[k]);
      reward[k].add(out.reward);
      stop[k].add(out.stop_t);
      ++run.results[k].stop_time_histogram[out.stop_t];
      if (options.keep_paths) run.outcomes[k][static_cast<std::size_t>(i)] = out;
    }
  }

  for (std::size_t k = 0; k < np; ++k) {
    SimResult& r = run.results[k];
    r.policy = policy_id(policies[k]);
    r.n_paths = n;
    r.mean_reward = reward[k].mean;
    r.std_error = reward[k].std_error();
    r.mean_stop_time = stop[k].mean;
  }
  return run;
}

double pooled_std_error(const SimResult& a, const SimResult& b) {
  return std::hypot(a.std_error, b.std_error);
}

std::vector<TailFrequency> tail_frequencies(std::span<const double> lambdas,
                                            std::span<const int> times, std::int64_t n,
                                            std::uint64_t seed) {
  if (n < 2) throw DomainError("tail_frequencies requires n >= 2");
  if (times.empty() || lambdas.empty()) return {};
  const int horizon = *std::max_element(times.begin(), times.end());
  if (*std::min_element(times.begin(), times.end()) < 1) {
    throw DomainError("tail_frequencies requires t >= 1");
  }
  check_sizes(horizon, n);

  std::vector<TailFrequency> out;
  for (int t : times) {
    for (double lambda : lambdas) {
      TailFrequency f;
      f.lambda = lambda;
      f.t = t;
      f.n = n;
      f.bounds = normal_tail_bounds(lambda);
      out.push_back(f);
    }
  }
  std::vector<std::int64_t> hits(out.size(), 0);
  for (std::int64_t i = 0; i < n; ++i) {
    const WalkPath path = sample_walk(horizon, seed, static_cast<std::uint64_t>(i));
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (std::abs(path.at(out[k].t)) >= out[k].lambda * std::sqrt(static_cast<double>(out[k].t))) {
        ++hits[k];
      }
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto& f = out[k];
    f.fraction = static_cast<double>(hits[k]) / static_cast<double>(n);
    f.std_error = std::sqrt(f.fraction * (1.0 - f.fraction) / static_cast<double>(n));
    f.within = f.bounds.lower - 4.0 * f.std_error < f.fraction &&
               f.fraction <= f.bounds.upper + 4.0 * f.std_error;
  }
  return out;
}

HindsightReport hindsight_fraction_above(int horizon, std::int64_t n, std::uint64_t seed,
                                         double epsilon) {
  if (horizon <= 16) throw DomainError("hindsight_fraction_above requires T > 16");
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw DomainError("hindsight_fraction_above requires 0 < eps < 1/2");
  }
  if (n < 2) throw DomainError("hindsight_fraction_above requires n >= 2");
  check_sizes(horizon, n);

  HindsightReport rep;
  rep.horizon = horizon;
  rep.epsilon = epsilon;
  rep.n = n;
  rep.level = lil_level(horizon, epsilon);
  const StoppingPolicy hindsight = HindsightPolicy{};
  std::int64_t above = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const WalkPath path = sample_walk(horizon, seed, static_cast<std::uint64_t>(i));
    if (run_policy(path, hindsight).reward > rep.level) ++above;
  }
  rep.fraction = static_cast<double>(above) / static_cast<double>(n);
  rep.std_error = std::sqrt(rep.fraction * (1.0 - rep.fraction) / static_cast<double>(n));
  rep.gamma2 = gamma2(static_cast<double>(horizon), epsilon);
  rep.required = 1.0 - rep.gamma2 - 4.0 * rep.std_error;
  rep.vacuous = rep.gamma2 >= 1.0;
  rep.satisfied = rep.fraction >= rep.required;
  return rep;
}

Crossover martingale_crossover(int t, double c) {
  if (t < 2) throw DomainError("martingale_crossover requires t >= 2, got " + std::to_string(t));
  const double td = t;
  Crossover out;
  out.conditional_mean = c * c * (td - 1.0) / (td * td) + 1.0 / td;
  // conditional_mean - c^2/t = (1 - c^2/t)/t
  const double gap = 1.0 - c * c / td;
  constexpr double kTie = 64.0 * std::numeric_limits<double>::epsilon();
  out.drift_sign = std::abs(gap) <= kTie ? 0 : (gap > 0.0 ? 1 : -1);
  return out;
}

Estimate empirical_conditional_moment(int t, double c, std::int64_t n, std::uint64_t seed) {
  if (t < 2) throw DomainError("empirical_conditional_moment requires t >= 2");
  if (n < 2) throw DomainError("empirical_conditional_moment requires n >= 2");
  check_sizes(t, n);
  Moments m;
  const double pin = static_cast<double>(t - 1) / t;
  for (std::int64_t i = 0; i < n; ++i) {
    NormalStream normal(seed, static_cast<std::uint64_t>(i), kBridgeDomain);
    double w_prev = 0.0;
    for (int k = 1; k < t; ++k) w_prev += normal();
    const double w_t = w_prev + normal();
    // Brownian-bridge conditioning of the free walk on S_t = c.
    const double s_prev = w_prev - pin * (w_t - c);
    m.add(s_prev * s_prev / (t - 1));
  }
  return {m.mean, m.std_error()};
}

MarketState ScenarioPath::state(int t) const {
  const auto i = static_cast<std::size_t>(t - 1);
  return MarketState{t, x[i], y[i], q};
}

ScenarioPath sample_scenario(int horizon, double q, double x0, std::uint64_t seed,
                             std::uint64_t stream) {
  if (horizon < 1) throw DomainError("sample_scenario requires T >= 1");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("sample_scenario requires 0 < q < 1");
  NormalStream normal(seed, stream, kScenarioDomain);
  const auto n = static_cast<std::size_t>(horizon);
  ScenarioPath p{horizon, q, x0, std::vector<double>(n), std::vector<double>(n),
                 std::vector<double>(n), std::vector<double>(n)};
  const double sa = std::sqrt(q);
  const double sb = std::sqrt(1.0 - q);
  double market = x0;
  double expert = x0;
  for (std::size_t i = 0; i < n; ++i) {
    p.a_steps[i] = sa * normal();
    p.b_steps[i] = sb * normal();
    market += p.a_steps[i] + p.b_steps[i];
    expert += p.b_steps[i];
    p.x[i] = market;
    p.y[i] = expert;
  }
  return p;
}

ScenarioReport expert_scenario(int horizon, double q, std::int64_t n, std::uint64_t seed,
                               const PolicyTable& table) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("expert_scenario requires 0 < q < 1");
  if (n < 2) throw DomainError("expert_scenario requires n >= 2");
  if (table.horizon() < horizon) {
    throw DomainError("policy table horizon is shorter than the scenario horizon");
  }
  check_sizes(horizon, n);

  ScenarioReport rep;
  rep.horizon = horizon;
  rep.q = q;
  rep.n = n;
  rep.quality_term = quality_term(q);
  Moments realized;
  Moments expected;
  Moments diff;
  Moments stop;
  std::int64_t negative = 0;
  const double x0 = 0.0;
  const double root_q = std::sqrt(q);

  for (std::int64_t i = 0; i < n; ++i) {
    const ScenarioPath path = sample_scenario(horizon, q, x0, seed, static_cast<std::uint64_t>(i));
    int t = horizon;
    for (; t > 1; --t) {
      if (should_predict(path.state(t), table.theta_at(t))) break;
    }
    const MarketState st = path.state(t);
    const double w = lmsr_realized_reward(GaussianSpec{st.x, static_cast<double>(t)},
                                          GaussianSpec{st.y, (1.0 - q) * t}, x0);
    const double e = expert_policy_reward(st, table.psi(t, (st.y - st.x) / root_q));
    realized.add(w);
    expected.add(e);
    diff.add(w - e);
    stop.add(t);
    if (w < 0.0) ++negative;
  }
  rep.mean_realized = realized.mean;
  rep.realized_std_error = realized.std_error();
  rep.mean_expected = expected.mean;
  rep.expected_std_error = expected.std_error();
  rep.mean_difference = diff.mean;
  rep.difference_std_error = diff.std_error();
  rep.mean_stop_time = stop.mean;
  rep.negative_fraction = static_cast<double>(negative) / static_cast<double>(n);
  return rep;
}

}  // namespace lmsrstop
