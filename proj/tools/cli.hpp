#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace lmsrstop::cli {

enum class Command { kSolve, kProfile, kSimulate, kBounds, kVerify };

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitCapacity = 3;
inline constexpr int kExitVerifyFailed = 4;

struct RunConfig {
  Command command = Command::kSolve;
  int horizon = 100;
  double epsilon = 0.1;
  std::optional<double> gamma;
  double q = 0.5;
  std::int64_t n_paths = 100'000;
  std::uint64_t seed = 42;
  std::filesystem::path out_dir = ".";
  bool refine_theta = true;
  bool store_grid = false;
  bool dump_paths = false;
  std::optional<int> profile_t;
  double lil_epsilon = 0.2;
  /// Negative control for `verify`: "zero-theta" zeroes the threshold array.
  std::string inject_fault;
};

/// Throws DomainError on any out-of-range field.
void validate(const RunConfig& cfg);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lmsrstop::cli
