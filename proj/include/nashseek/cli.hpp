#pragma once

// Command implementations behind the `nashseek` executable. Each returns the
// process exit code: 0 ok, 2 configuration error, 3 numerical failure
// (divergence, not settled, no convergence); verify returns 1 when any check
// fails.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nashseek/config.hpp"

namespace nashseek {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;

struct RunOutcome {
  int exit_code = kExitOk;
  Json summary;
};

/// Runs one simulation and writes trajectory.csv and summary.json into
/// out_dir (created if needed).
RunOutcome cmd_run(const Json& config, const std::filesystem::path& out_dir, std::ostream& out);

/// Prints the analytic equilibrium, the numerically solved one, their gap
/// and the pseudo-gradient norms.
int cmd_nash(const Json& config, std::ostream& out);

struct VerifyOptions {
  /// Subset of {"graph", "control", "game", "sim"}; empty runs everything.
  std::set<std::string> only;
  /// Scenario parameter blocks to verify instead of the built-in tables.
  /// They are used unchecked so that corrupted values reach the probes.
  std::optional<Json> vehicle_params;
  std::optional<Json> turbine_params;
  std::uint64_t seed = 1;
};

int cmd_verify(const VerifyOptions& options, std::ostream& out);

struct SweepCell {
  Json value;
  std::string status;  // "settled" | "not_settled" | "diverged" | "config_error"
  std::optional<double> settle_time;
  std::optional<double> lambda_hat;
  std::optional<double> r_squared;
  std::optional<double> observer_error;
  std::optional<double> final_error;
};

/// Worker count for sweeps: NASHSEEK_THREADS when set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
[[nodiscard]] std::size_t sweep_threads();

/// One run per value of `param` (a dotted key or alias), executed
/// concurrently. Failed cells are recorded and the sweep continues. Writes
/// CSV with header value,status,settle_time,lambda_hat,r_squared,
/// observer_error,final_error.
std::vector<SweepCell> cmd_sweep(const Json& config, const std::string& param, const std::vector<Json>& values,
                                 std::ostream& csv, std::size_t threads = sweep_threads());

/// Post-transient observer error window start used by sweeps and summaries.
inline constexpr double kObserverTransient = 1.0;

}  // namespace nashseek
