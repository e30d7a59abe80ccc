#pragma once

// The batch commands behind the `sktlimit` executable. Each command reads a
// RunConfig, writes its files under cfg.output_dir together with a
// manifest.json echoing the full configuration, and prints a short report.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "sktlimit/config.hpp"

namespace sktlimit {

struct CommandIO {
  std::ostream* out = nullptr;       // report
  std::ostream* progress = nullptr;  // null when quiet
};

/// Regime, constant state, D, tau_bar, tau_tilde and d^(1..4). Throws
/// RegimeError for degenerate parameters after printing the failed ordering.
void cmd_regime(const RunConfig& cfg, const CommandIO& io);
/// One `u,h` CSV per tau; the zeros of h are appended as the last rows.
void cmd_hprofile(const RunConfig& cfg, const CommandIO& io);
/// `m,X` over the admissible amplitudes; the last row is the z2 limit.
void cmd_timemap(const RunConfig& cfg, const CommandIO& io);
/// Selects tau for (j, d) and writes the profile(s) with their residuals.
void cmd_solve(const RunConfig& cfg, const CommandIO& io);
/// Traces every (mode, orientation) pair on branch.jobs worker threads.
void cmd_branch(const RunConfig& cfg, const CommandIO& io);
/// Full-system solves along validate.alphas compared with the limit.
void cmd_validate(const RunConfig& cfg, const CommandIO& io);

/// Runs `name`, mapping library errors to exit codes: 0 success, 2 usage,
/// configuration or regime errors, 3 numerical failures. Messages go to
/// `err`.
int run_command(std::string_view name, const RunConfig& cfg, const CommandIO& io,
                std::ostream& err);

/// "p/q" when x is within 1e-12 relative of a fraction with q <= 100000.
std::optional<std::string> rational_hint(double x);

/// True unless SKT_LIMIT_QUIET is set to something other than "" or "0".
bool quiet_from_env();

}  // namespace sktlimit
