#pragma once

// Config-driven experiment runner behind the command line tool.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pnewton/pnt.hpp"
#include "pnewton/problems.hpp"

namespace pnewton {

enum class OracleMode { Auto, On, Off };

struct ExperimentConfig {
  problems::ProblemSpec problem = problems::default_spec("heat");
  PntOptions opts;
  /// Any of "pnt", "pnt-md", "newton".
  std::vector<std::string> solvers{"pnt", "newton"};
  /// Start step for the pnt-md arm.
  int md_k0 = 10;
  OracleMode oracles = OracleMode::Auto;
  std::string output_dir;
};

struct ScalingRow {
  Index n = 0;
  std::string solver;
  int iterations = 0;
  double seconds = 0.0;
};

struct VerifyReport {
  std::size_t rows = 0;
  bool merit_monotone = true;
  bool residual_floor = true;
  std::vector<std::string> problems;
  bool ok() const { return merit_monotone && residual_floor; }
};

namespace experiment {

/// Problems at or below this size get the dense oracles in auto mode.
inline constexpr Index kOracleAutoLimit = 1000;
inline constexpr const char* kOutputRootEnv = "PNEWTON_OUTPUT_ROOT";
inline constexpr const char* kTraceHeader =
    "k,lambda,merit_h,residual_mnorm,gamma,backtracks,cond_J,rel_error";

/// Flat "key = value" lines; '#' starts a comment. Throws ParseError on an empty file,
/// malformed lines, unknown keys or bad values.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical "key = value" echo of every setting.
std::string resolved_config(const ExperimentConfig& cfg);

/// Relative output directories are placed under $PNEWTON_OUTPUT_ROOT when set.
std::filesystem::path output_path(const ExperimentConfig& cfg);

void write_trace(std::ostream& out, const std::vector<IterationRecord>& history);

/// Runs every configured solver plus the oracles and writes config.resolved,
/// summary.csv and <solver>/{trace.csv,solution.txt,meta.txt}. Returns the
/// process exit code; log receives progress and errors.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

/// DP-only stop at each size; writes scaling.csv.
std::vector<ScalingRow> run_scaling(const ExperimentConfig& cfg, const std::vector<Index>& sizes,
                                    std::ostream& log);

/// Re-checks merit monotonicity and the residual floor sqrt(tau m)(1 - 1e-12).
/// Without tau_m, reads it from meta.txt beside the trace.
VerifyReport verify_trace(const std::filesystem::path& trace,
                          std::optional<double> tau_m = std::nullopt);

}  // namespace experiment
}  // namespace pnewton
