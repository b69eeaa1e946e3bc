#pragma once

#include "clsqp/environments.hpp"
#include "clsqp/sqp.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace clsqp {

/// Experiment description. Every field is concrete after load_config; absent keys take the
/// environment defaults.
struct BenchConfig {
  std::string environment = "car";
  int case_index = 1;
  Method method = Method::CL_gamma;

  int max_iters = 100;
  double tol_primal = 1e-3;
  double tol_dual = 1e-3;
  double gamma_initial = 1e-4;
  double gamma_factor = 1.0;
  double gamma_floor = 1e-4;
  HessianMode hessian_mode = HessianMode::full;
  double sigma = 0.4;
  double eta = 0.49;
  double alpha_min = 1e-5;
  bool parallel = true;
  bool record_merit_checks = false;
  /// When false, timing columns are written as zero so that outputs are byte-reproducible.
  bool record_timing = true;

  Vec x0;
  std::vector<Obstacle> obstacles;

  std::string output_dir = "out";
  unsigned seed = 0;

  bool operator==(const BenchConfig& o) const;
};

/// Defaults of an environment case.
BenchConfig default_config(const std::string& environment, int case_index);

/// Parses JSON text; unknown keys and invalid values raise Error with the line number.
BenchConfig parse_config(const std::string& text);
BenchConfig load_config(const std::filesystem::path& path);
/// Full configuration as JSON text; parse_config(config_to_json(c)) == c.
std::string config_to_json(const BenchConfig& config);
/// Stable 64-bit hash of the serialized configuration, hex encoded.
std::string config_hash(const BenchConfig& config);

SolverOptions solver_options(const BenchConfig& config);
Environment make_environment(const BenchConfig& config);

struct RunSummary {
  std::string environment;
  int case_index = 0;
  std::string method;
  bool converged = false;
  bool stalled = false;
  int stall_iteration = -1;
  std::string stall_reason;
  int iterations = 0;
  double objective = 0.0;
  double violation = 0.0;
  double time_per_iter_s = 0.0;
  unsigned seed = 0;
  std::string config_hash;

  std::string line() const;
  std::string to_json() const;
  static RunSummary from_json(const std::string& text);
};

struct ExperimentResult {
  SolveReport report;
  RunSummary summary;
};

/// Solves and writes iterations.csv, trajectory.csv, reconstruction_error.csv and summary.json into
/// config.output_dir. A stall is reported in the summary, never thrown.
ExperimentResult run_experiment(const BenchConfig& config);

struct ReportEntry {
  std::string label;
  std::optional<RunSummary> summary;  ///< nullopt marks an absent run
};

/// Aligned text table with the columns Method, Case, Converged, Iter, Obj, Viol, Time/it, Seed, Config.
std::string format_report(const std::vector<ReportEntry>& entries);
/// Reads summary.json from each run directory; unreadable directories become absent rows.
std::vector<ReportEntry> collect_runs(const std::vector<std::filesystem::path>& run_dirs);

}  // namespace clsqp
