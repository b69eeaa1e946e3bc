#include "clsqp/bench.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop shooting SQP experiments"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "Run one experiment from a JSON config");
  std::string config_path, method, out_dir;
  double gamma = 0.0, tol_primal = 0.0, tol_dual = 0.0;
  int max_iters = -1;
  long long seed = -1;
  solve->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  solve->add_option("--method", method, "OL, CL or CLG");
  solve->add_option("--gamma", gamma, "Constant barrier weight")->check(CLI::PositiveNumber);
  solve->add_option("--max-iters", max_iters, "Iteration limit")->check(CLI::NonNegativeNumber);
  solve->add_option("--tol-primal", tol_primal, "Relative primal tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--tol-dual", tol_dual, "Relative dual tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--out", out_dir, "Output directory");
  solve->add_option("--seed", seed, "Seed recorded with the run")->check(CLI::NonNegativeNumber);

  auto* report = app.add_subcommand("report", "Tabulate run directories");
  std::vector<std::string> run_dirs;
  std::string table_path;
  report->add_option("runs", run_dirs, "Run output directories")->required();
  report->add_option("--out", table_path, "Write the table to this file as well");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      clsqp::BenchConfig cfg = clsqp::load_config(config_path);
      if (!method.empty()) cfg.method = clsqp::parse_method(method);
      if (gamma > 0.0) {
        cfg.gamma_initial = cfg.gamma_floor = gamma;
        cfg.gamma_factor = 1.0;
      }
      if (max_iters >= 0) cfg.max_iters = max_iters;
      if (tol_primal > 0.0) cfg.tol_primal = tol_primal;
      if (tol_dual > 0.0) cfg.tol_dual = tol_dual;
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (seed >= 0) cfg.seed = static_cast<unsigned>(seed);
      const clsqp::ExperimentResult res = clsqp::run_experiment(cfg);
      std::cout << res.summary.line() << std::endl;
      // hitting max_iters without convergence is reported like a stall
      return res.summary.converged ? 0 : 2;
    }
    std::vector<std::filesystem::path> dirs(run_dirs.begin(), run_dirs.end());
    const std::string table = clsqp::format_report(clsqp::collect_runs(dirs));
    std::cout << table;
    if (!table_path.empty()) {
      std::ofstream f(table_path);
      if (!f) throw clsqp::Error("cannot write '" + table_path + "'");
      f << table;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
}
