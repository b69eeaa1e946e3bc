#pragma once

#include "clsqp/merit.hpp"
#include "clsqp/problem.hpp"
#include "clsqp/qp_data.hpp"
#include "clsqp/rollout.hpp"
#include "clsqp/sensitivity_barrier.hpp"
#include "clsqp/sensitivity_exact.hpp"

#include <string>
#include <vector>

namespace clsqp {

enum class Method { OL, CL, CL_gamma };

std::string to_string(Method method);
/// Accepts OL, CL, CLG and CL_gamma.
Method parse_method(const std::string& name);

/// gamma_i = max(floor, initial * factor^i) at SQP iteration i.
struct GammaSchedule {
  double initial = 1e-4;
  double factor = 1.0;
  double floor = 1e-4;
  double at(int iter) const;
};

struct SolverOptions {
  Method method = Method::CL_gamma;
  int max_iters = 100;
  double tol_primal = 1e-3;
  double tol_dual = 1e-3;
  GammaSchedule gamma;
  HessianMode hessian_mode = HessianMode::full;
  double eps_psd = 1e-6;
  LineSearchOptions line_search;
  /// Tolerance of the full-horizon QP; non-positive picks 1e-6 for OL and 1e-8 when gains are needed.
  double qp_tol = 0.0;
  ExactOptions exact;
  BarrierOptions barrier;
  bool parallel = true;
  /// Evaluate a finite-difference slope of the merit function at every iteration.
  bool record_merit_checks = false;
  unsigned seed = 0;
};

bool check_termination(const KKTResiduals& r, const Iterate& it, double tol_primal, double tol_dual);

struct GainDiagnostics {
  Vec reconstruction_error;  ///< empty for OL
  bool fallback = false;
  std::string note;
};

/// OL: zero gains. CL: exact recursion, falling back to barrier gains then TV-LQR. CL_gamma: barrier
/// gains, falling back to TV-LQR.
GainSchedule compute_gains(Method method, const ProblemSpec& spec, const Iterate& it, const QPData& data,
                           const VecSeq& dx_star, const VecSeq& du_star, double gamma, const SolverOptions& opt,
                           GainDiagnostics* diag = nullptr);

struct IterationStats {
  int iter = 0;
  double alpha = 0.0;
  double objective = 0.0;
  double max_violation = 0.0;  ///< smallest state-constraint value; negative means infeasible
  double kkt_stationarity = 0.0;
  double kkt_complementarity = 0.0;
  double time_qp_s = 0.0;
  double time_gains_s = 0.0;
  double time_linesearch_s = 0.0;
  double merit = 0.0;
  std::string gains;
  bool line_search_fallback = false;
};

/// Merit slope data of one iteration.
struct MeritCheck {
  double slope = 0.0;      ///< phi'(0; rho+) in closed form
  double delta = 0.0;      ///< Delta*
  double slope_fd = 0.0;   ///< finite-difference estimate along the actual rollout
  double fd_noise = 0.0;   ///< estimated rounding noise of slope_fd
};

struct SolveReport {
  bool converged = false;
  bool stalled = false;
  int stall_iteration = -1;
  std::string stall_reason;
  std::vector<IterationStats> iterations;
  std::vector<Vec> reconstruction_error;  ///< per SQP iteration, per step (CL and CL_gamma)
  std::vector<MeritCheck> merit_checks;
  Iterate final_iterate;
  KKTResiduals final_residuals;
  double total_time_s = 0.0;

  /// Number of SQP updates performed.
  int num_iterations() const { return iterations.empty() ? 0 : static_cast<int>(iterations.size()) - 1; }
  double final_objective() const { return iterations.empty() ? 0.0 : iterations.back().objective; }
  double final_violation() const { return iterations.empty() ? 0.0 : iterations.back().max_violation; }
};

SolveReport sqp_solve(const ProblemSpec& spec, const VecSeq& u_init, const SolverOptions& opt);

}  // namespace clsqp
