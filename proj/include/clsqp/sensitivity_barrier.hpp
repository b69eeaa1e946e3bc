#pragma once

#include "clsqp/qp.hpp"
#include "clsqp/qp_data.hpp"

#include <string>

namespace clsqp {

struct BarrierOptions {
  double gamma = 1e-4;
  /// Stationarity tolerance on the reduced barrier gradient, relative to 1 + ||(q, r)||_inf.
  double tol = 1e-10;
  int max_iter = 50;
  /// Weight of the strictly interior point in the initialization (1 - theta) du* + theta du_c.
  double theta = 1e-3;
  bool parallel = true;
};

/// Minimizer of the stage QP objective minus gamma * sum log(h - C z) under the linear dynamics.
struct BarrierSolution {
  VecSeq x, u;
  VecSeq slack;  ///< h_k - C_k z_k > 0
  int iterations = 0;
  double stationarity = 0.0;
  bool converged = false;
  bool interior_fallback = false;  ///< the initial guess was not strictly interior
  bool ok = false;
};

/// Damped Newton (iLQR) on the barrier problem starting from the controls du_init; when the rollout of
/// du_init is not strictly interior, the start comes from a primal-dual solve of the same central path
/// point.
BarrierSolution solve_barrier_ilqr(const OcpQp& qp, const VecSeq& du_init, const BarrierOptions& opt);

struct BarrierGains {
  bool ok = false;
  std::string message;
  MatSeq K;                  ///< K_k(gamma), m x n
  BarrierSolution solution;  ///< the un-anchored barrier trajectory the gains are taken at
  /// ||du^g_k + K_k (dx*_k - dx^g_k) - du*_k||
  Vec reconstruction_error;
};

/// Gains of every anchored tail problem from one barrier solve: a serial backward sweep of the
/// barrier Hessian followed by a per-step gain extraction (parallel over k unless opt.parallel is off).
BarrierGains barrier_gains(const QPData& data, const VecSeq& dx_star, const VecSeq& du_star, const BarrierOptions& opt);

/// Control perturbation du_c placing each box-bounded control at the centre of its admissible interval.
VecSeq box_center_shift(const QPData& data);

/// First control of the barrier solution of the tail problem from step k with dx_k = dx.
Vec anchored_barrier_control(const QPData& data, int k, const Vec& dx, const BarrierOptions& opt);

}  // namespace clsqp
