#pragma once

#include "clsqp/problem.hpp"
#include "clsqp/qp.hpp"

namespace clsqp {

enum class HessianMode { full, gauss_newton };

/// Linearization of the problem at an iterate; the data of the QP sub-problem in the perturbations
/// (dx, du) with dx_0 = 0.
struct QPData {
  int horizon = 0;
  int n = 0;
  int m = 0;
  MatSeq A, B;      ///< dynamics Jacobians, k = 0..N-1
  MatSeq Jx;        ///< state constraint Jacobians, k = 0..N (no rows at k = 0)
  Mat Ju;           ///< control constraint Jacobian (constant)
  VecSeq cx, cu;    ///< constraint values, cx for k = 0..N, cu for k = 0..N-1
  VecSeq q, r;      ///< objective gradients, q for k = 0..N, r for k = 0..N-1
  MatSeq Z;         ///< Hessian blocks after projection; (n+m) square for k < N, n square at N
  MatSeq Z_raw;     ///< the same before projection
  VecSeq nu;        ///< adjoint sequence nu_1..nu_N (entry 0 holds nu_0)
  HessianMode mode = HessianMode::full;

  int state_rows(int k) const { return static_cast<int>(cx[k].size()); }
  int control_rows() const { return static_cast<int>(Ju.rows()); }
  const Mat& Zxx(int k) const { return Z[k]; }
};

struct QpDataOptions {
  HessianMode mode = HessianMode::full;
  double eps_psd = 1e-6;
  bool project = true;
  /// Run the per-step assembly as an OpenMP loop; false gives the serial reference path.
  bool parallel = true;
};

QPData build_qp_data(const ProblemSpec& spec, const Iterate& it, const QpDataOptions& opt = {});

/// Nearest matrix with spectrum >= eps in the Frobenius norm (eigenvalue clamp).
Mat project_psd(const Mat& Z, double eps);

/// The QP sub-problem as a stage-structured QP; inequality duals come out stacked like c_k.
OcpQp to_ocp_qp(const QPData& data);

/// Tail of the sub-problem from step k with dx_k fixed to dx; its value is the optimal tail cost
/// including the state-only terms of stage k.
OcpQp build_tail_qp(const QPData& data, int k, const Vec& dx);

/// Gradient of the reduced objective J_R(u) = J(x[u], u), stacked per step.
VecSeq reduced_objective_gradient(const QPData& data);

/// Gradients of the Hamiltonian with respect to u_k, k = 0..N-1, at the iterate (primal and duals).
VecSeq hamiltonian_control_gradients(const ProblemSpec& spec, const Iterate& it);

/// Linear perturbation rollout dx_{k+1} = A_k dx_k + B_k du_k from dx_0 = 0.
VecSeq linear_rollout(const QPData& data, const VecSeq& du);

}  // namespace clsqp
