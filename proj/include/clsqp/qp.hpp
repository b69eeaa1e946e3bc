#pragma once

#include "clsqp/types.hpp"

#include <string>
#include <vector>

namespace clsqp {

/// min 1/2 z'Hz + g'z + constant  s.t.  A_eq z = b_eq,  G z <= h.
struct QpInstance {
  Mat H;
  Vec g;
  Mat A_eq;
  Vec b_eq;
  Mat G;
  Vec h;
  double constant = 0.0;

  int num_vars() const { return static_cast<int>(g.size()); }
  int num_eq() const { return static_cast<int>(b_eq.size()); }
  int num_ineq() const { return static_cast<int>(h.size()); }
  double objective(const Vec& z) const { return 0.5 * z.dot(H * z) + g.dot(z) + constant; }
  /// Throws on inconsistent sizes or non-finite entries.
  void validate() const;
};

enum class QpStatus { optimal, infeasible, max_iter };

std::string to_string(QpStatus status);

struct QpSolution {
  Vec z;
  Vec lambda_eq;
  Vec lambda_ineq;
  Vec slack;  ///< h - G z
  QpStatus status = QpStatus::max_iter;
  double kkt_error = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool polished = false;
};

struct QpOptions {
  double tol = 1e-8;
  int max_iter = 200;
  /// Refine the interior-point answer by solving the KKT system on the identified active set.
  bool polish = true;
  /// When positive, stop on the central path at s_i lambda_i = mu_target instead of at the optimum
  /// (the minimizer of the log-barrier problem with weight mu_target).
  double mu_target = 0.0;
};

/// Dense Mehrotra predictor-corrector interior point method. A warm start only seeds the primal.
QpSolution solve_qp(const QpInstance& inst, const QpOptions& opt = {}, const QpSolution* warm_start = nullptr);

struct ActiveSetInfo {
  std::vector<int> indices;
  bool licq = true;
  bool strict_complementarity = true;
};

/// Rows with h - G z* <= tol_act.
ActiveSetInfo active_set(const QpSolution& sol, const QpInstance& inst, double tol_act);

/// Stage-structured QP over x_0..x_N, u_0..u_{N-1}:
///   min sum_k 1/2 [x;u]' Z_k [x;u] + q_k'x + r_k'u + 1/2 x_N' Z_N x_N + q_N'x_N
///   s.t. x_0 = x0, x_{k+1} = A_k x_k + B_k u_k + d_k, C_k [x_k;u_k] <= h_k, C_N x_N <= h_N.
struct OcpQp {
  int horizon = 0;
  Vec x0;
  MatSeq A, B;
  VecSeq d;
  MatSeq Z;  ///< (n+m) square for k < N, n square at N
  VecSeq q, r;
  MatSeq C;
  VecSeq h;

  int n() const { return static_cast<int>(x0.size()); }
  int m() const { return static_cast<int>(B.front().cols()); }
  void validate() const;
  double objective(const VecSeq& x, const VecSeq& u) const;
};

struct OcpQpSolution {
  VecSeq x, u;
  VecSeq lambda;  ///< inequality duals per stage
  VecSeq costate; ///< equality duals: costate[0] for x_0 = x0, costate[k+1] for the k-th dynamics row
  QpStatus status = QpStatus::max_iter;
  double kkt_error = 0.0;
  double objective = 0.0;
  int iterations = 0;
};

/// Same interior point method with a Riccati factorization of each Newton system.
OcpQpSolution solve_ocp_qp(const OcpQp& qp, const QpOptions& opt = {});

/// Flat variable order z = (x_0, u_0, x_1, u_1, ..., x_N); equalities (x_0, dynamics), inequalities
/// stage by stage.
QpInstance to_dense(const OcpQp& qp);

/// Index of x_k / u_k in the flat variable vector of to_dense.
int ocp_x_offset(const OcpQp& qp, int k);
int ocp_u_offset(const OcpQp& qp, int k);

}  // namespace clsqp
