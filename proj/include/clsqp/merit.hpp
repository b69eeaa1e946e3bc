#pragma once

#include "clsqp/problem.hpp"
#include "clsqp/qp_data.hpp"

#include <functional>
#include <vector>

namespace clsqp {

/// s_k = max(0, c_k) when rho_k = 0, else max(0, c_k - y_k / rho_k).
VecSeq init_slacks(const VecSeq& c, const VecSeq& y, const Vec& rho);

/// ds_k = c_k + J_k (dx_k, du_k) - s_k, using the constraint values and Jacobians stored in the QP data.
VecSeq slack_directions(const QPData& data, const VecSeq& dx, const VecSeq& du, const VecSeq& s);

/// Augmented Lagrangian  sum_k l_k - y_k'(c_k - s_k) + rho_k/2 ||c_k - s_k||^2  (+ terminal terms).
double merit_value(const ProblemSpec& spec, const VecSeq& x, const VecSeq& u, const VecSeq& y, const VecSeq& s,
                   const Vec& rho, const VecSeq& chart);

/// Everything the penalty rule and the closed-form derivative need about the current search direction.
struct MeritSnapshot {
  VecSeq c;        ///< constraint values at the iterate
  VecSeq s;        ///< slacks
  VecSeq y;        ///< current duals
  VecSeq yhat;     ///< QP duals
  double g_dx = 0; ///< reduced-objective directional derivative g'dx*
  double delta = 0;///< curvature term Delta*
  double psi() const { return g_dx + 0.5 * delta; }
};

/// phi'(0; rho) = g'dx* + sum_k (2 y_k - yhat_k)'(c_k - s_k) - rho_k ||c_k - s_k||^2.
double merit_directional_derivative(const MeritSnapshot& snap, const Vec& rho);

/// Keep rho when phi'(0; rho) <= -Delta*/2; otherwise rho_k <- max(2 rho_k, rho_hat_k) on the steps with
/// c_k != s_k.
Vec update_penalties(const MeritSnapshot& snap, const Vec& rho);

struct LineSearchOptions {
  double sigma = 0.4;
  double eta = 0.49;
  double alpha_min = 1e-5;
  /// Central-difference step for phi'(alpha) is fd_step (1 + alpha).
  double fd_step = 1e-6;
  int max_zoom = 5;
};

struct LineSearchResult {
  bool success = false;
  double alpha = 0.0;
  double phi = 0.0;
  bool curvature_met = false;  ///< both conditions hold at the returned alpha
  int evaluations = 0;
  /// lowest merit seen over all trial steps (used by the caller after a failure)
  double best_alpha = 0.0;
  double best_phi = 0.0;
};

/// Backtracking from alpha = 1 with safeguarded quadratic interpolation, factors in [0.1, 0.5].
/// Accepts the first step that meets the decrease condition and, where reachable, the curvature
/// condition |phi'(alpha)| <= -eta phi'(0). A trial step with non-finite merit counts as rejected.
LineSearchResult line_search(const std::function<double(double)>& phi, double phi0, double dphi0,
                             const LineSearchOptions& opt = {});

}  // namespace clsqp
