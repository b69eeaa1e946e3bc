#pragma once

#include "clsqp/qp.hpp"
#include "clsqp/qp_data.hpp"

#include <string>
#include <vector>

namespace clsqp {

/// V(dx) = 1/2 dx'P dx + p'dx + v.
struct CostToGo {
  Mat P;
  Vec p;
  double v = 0.0;
  double value(const Vec& dx) const { return 0.5 * dx.dot(P * dx) + p.dot(dx) + v; }
};

/// {dx : G dx <= h}.
struct CriticalRegion {
  Mat G;
  Vec h;
  int rows() const { return static_cast<int>(h.size()); }
  /// max_i (G dx - h)_i, or -inf without rows.
  double violation(const Vec& dx) const;
  bool contains(const Vec& dx, double tol) const { return violation(dx) <= tol; }
};

/// The one-step QP at step k in the control perturbation only, with dx_{k+1} = A dx + B du eliminated:
///   min 1/2 du' Rbar du + (rbar + Mbar' dx)' du + const(dx)   s.t.  G du <= h0 - F dx.
/// Rows of G are (-Ju; Gcr_{k+1} B): control rows first, then next-region rows.
struct OneStepQp {
  int k = 0;
  Mat Rbar, Mbar;  ///< Mbar is n x m
  Vec rbar;
  Mat G, F;
  Vec h0;
  Mat Pxx;  ///< Zxx + A'P A
  Vec px;   ///< q + A'p
  double v_next = 0.0;

  QpInstance instance(const Vec& dx) const;
};

OneStepQp make_one_step_qp(const QPData& data, int k, const CostToGo& next, const CriticalRegion& next_region);

struct OneStepSolution {
  Vec du;
  Vec y;  ///< duals of the rows of G
  QpStatus status = QpStatus::max_iter;
  double value = 0.0;
  double kkt_error = 0.0;
};

struct ExactOptions {
  QpOptions qp{1e-10, 200, true, 0.0};
  /// Active-set tolerance is tol_act (1 + ||h||_inf).
  double tol_act = 1e-7;
  double prune_tol = 1e-12;
};

OneStepSolution solve_one_step_qp(const OneStepQp& osq, const Vec& dx, const ExactOptions& opt = {});

struct PolicyJacobians {
  Mat Ku;  ///< m x n
  Mat Ky;  ///< rows(G) x n, zero on rows outside the strongly active set
  Vec du;  ///< solution recomputed on the strongly active set
  Vec y;
  std::vector<int> active;  ///< strongly active rows (dual above tolerance)
  bool licq = true;         ///< over every row with slack below tolerance
  bool strict_complementarity = true;
  bool ok = true;           ///< false when the strongly active rows are rank deficient
};

/// Jacobians of (du*, y*) with respect to dx at dx from the KKT system on the strongly active set;
/// weakly active rows (tight, dual below tolerance) are treated as inactive.
PolicyJacobians kkt_policy_jacobians(const OneStepQp& osq, const OneStepSolution& sol, const Vec& dx,
                                     const ExactOptions& opt = {});

/// Region of step k from the gains and the affine offsets du_a(0), y_a(0).
CriticalRegion recurse_region(const QPData& data, int k, const CriticalRegion& next_region, const Mat& Ku,
                              const Mat& Ky, const Vec& du_ff, const Vec& y_ff, double prune_tol = 1e-12);

CostToGo recurse_cost_to_go(const OneStepQp& osq, const CostToGo& next, const Mat& Ku, const Vec& du_ff);

struct ExactGains {
  bool ok = false;
  int failed_step = -1;
  std::string reason;
  MatSeq Ku, Ky;
  VecSeq du_ff, y_ff;      ///< affine policy offsets at dx = 0
  VecSeq du_hat;           ///< one-step solutions at dx*_k
  std::vector<CriticalRegion> regions;  ///< k = 0..N
  std::vector<CostToGo> cost_to_go;     ///< k = 0..N
  std::vector<bool> strict_complementarity;
  std::vector<bool> licq;
  Vec reconstruction_error;  ///< ||du_hat_k - du*_k||
  Vec membership_violation;  ///< max_i (Gcr_k dx*_k - hcr_k)_i
};

/// Serial backward pass k = N-1..0 composing the one-step QPs, gains, regions and cost-to-go.
ExactGains backward_pass_exact(const QPData& data, const VecSeq& dx_star, const VecSeq& du_star,
                               const ExactOptions& opt = {});

}  // namespace clsqp
