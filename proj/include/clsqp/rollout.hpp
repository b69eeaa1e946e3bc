#pragma once

#include "clsqp/problem.hpp"
#include "clsqp/qp_data.hpp"

#include <string>
#include <vector>

namespace clsqp {

enum class GainSource { exact, barrier, tvlqr, zero };

std::string to_string(GainSource source);

struct GainSchedule {
  MatSeq K;  ///< m x n per step
  std::vector<GainSource> source;

  static GainSchedule zeros(int horizon, int n, int m);
  int horizon() const { return static_cast<int>(K.size()); }
};

struct RolloutResult {
  VecSeq x, u;
  VecSeq dx, du;  ///< perturbations relative to the nominal iterate
};

/// du_k[alpha] = clip(alpha du*_k + K_k (dx_k[alpha] - alpha dx*_k)) into [u_lo - u_k, u_hi - u_k], rolled
/// through the nonlinear dynamics from dx_0 = 0. Throws DivergedRollout on a non-finite state.
RolloutResult closed_loop_rollout(const ProblemSpec& spec, const Iterate& it, const VecSeq& du_star,
                                  const VecSeq& dx_star, const GainSchedule& gains, double alpha);

/// Feedback gains of the Riccati recursion on (A_k, B_k) with stage weights W_k ((n+m) square) and
/// terminal weight W_N. The control block is floored at eps.
MatSeq riccati_gains(const MatSeq& A, const MatSeq& B, const MatSeq& W, double eps);

/// TV-LQR gains from the linearized dynamics and the (projected) Hessian of the objective alone.
GainSchedule tvlqr_fallback_gains(const ProblemSpec& spec, const Iterate& it, const QPData& data, double eps_psd = 1e-6);

}  // namespace clsqp
