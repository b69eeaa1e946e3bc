#include "clsqp/rollout.hpp"

namespace clsqp {

std::string to_string(GainSource source) {
  switch (source) {
    case GainSource::exact: return "exact";
    case GainSource::barrier: return "barrier";
    case GainSource::tvlqr: return "tvlqr";
    case GainSource::zero: return "zero";
  }
  return "unknown";
}

GainSchedule GainSchedule::zeros(int horizon, int n, int m) {
  GainSchedule g;
  g.K.assign(horizon, Mat::Zero(m, n));
  g.source.assign(horizon, GainSource::zero);
  return g;
}

RolloutResult closed_loop_rollout(const ProblemSpec& spec, const Iterate& it, const VecSeq& du_star,
                                  const VecSeq& dx_star, const GainSchedule& gains, double alpha) {
  const int N = spec.horizon;
  RolloutResult r;
  r.x.resize(N + 1);
  r.u.resize(N);
  r.dx.resize(N + 1);
  r.du.resize(N);
  const auto angular = spec.dynamics->angular_dims();
  r.x[0] = it.x[0];
  r.dx[0] = Vec::Zero(spec.n());
  for (int k = 0; k < N; ++k) {
    Vec du = alpha * du_star[k] + gains.K[k] * (r.dx[k] - alpha * dx_star[k]);
    du = du.cwiseMax(spec.u_lower - it.u[k]).cwiseMin(spec.u_upper - it.u[k]);
    r.du[k] = du;
    r.u[k] = it.u[k] + du;
    r.x[k + 1] = spec.dynamics->step(k, r.x[k], r.u[k]);
    if (!r.x[k + 1].allFinite()) throw DivergedRollout(k + 1);
    r.dx[k + 1] = r.x[k + 1] - it.x[k + 1];
    // keep angles in the chart of the nominal trajectory
    for (int i : angular) {
      r.dx[k + 1](i) = wrap_to_pi(r.dx[k + 1](i));
      r.x[k + 1](i) = it.x[k + 1](i) + r.dx[k + 1](i);
    }
  }
  return r;
}

MatSeq riccati_gains(const MatSeq& A, const MatSeq& B, const MatSeq& W, double eps) {
  const int N = static_cast<int>(A.size());
  const int n = static_cast<int>(A.front().rows()), m = static_cast<int>(B.front().cols());
  MatSeq K(N);
  Mat P = W[N];
  for (int k = N - 1; k >= 0; --k) {
    Mat Quu = W[k].bottomRightCorner(m, m) + B[k].transpose() * P * B[k];
    const Mat Qux = W[k].bottomLeftCorner(m, n) + B[k].transpose() * P * A[k];
    Quu = 0.5 * (Quu + Quu.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(Quu);
    if (es.eigenvalues().minCoeff() < eps) Quu = project_psd(Quu, eps);
    K[k] = -Quu.ldlt().solve(Qux);
    P = W[k].topLeftCorner(n, n) + A[k].transpose() * P * A[k] + Qux.transpose() * K[k];
    P = 0.5 * (P + P.transpose()).eval();
  }
  return K;
}

GainSchedule tvlqr_fallback_gains(const ProblemSpec& spec, const Iterate& it, const QPData& data, double eps_psd) {
  const int N = spec.horizon, n = spec.n(), m = spec.m();
  MatSeq W(N + 1);
  for (int k = 0; k < N; ++k) {
    StageExpansion e;
    spec.cost->stage_expansion(k, it.x[k], it.u[k], e);
    Mat H(n + m, n + m);
    H << e.lxx, e.lxu, e.lxu.transpose(), e.luu;
    W[k] = project_psd(0.5 * (H + H.transpose()), eps_psd);
  }
  Vec lx;
  Mat lxx;
  spec.cost->terminal_expansion(it.x[N], lx, lxx);
  W[N] = project_psd(0.5 * (lxx + lxx.transpose()), eps_psd);
  GainSchedule g;
  g.K = riccati_gains(data.A, data.B, W, eps_psd);
  g.source.assign(N, GainSource::tvlqr);
  return g;
}

}  // namespace clsqp
