#include "clsqp/sensitivity_barrier.hpp"

#include <cmath>
#include <limits>

namespace clsqp {

namespace {

double inf_norm(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

Vec stage_vec(const VecSeq& x, const VecSeq& u, int k, int N) {
  if (k == N) return x[N];
  Vec z(x[k].size() + u[k].size());
  z << x[k], u[k];
  return z;
}

VecSeq linear_states(const OcpQp& qp, const VecSeq& u) {
  VecSeq x(qp.horizon + 1);
  x[0] = qp.x0;
  for (int k = 0; k < qp.horizon; ++k) {
    x[k + 1] = qp.A[k] * x[k] + qp.B[k] * u[k];
    if (!qp.d.empty()) x[k + 1] += qp.d[k];
  }
  return x;
}

// h_k - C_k z_k for every stage; false when any entry is not strictly positive.
bool slacks(const OcpQp& qp, const VecSeq& x, const VecSeq& u, VecSeq& s) {
  const int N = qp.horizon;
  s.resize(N + 1);
  bool interior = true;
  for (int k = 0; k <= N; ++k) {
    s[k] = qp.h[k] - qp.C[k] * stage_vec(x, u, k, N);
    if (s[k].size() > 0 && !(s[k].minCoeff() > 0.0)) interior = false;
  }
  return interior;
}

double barrier_value(const OcpQp& qp, const VecSeq& x, const VecSeq& u, const VecSeq& s, double gamma) {
  double v = qp.objective(x, u);
  for (const Vec& sk : s) v -= gamma * sk.array().log().sum();
  return v;
}

void gradient_hessian(const OcpQp& qp, const VecSeq& x, const VecSeq& u, const VecSeq& s, double gamma,
                      bool parallel, VecSeq& g, MatSeq& H) {
  const int N = qp.horizon;
  g.resize(N + 1);
  H.resize(N + 1);
#pragma omp parallel for schedule(static) if (parallel)
  for (int k = 0; k <= N; ++k) {
    const Vec z = stage_vec(x, u, k, N);
    Vec lin(z.size());
    if (k < N) {
      lin << qp.q[k], qp.r[k];
    } else {
      lin = qp.q[k];
    }
    g[k] = qp.Z[k] * z + lin;
    H[k] = qp.Z[k];
    if (s[k].size() > 0) {
      const Vec inv = s[k].cwiseInverse();
      g[k] += gamma * qp.C[k].transpose() * inv;
      H[k] += gamma * qp.C[k].transpose() * inv.cwiseAbs2().asDiagonal() * qp.C[k];
    }
  }
}

double reduced_gradient_norm(const OcpQp& qp, const VecSeq& g) {
  const int N = qp.horizon, n = qp.n(), m = qp.m();
  Vec lam = g[N];
  double v = 0.0;
  for (int k = N - 1; k >= 0; --k) {
    v = std::max(v, inf_norm(Vec(g[k].tail(m) + qp.B[k].transpose() * lam)));
    lam = g[k].head(n) + qp.A[k].transpose() * lam;
  }
  return v;
}

// Newton direction of the equality-constrained LQ model with dx_0 = 0.
void lq_direction(const OcpQp& qp, const MatSeq& H, const VecSeq& g, VecSeq& ddx, VecSeq& ddu) {
  const int N = qp.horizon, n = qp.n(), m = qp.m();
  MatSeq K(N);
  VecSeq kff(N);
  Mat P = H[N];
  Vec p = g[N];
  for (int k = N - 1; k >= 0; --k) {
    const Mat& A = qp.A[k];
    const Mat& B = qp.B[k];
    Mat Quu = H[k].bottomRightCorner(m, m) + B.transpose() * P * B;
    const Mat Qux = H[k].bottomLeftCorner(m, n) + B.transpose() * P * A;
    const Vec Qu = g[k].tail(m) + B.transpose() * p;
    Eigen::LDLT<Mat> ldlt(0.5 * (Quu + Quu.transpose()));
    K[k] = -ldlt.solve(Qux);
    kff[k] = -ldlt.solve(Qu);
    p = g[k].head(n) + A.transpose() * p + Qux.transpose() * kff[k];
    P = H[k].topLeftCorner(n, n) + A.transpose() * P * A + Qux.transpose() * K[k];
    P = 0.5 * (P + P.transpose()).eval();
  }
  ddx.assign(N + 1, Vec::Zero(n));
  ddu.resize(N);
  for (int k = 0; k < N; ++k) {
    ddu[k] = K[k] * ddx[k] + kff[k];
    ddx[k + 1] = qp.A[k] * ddx[k] + qp.B[k] * ddu[k];
  }
}

}  // namespace

BarrierSolution solve_barrier_ilqr(const OcpQp& qp, const VecSeq& du_init, const BarrierOptions& opt) {
  qp.validate();
  const int N = qp.horizon;
  const double gamma = opt.gamma;
  double scale = 1.0;
  for (int k = 0; k <= N; ++k) {
    scale = std::max(scale, 1.0 + inf_norm(qp.q[k]));
    if (k < N) scale = std::max(scale, 1.0 + inf_norm(qp.r[k]));
  }

  BarrierSolution sol;
  bool interior = false;
  if (static_cast<int>(du_init.size()) == N) {
    sol.u = du_init;
    sol.x = linear_states(qp, sol.u);
    interior = slacks(qp, sol.x, sol.u, sol.slack);
  }
  if (!interior) {
    sol.interior_fallback = true;
    QpOptions qo;
    qo.tol = 1e-9;
    qo.max_iter = 300;
    qo.polish = false;
    qo.mu_target = gamma;
    const OcpQpSolution ip = solve_ocp_qp(qp, qo);
    sol.u = ip.u;
    sol.x = linear_states(qp, sol.u);
    if (!slacks(qp, sol.x, sol.u, sol.slack)) return sol;
  }

  VecSeq g, ddx, ddu, s_new;
  MatSeq H;
  for (int it = 0;; ++it) {
    sol.iterations = it;
    gradient_hessian(qp, sol.x, sol.u, sol.slack, gamma, opt.parallel, g, H);
    sol.stationarity = reduced_gradient_norm(qp, g) / scale;
    if (sol.stationarity <= opt.tol) {
      sol.converged = true;
      break;
    }
    if (it >= opt.max_iter) break;
    lq_direction(qp, H, g, ddx, ddu);
    double slope = 0.0;
    for (int k = 0; k <= N; ++k) slope += g[k].dot(stage_vec(ddx, ddu, k, N));
    if (!(slope < 0.0)) break;
    double amax = 1.0;
    for (int k = 0; k <= N; ++k) {
      if (sol.slack[k].size() == 0) continue;
      const Vec dc = qp.C[k] * stage_vec(ddx, ddu, k, N);
      for (Eigen::Index i = 0; i < dc.size(); ++i) {
        if (dc(i) > 0.0) amax = std::min(amax, 0.99 * sol.slack[k](i) / dc(i));
      }
    }
    const double f0 = barrier_value(qp, sol.x, sol.u, sol.slack, gamma);
    double alpha = amax;
    bool accepted = false;
    VecSeq x_new(N + 1), u_new(N);
    for (int bt = 0; bt < 60; ++bt) {
      for (int k = 0; k <= N; ++k) x_new[k] = sol.x[k] + alpha * ddx[k];
      for (int k = 0; k < N; ++k) u_new[k] = sol.u[k] + alpha * ddu[k];
      if (slacks(qp, x_new, u_new, s_new)) {
        const double f = barrier_value(qp, x_new, u_new, s_new, gamma);
        if (f <= f0 + 1e-4 * alpha * slope) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    sol.x = std::move(x_new);
    sol.u = std::move(u_new);
    sol.slack = s_new;
  }
  sol.ok = sol.converged || sol.stationarity <= 1e-6;
  return sol;
}

VecSeq box_center_shift(const QPData& d) {
  const int N = d.horizon, m = d.m;
  VecSeq shift(N, Vec::Zero(m));
  for (int j = 0; j < m; ++j) {
    int lo = -1, hi = -1;
    for (int i = 0; i < d.control_rows(); ++i) {
      if ((d.Ju.row(i).array() != 0.0).count() != 1) continue;
      if (d.Ju(i, j) > 0.0) lo = i;
      if (d.Ju(i, j) < 0.0) hi = i;
    }
    if (lo < 0 || hi < 0) continue;
    for (int k = 0; k < N; ++k) {
      shift[k](j) = 0.5 * (d.cu[k](hi) / -d.Ju(hi, j) - d.cu[k](lo) / d.Ju(lo, j));
    }
  }
  return shift;
}

BarrierGains barrier_gains(const QPData& d, const VecSeq& dx_star, const VecSeq& du_star, const BarrierOptions& opt) {
  const int N = d.horizon, n = d.n, m = d.m;
  BarrierGains out;
  const OcpQp qp = to_ocp_qp(d);
  const VecSeq center = box_center_shift(d);
  VecSeq init(N);
  for (int k = 0; k < N; ++k) init[k] = (1.0 - opt.theta) * du_star[k] + opt.theta * center[k];
  out.solution = solve_barrier_ilqr(qp, init, opt);
  if (!out.solution.ok) {
    out.message = "barrier solve failed (stationarity " + std::to_string(out.solution.stationarity) + ")";
    return out;
  }
  const BarrierSolution& sol = out.solution;

  VecSeq g;
  MatSeq H;
  gradient_hessian(qp, sol.x, sol.u, sol.slack, opt.gamma, opt.parallel, g, H);

  // Serial sweep: P_k and the half-solved blocks W_k = L_k^{-1} Qux_k, Quu_k = L_k L_k'.
  std::vector<Eigen::LLT<Mat>> llt(N);
  MatSeq W(N);
  Mat P = H[N];
  for (int k = N - 1; k >= 0; --k) {
    const Mat& A = d.A[k];
    const Mat& B = d.B[k];
    const Mat PB = P * B;
    Mat Quu = H[k].bottomRightCorner(m, m) + B.transpose() * PB;
    Quu = 0.5 * (Quu + Quu.transpose()).eval();
    const Mat Qux = H[k].bottomLeftCorner(m, n) + PB.transpose() * A;
    llt[k].compute(Quu);
    double reg = 1e-12 * (1.0 + Quu.diagonal().cwiseAbs().maxCoeff());
    while (llt[k].info() != Eigen::Success) {
      Quu.diagonal().array() += reg;
      reg *= 10.0;
      llt[k].compute(Quu);
    }
    W[k] = llt[k].matrixL().solve(Qux);
    P = H[k].topLeftCorner(n, n) + A.transpose() * P * A - W[k].transpose() * W[k];
    P = 0.5 * (P + P.transpose()).eval();
  }

  out.K.resize(N);
  out.reconstruction_error.resize(N);
#pragma omp parallel for schedule(static) if (opt.parallel)
  for (int k = 0; k < N; ++k) {
    out.K[k] = -llt[k].matrixU().solve(W[k]);
    out.reconstruction_error(k) =
        (sol.u[k] + out.K[k] * (dx_star[k] - sol.x[k]) - du_star[k]).norm();
  }
  out.ok = true;
  for (const Mat& K : out.K) {
    if (!K.allFinite()) {
      out.ok = false;
      out.message = "non-finite barrier gain";
    }
  }
  return out;
}

Vec anchored_barrier_control(const QPData& d, int k, const Vec& dx, const BarrierOptions& opt) {
  const OcpQp qp = build_tail_qp(d, k, dx);
  const BarrierSolution sol = solve_barrier_ilqr(qp, {}, opt);
  if (!sol.ok) throw Error("anchored barrier solve failed at step " + std::to_string(k));
  return sol.u[0];
}

}  // namespace clsqp
