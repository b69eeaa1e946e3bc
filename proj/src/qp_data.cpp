#include "clsqp/qp_data.hpp"

#include <Eigen/Eigenvalues>

namespace clsqp {

namespace {

const Vec& shift_at(const Iterate& it, int k) {
  static const Vec empty;
  return it.chart.empty() ? empty : it.chart[k];
}

struct FirstOrder {
  MatSeq A, B, Jx;
  VecSeq cx, lx, lu;
  Mat Ju;
};

// Jacobians, constraint values and cost gradients at every step.
void linearize(const ProblemSpec& spec, const Iterate& it, bool parallel, FirstOrder& out,
               MatSeq* cost_hessians) {
  const int N = spec.horizon;
  out.A.resize(N);
  out.B.resize(N);
  out.Jx.resize(N + 1);
  out.cx.resize(N + 1);
  out.lx.resize(N + 1);
  out.lu.resize(N);
  out.Ju = spec.control_constraint_jacobian();
  if (cost_hessians) cost_hessians->resize(N + 1);
  const int n = spec.n(), m = spec.m();
#pragma omp parallel for schedule(static) if (parallel)
  for (int k = 0; k <= N; ++k) {
    const Vec& shift = shift_at(it, k);
    out.cx[k] = spec.state_constraints_at(k, it.x[k], shift);
    out.Jx[k] = spec.state_constraint_jacobian(k, it.x[k], shift);
    if (k < N) {
      spec.dynamics->jacobians(k, it.x[k], it.u[k], out.A[k], out.B[k]);
      StageExpansion e;
      spec.cost->stage_expansion(k, it.x[k], it.u[k], e);
      out.lx[k] = e.lx;
      out.lu[k] = e.lu;
      if (cost_hessians) {
        Mat H(n + m, n + m);
        H << e.lxx, e.lxu, e.lxu.transpose(), e.luu;
        (*cost_hessians)[k] = H;
      }
    } else {
      Mat lxx;
      spec.cost->terminal_expansion(it.x[k], out.lx[k], lxx);
      if (cost_hessians) (*cost_hessians)[k] = lxx;
    }
  }
}

// nu_N = grad l_N - Jx_N' y_N,  nu_k = grad_x l_k - Jx_k' y^x_k + A_k' nu_{k+1}.
VecSeq adjoint(const ProblemSpec& spec, const Iterate& it, const FirstOrder& fo) {
  const int N = spec.horizon;
  VecSeq nu(N + 1);
  auto yx = [&](int k) { return it.y[k].head(fo.cx[k].size()); };
  nu[N] = fo.lx[N] - fo.Jx[N].transpose() * yx(N);
  for (int k = N - 1; k >= 0; --k) nu[k] = fo.lx[k] - fo.Jx[k].transpose() * yx(k) + fo.A[k].transpose() * nu[k + 1];
  return nu;
}

}  // namespace

Mat project_psd(const Mat& Z, double eps) {
  if (Z.rows() != Z.cols()) throw DimensionError("project_psd needs a square matrix");
  const double scale = 1.0 + Z.cwiseAbs().maxCoeff();
  if ((Z - Z.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) throw Error("project_psd needs a symmetric matrix");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (Z + Z.transpose()));
  const Vec d = es.eigenvalues().cwiseMax(eps);
  Mat out = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

QPData build_qp_data(const ProblemSpec& spec, const Iterate& it, const QpDataOptions& opt) {
  const int N = spec.horizon, n = spec.n(), m = spec.m();
  FirstOrder fo;
  MatSeq H;
  linearize(spec, it, opt.parallel, fo, &H);
  QPData d;
  d.horizon = N;
  d.n = n;
  d.m = m;
  d.mode = opt.mode;
  d.nu = adjoint(spec, it, fo);
  d.A = std::move(fo.A);
  d.B = std::move(fo.B);
  d.Jx = std::move(fo.Jx);
  d.cx = std::move(fo.cx);
  d.Ju = std::move(fo.Ju);
  d.q = std::move(fo.lx);
  d.r = std::move(fo.lu);
  d.cu.resize(N);
  d.Z.resize(N + 1);
  d.Z_raw.resize(N + 1);
  for (int k = 0; k < N; ++k) d.cu[k] = spec.control_constraints_at(it.u[k]);
  for (int k = 0; k <= N; ++k) {
    for (int i = 0; i < d.nu[k].size(); ++i) {
      if (!std::isfinite(d.nu[k](i))) throw Error("non-finite adjoint at step " + std::to_string(k));
    }
  }

#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (int k = 0; k <= N; ++k) {
    Mat Zk = std::move(H[k]);
    const Vec yx = it.y[k].head(d.cx[k].size());
    Mat Hxx = Mat::Zero(n, n);
    spec.add_state_constraint_hessian(k, it.x[k], shift_at(it, k), -yx, Hxx);
    Zk.topLeftCorner(n, n) += Hxx;
    if (k < N && opt.mode == HessianMode::full) {
      Zk += spec.dynamics->weighted_hessian(k, it.x[k], it.u[k], d.nu[k + 1]);
    }
    Zk = 0.5 * (Zk + Zk.transpose()).eval();
    d.Z_raw[k] = Zk;
    d.Z[k] = opt.project ? project_psd(Zk, opt.eps_psd) : Zk;
  }
  for (int k = 0; k <= N; ++k) {
    if (!d.Z[k].allFinite()) throw Error("non-finite Hessian block at step " + std::to_string(k));
  }
  return d;
}

OcpQp to_ocp_qp(const QPData& d) { return build_tail_qp(d, 0, Vec::Zero(d.n)); }

OcpQp build_tail_qp(const QPData& d, int k0, const Vec& dx) {
  if (k0 < 0 || k0 >= d.horizon) throw DimensionError("tail start out of range");
  const int N = d.horizon, n = d.n, m = d.m;
  const int nu = d.control_rows();
  OcpQp qp;
  qp.horizon = N - k0;
  qp.x0 = dx;
  for (int k = k0; k <= N; ++k) {
    qp.Z.push_back(d.Z[k]);
    qp.q.push_back(d.q[k]);
    const int nx = d.state_rows(k);
    if (k < N) {
      qp.A.push_back(d.A[k]);
      qp.B.push_back(d.B[k]);
      qp.d.push_back(Vec::Zero(n));
      qp.r.push_back(d.r[k]);
      Mat C = Mat::Zero(nx + nu, n + m);
      C.topLeftCorner(nx, n) = -d.Jx[k];
      C.bottomRightCorner(nu, m) = -d.Ju;
      Vec h(nx + nu);
      h << d.cx[k], d.cu[k];
      qp.C.push_back(std::move(C));
      qp.h.push_back(std::move(h));
    } else {
      qp.C.push_back(-d.Jx[k]);
      qp.h.push_back(d.cx[k]);
    }
  }
  return qp;
}

VecSeq reduced_objective_gradient(const QPData& d) {
  const int N = d.horizon;
  VecSeq g(N);
  Vec lam = d.q[N];
  for (int k = N - 1; k >= 0; --k) {
    g[k] = d.r[k] + d.B[k].transpose() * lam;
    lam = d.q[k] + d.A[k].transpose() * lam;
  }
  return g;
}

VecSeq hamiltonian_control_gradients(const ProblemSpec& spec, const Iterate& it) {
  FirstOrder fo;
  linearize(spec, it, false, fo, nullptr);
  const VecSeq nu = adjoint(spec, it, fo);
  const int N = spec.horizon;
  VecSeq g(N);
  for (int k = 0; k < N; ++k) {
    const Vec yu = it.y[k].tail(fo.Ju.rows());
    g[k] = fo.lu[k] - fo.Ju.transpose() * yu + fo.B[k].transpose() * nu[k + 1];
  }
  return g;
}

VecSeq linear_rollout(const QPData& d, const VecSeq& du) {
  VecSeq dx(d.horizon + 1);
  dx[0] = Vec::Zero(d.n);
  for (int k = 0; k < d.horizon; ++k) dx[k + 1] = d.A[k] * dx[k] + d.B[k] * du[k];
  return dx;
}

}  // namespace clsqp
