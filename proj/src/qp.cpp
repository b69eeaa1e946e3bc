#include "clsqp/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace clsqp {

namespace {

double inf_norm(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

void check_finite(const Mat& M, const char* what) {
  if (!M.allFinite()) throw Error(std::string("QP data not finite: ") + what);
}

// Largest step in (0, 1] keeping v + a dv >= (1 - tau) v.
double max_step(const Vec& v, const Vec& dv, double tau) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) a = std::min(a, -tau * v(i) / dv(i));
  }
  return a;
}

struct IpmResult {
  Vec z, mu, lam, s;
  QpStatus status = QpStatus::max_iter;
  double kkt = 0.0;
  int iters = 0;
};

// Primal-dual path following on the KKT system of
//   min 1/2 z'Hz + g'z  s.t.  E z = b,  G z + s = h,  s >= 0.
// `Sys` provides products with H, E, G and a factor/solve pair for
//   [H + G'WG  E'; E  0] [dz; dmu] = [rz; req].
template <class Sys>
IpmResult run_ipm(Sys& sys, const QpOptions& opt, const Vec* z_init) {
  const int nin = sys.nin();
  const Vec& g = sys.g();
  const Vec& b = sys.b();
  const Vec& h = sys.h();
  const double scale_d = 1.0 + inf_norm(g);
  const double scale_p = 1.0 + std::max(inf_norm(b), inf_norm(h));
  const double target = opt.mu_target;

  IpmResult st;
  Vec dz, dmu;
  sys.factor(Vec::Ones(nin));
  if (z_init) {
    st.z = *z_init;
    st.mu = Vec::Zero(sys.neq());
  } else {
    sys.solve(-g + sys.in_tmul(h), b, dz, dmu);
    st.z = dz;
    st.mu = dmu;
  }
  st.s = (h - sys.in_mul(st.z)).cwiseMax(1.0);
  st.lam = Vec::Ones(nin);
  if (target > 0.0) st.lam = st.lam.cwiseMax(target);

  IpmResult best;
  best.kkt = std::numeric_limits<double>::infinity();
  double best_res_p = 0.0;
  int best_it = 0;

  Vec ds, dlam;
  auto direction = [&](const Vec& rd, const Vec& req, const Vec& rin, const Vec& rc) {
    const Vec rz = -rd + sys.in_tmul((rc - st.lam.cwiseProduct(rin)).cwiseQuotient(st.s));
    sys.solve(rz, -req, dz, dmu);
    ds = -rin - sys.in_mul(dz);
    dlam = (-rc - st.lam.cwiseProduct(ds)).cwiseQuotient(st.s);
  };

  for (int it = 0;; ++it) {
    st.iters = it;
    const Vec rd = sys.hess_mul(st.z) + g + sys.eq_tmul(st.mu) + sys.in_tmul(st.lam);
    const Vec req = sys.eq_mul(st.z) - b;
    const Vec rin = sys.in_mul(st.z) + st.s - h;
    double comp = 0.0;
    if (nin > 0) {
      if (target > 0.0) {
        comp = inf_norm((st.s.cwiseProduct(st.lam).array() - target).matrix().cwiseQuotient(st.s)) / scale_d;
      } else {
        comp = st.s.cwiseProduct(st.lam).maxCoeff();
      }
    }
    const double res_p = std::max(inf_norm(req), inf_norm(rin)) / scale_p;
    st.kkt = std::max({inf_norm(rd) / scale_d, res_p, comp});
    if (std::isfinite(st.kkt) && st.kkt < best.kkt) {
      best = st;
      best_res_p = res_p;
      best_it = it;
    }
    if (st.kkt <= opt.tol) {
      st.status = QpStatus::optimal;
      return st;
    }
    // rounding in the Newton systems can make the residual grow again near the solution
    if (!std::isfinite(st.kkt) || it >= opt.max_iter || (it - best_it >= 10 && best.kkt < 1e-6)) {
      if (!std::isfinite(best.kkt)) {
        st.status = QpStatus::max_iter;
        return st;
      }
      best.iters = it;
      best.status = best_res_p > 1e-6 ? QpStatus::infeasible : QpStatus::max_iter;
      if (best.kkt <= opt.tol) best.status = QpStatus::optimal;
      return best;
    }
    // Farkas ray: E'mu + G'lam ~ 0 with b'mu + h'lam < 0 certifies infeasibility.
    const double nl = std::max(inf_norm(st.lam), inf_norm(st.mu));
    if (nl > 1e8) {
      const Vec ray = (sys.eq_tmul(st.mu) + sys.in_tmul(st.lam)) / nl;
      const double val = (b.dot(st.mu) + h.dot(st.lam)) / nl;
      if (inf_norm(ray) < 1e-6 && val < -1e-8) {
        st.status = QpStatus::infeasible;
        return st;
      }
    }

    sys.factor(st.lam.cwiseQuotient(st.s));
    double mu_cur = 0.0;
    Vec rc = Vec::Zero(nin);
    if (nin > 0) {
      mu_cur = st.s.dot(st.lam) / nin;
      rc = st.s.cwiseProduct(st.lam);
      direction(rd, req, rin, rc);
      const double a_aff = std::min(max_step(st.s, ds, 1.0), max_step(st.lam, dlam, 1.0));
      const double mu_aff = (st.s + a_aff * ds).dot(st.lam + a_aff * dlam) / nin;
      const double sigma = std::pow(std::clamp(mu_aff / mu_cur, 0.0, 1.0), 3);
      if (sigma * mu_cur > target) {
        rc = (rc + ds.cwiseProduct(dlam)).array() - sigma * mu_cur;
      } else {
        // pure Newton step onto the target point of the central path
        rc = rc.array() - target;
      }
    }
    direction(rd, req, rin, rc);
    double alpha =
        nin > 0 ? std::min(1.0, std::min(max_step(st.s, ds, 0.995), max_step(st.lam, dlam, 0.995))) : 1.0;
    auto mu_at = [&](double a) { return (st.s + a * ds).dot(st.lam + a * dlam) / nin; };
    if (nin > 0 && target <= 0.0 && std::max(inf_norm(rd) / scale_d, res_p) < mu_cur && mu_at(alpha) > mu_cur) {
      // once feasible, s'l is quadratic in the step and the curvature term dz'H dz can make it grow;
      // fall back to a plain centred step, along which s'l decreases for short steps
      rc = st.s.cwiseProduct(st.lam).array() - 0.5 * mu_cur;
      direction(rd, req, rin, rc);
      alpha = std::min(1.0, std::min(max_step(st.s, ds, 0.995), max_step(st.lam, dlam, 0.995)));
      for (int cut = 0; cut < 30 && mu_at(alpha) > mu_cur; ++cut) alpha *= 0.5;
    }
    st.z += alpha * dz;
    st.mu += alpha * dmu;
    st.s += alpha * ds;
    st.lam += alpha * dlam;
  }
}

class DenseSystem {
 public:
  explicit DenseSystem(const QpInstance& q) : q_(q) {}
  int nz() const { return q_.num_vars(); }
  int neq() const { return q_.num_eq(); }
  int nin() const { return q_.num_ineq(); }
  const Vec& g() const { return q_.g; }
  const Vec& b() const { return q_.b_eq; }
  const Vec& h() const { return q_.h; }
  Vec hess_mul(const Vec& z) const { return q_.H * z; }
  Vec eq_mul(const Vec& z) const { return q_.A_eq * z; }
  Vec eq_tmul(const Vec& mu) const { return q_.A_eq.transpose() * mu; }
  Vec in_mul(const Vec& z) const { return q_.G * z; }
  Vec in_tmul(const Vec& l) const { return q_.G.transpose() * l; }

  void factor(const Vec& w) {
    const int n = nz(), p = neq();
    K_ = Mat::Zero(n + p, n + p);
    K_.topLeftCorner(n, n) = q_.H + q_.G.transpose() * w.asDiagonal() * q_.G;
    K_.topRightCorner(n, p) = q_.A_eq.transpose();
    K_.bottomLeftCorner(p, n) = q_.A_eq;
    lu_.compute(K_);
    if (!(lu_.rcond() > 1e-14)) {
      const double reg = 1e-10 * (1.0 + K_.cwiseAbs().maxCoeff());
      K_.topLeftCorner(n, n).diagonal().array() += reg;
      K_.bottomRightCorner(p, p).diagonal().array() -= reg;
      lu_.compute(K_);
    }
  }

  void solve(const Vec& rz, const Vec& req, Vec& dz, Vec& dmu) const {
    Vec rhs(nz() + neq());
    rhs << rz, req;
    Vec sol = lu_.solve(rhs);
    // one step of iterative refinement
    sol += lu_.solve(rhs - K_ * sol);
    dz = sol.head(nz());
    dmu = sol.tail(neq());
  }

 private:
  const QpInstance& q_;
  Mat K_;
  Eigen::PartialPivLU<Mat> lu_;
};

double dense_kkt_error(const QpInstance& q, const Vec& z, const Vec& mu, const Vec& lam) {
  const double scale_d = 1.0 + inf_norm(q.g);
  const double scale_p = 1.0 + std::max(inf_norm(q.b_eq), inf_norm(q.h));
  const Vec rd = q.H * z + q.g + q.A_eq.transpose() * mu + q.G.transpose() * lam;
  const Vec slack = q.h - q.G * z;
  double res_p = q.num_eq() ? inf_norm(q.A_eq * z - q.b_eq) : 0.0;
  double comp = 0.0;
  for (int i = 0; i < q.num_ineq(); ++i) {
    res_p = std::max(res_p, -slack(i));
    comp = std::max(comp, std::abs(slack(i) * lam(i)));
    if (lam(i) < 0.0) comp = std::max(comp, -lam(i));
  }
  return std::max({inf_norm(rd) / scale_d, res_p / scale_p, comp});
}

// Solve the equality-constrained KKT system on the set {lam_i > s_i} and keep the result when it is
// primal-dual feasible and at least as accurate.
void polish(const QpInstance& q, QpSolution& sol) {
  std::vector<int> act;
  for (int i = 0; i < q.num_ineq(); ++i) {
    if (sol.lambda_ineq(i) > sol.slack(i)) act.push_back(i);
  }
  const int n = q.num_vars(), p = q.num_eq(), a = static_cast<int>(act.size());
  Mat K = Mat::Zero(n + p + a, n + p + a);
  Vec rhs(n + p + a);
  K.topLeftCorner(n, n) = q.H;
  K.block(0, n, n, p) = q.A_eq.transpose();
  K.block(n, 0, p, n) = q.A_eq;
  rhs.head(n) = -q.g;
  rhs.segment(n, p) = q.b_eq;
  for (int j = 0; j < a; ++j) {
    K.block(0, n + p + j, n, 1) = q.G.row(act[j]).transpose();
    K.block(n + p + j, 0, 1, n) = q.G.row(act[j]);
    rhs(n + p + j) = q.h(act[j]);
  }
  Eigen::FullPivLU<Mat> lu(K);
  if (!lu.isInvertible()) return;
  const Vec sol_k = lu.solve(rhs);
  if (!sol_k.allFinite()) return;
  Vec lam = Vec::Zero(q.num_ineq());
  for (int j = 0; j < a; ++j) lam(act[j]) = sol_k(n + p + j);
  const Vec z = sol_k.head(n);
  const Vec mu = sol_k.segment(n, p);
  const double err = dense_kkt_error(q, z, mu, lam);
  if (err <= std::max(sol.kkt_error, 1e-14) || err <= 1e-12) {
    sol.z = z;
    sol.lambda_eq = mu;
    sol.lambda_ineq = lam;
    sol.slack = q.h - q.G * z;
    sol.kkt_error = err;
    sol.polished = true;
  }
}

}  // namespace

std::string to_string(QpStatus status) {
  switch (status) {
    case QpStatus::optimal: return "optimal";
    case QpStatus::infeasible: return "infeasible";
    case QpStatus::max_iter: return "max_iter";
  }
  return "unknown";
}

void QpInstance::validate() const {
  const int n = num_vars();
  if (H.rows() != n || H.cols() != n) throw DimensionError("QP Hessian size mismatch");
  if (A_eq.rows() != num_eq() || (num_eq() > 0 && A_eq.cols() != n)) throw DimensionError("QP equality size mismatch");
  if (G.rows() != num_ineq() || (num_ineq() > 0 && G.cols() != n)) throw DimensionError("QP inequality size mismatch");
  check_finite(H, "H");
  check_finite(g, "g");
  check_finite(A_eq, "A_eq");
  check_finite(b_eq, "b_eq");
  check_finite(G, "G");
  check_finite(h, "h");
}

QpSolution solve_qp(const QpInstance& inst, const QpOptions& opt, const QpSolution* warm_start) {
  inst.validate();
  QpInstance q = inst;
  if (q.A_eq.cols() != q.num_vars()) q.A_eq.resize(q.num_eq(), q.num_vars());
  if (q.G.cols() != q.num_vars()) q.G.resize(q.num_ineq(), q.num_vars());
  DenseSystem sys(q);
  const Vec* z0 = warm_start && warm_start->z.size() == q.num_vars() ? &warm_start->z : nullptr;
  IpmResult r = run_ipm(sys, opt, z0);
  QpSolution sol;
  sol.z = r.z;
  sol.lambda_eq = r.mu;
  sol.lambda_ineq = r.lam;
  sol.slack = q.h - q.G * r.z;
  sol.status = r.status;
  sol.kkt_error = r.kkt;
  sol.iterations = r.iters;
  if (opt.polish && opt.mu_target == 0.0 && r.status != QpStatus::infeasible) {
    polish(q, sol);
    if (sol.polished && sol.kkt_error <= opt.tol) sol.status = QpStatus::optimal;
  }
  sol.objective = q.objective(sol.z);
  return sol;
}

ActiveSetInfo active_set(const QpSolution& sol, const QpInstance& inst, double tol_act) {
  ActiveSetInfo info;
  const Vec slack = inst.h - inst.G * sol.z;
  for (int i = 0; i < inst.num_ineq(); ++i) {
    if (slack(i) <= tol_act) {
      info.indices.push_back(i);
      if (!(sol.lambda_ineq(i) > tol_act)) info.strict_complementarity = false;
    }
  }
  if (!info.indices.empty()) {
    Mat GA(info.indices.size() + inst.num_eq(), inst.num_vars());
    for (std::size_t j = 0; j < info.indices.size(); ++j) GA.row(j) = inst.G.row(info.indices[j]);
    if (inst.num_eq() > 0) GA.bottomRows(inst.num_eq()) = inst.A_eq;
    Eigen::ColPivHouseholderQR<Mat> qr(GA);
    qr.setThreshold(1e-10);
    info.licq = qr.rank() == GA.rows();
  }
  return info;
}

// ---------------------------------------------------------------------------------------------
// Stage-structured problems

int ocp_x_offset(const OcpQp& qp, int k) { return k * (qp.n() + qp.m()); }
int ocp_u_offset(const OcpQp& qp, int k) { return k * (qp.n() + qp.m()) + qp.n(); }

void OcpQp::validate() const {
  const int N = horizon;
  if (N < 1) throw DimensionError("OCP QP horizon must be >= 1");
  const auto sz = [](const auto& v) { return static_cast<int>(v.size()); };
  if (sz(A) != N || sz(B) != N || sz(r) != N) throw DimensionError("OCP QP stage data length mismatch");
  if (sz(Z) != N + 1 || sz(q) != N + 1 || sz(C) != N + 1 || sz(h) != N + 1)
    throw DimensionError("OCP QP stage data length mismatch");
  if (!d.empty() && sz(d) != N) throw DimensionError("OCP QP offset length mismatch");
  const int nx = n(), nu = m();
  for (int k = 0; k <= N; ++k) {
    const int w = k < N ? nx + nu : nx;
    if (Z[k].rows() != w || Z[k].cols() != w) throw DimensionError("OCP QP Hessian block size mismatch");
    if (q[k].size() != nx) throw DimensionError("OCP QP q size mismatch");
    if (C[k].rows() != h[k].size() || (C[k].rows() > 0 && C[k].cols() != w))
      throw DimensionError("OCP QP inequality block size mismatch");
    check_finite(Z[k], "Z");
    check_finite(q[k], "q");
    check_finite(C[k], "C");
    check_finite(h[k], "h");
    if (k < N) {
      if (A[k].rows() != nx || A[k].cols() != nx || B[k].rows() != nx || B[k].cols() != nu || r[k].size() != nu)
        throw DimensionError("OCP QP dynamics size mismatch");
      check_finite(A[k], "A");
      check_finite(B[k], "B");
      check_finite(r[k], "r");
    }
  }
  check_finite(x0, "x0");
}

double OcpQp::objective(const VecSeq& x, const VecSeq& u) const {
  double v = 0.0;
  for (int k = 0; k < horizon; ++k) {
    Vec xu(n() + m());
    xu << x[k], u[k];
    v += 0.5 * xu.dot(Z[k] * xu) + q[k].dot(x[k]) + r[k].dot(u[k]);
  }
  return v + 0.5 * x[horizon].dot(Z[horizon] * x[horizon]) + q[horizon].dot(x[horizon]);
}

namespace {

class RiccatiSystem {
 public:
  explicit RiccatiSystem(const OcpQp& qp) : qp_(qp), N_(qp.horizon), n_(qp.n()), m_(qp.m()) {
    nz_ = N_ * (n_ + m_) + n_;
    row_.resize(N_ + 2, 0);
    for (int k = 0; k <= N_; ++k) row_[k + 1] = row_[k] + static_cast<int>(qp.h[k].size());
    g_.resize(nz_);
    b_.resize((N_ + 1) * n_);
    h_.resize(row_[N_ + 1]);
    for (int k = 0; k <= N_; ++k) {
      g_.segment(xo(k), n_) = qp.q[k];
      if (k < N_) g_.segment(uo(k), m_) = qp.r[k];
      h_.segment(row_[k], qp.h[k].size()) = qp.h[k];
    }
    b_.head(n_) = qp.x0;
    for (int k = 0; k < N_; ++k) b_.segment((k + 1) * n_, n_) = qp.d.empty() ? Vec::Zero(n_) : qp.d[k];
    Hw_.resize(N_ + 1);
    P_.resize(N_ + 1);
    K_.resize(N_);
    Sux_.resize(N_);
    llt_.resize(N_);
  }

  int nz() const { return nz_; }
  int neq() const { return (N_ + 1) * n_; }
  int nin() const { return row_[N_ + 1]; }
  const Vec& g() const { return g_; }
  const Vec& b() const { return b_; }
  const Vec& h() const { return h_; }
  int xo(int k) const { return k * (n_ + m_); }
  int uo(int k) const { return k * (n_ + m_) + n_; }
  int stage_width(int k) const { return k < N_ ? n_ + m_ : n_; }
  int row(int k) const { return row_[k]; }

  Vec hess_mul(const Vec& z) const {
    Vec out(nz_);
    for (int k = 0; k <= N_; ++k) out.segment(xo(k), stage_width(k)) = qp_.Z[k] * z.segment(xo(k), stage_width(k));
    return out;
  }
  Vec eq_mul(const Vec& z) const {
    Vec out(neq());
    out.head(n_) = z.head(n_);
    for (int k = 0; k < N_; ++k) {
      out.segment((k + 1) * n_, n_) =
          z.segment(xo(k + 1), n_) - qp_.A[k] * z.segment(xo(k), n_) - qp_.B[k] * z.segment(uo(k), m_);
    }
    return out;
  }
  Vec eq_tmul(const Vec& mu) const {
    Vec out = Vec::Zero(nz_);
    for (int k = 0; k <= N_; ++k) out.segment(xo(k), n_) += mu.segment(k * n_, n_);
    for (int k = 0; k < N_; ++k) {
      const auto m1 = mu.segment((k + 1) * n_, n_);
      out.segment(xo(k), n_) -= qp_.A[k].transpose() * m1;
      out.segment(uo(k), m_) -= qp_.B[k].transpose() * m1;
    }
    return out;
  }
  Vec in_mul(const Vec& z) const {
    Vec out(nin());
    for (int k = 0; k <= N_; ++k) {
      if (qp_.C[k].rows() == 0) continue;
      out.segment(row_[k], qp_.C[k].rows()) = qp_.C[k] * z.segment(xo(k), stage_width(k));
    }
    return out;
  }
  Vec in_tmul(const Vec& l) const {
    Vec out = Vec::Zero(nz_);
    for (int k = 0; k <= N_; ++k) {
      if (qp_.C[k].rows() == 0) continue;
      out.segment(xo(k), stage_width(k)) = qp_.C[k].transpose() * l.segment(row_[k], qp_.C[k].rows());
    }
    return out;
  }

  void factor(const Vec& w) {
    for (int k = 0; k <= N_; ++k) {
      Hw_[k] = qp_.Z[k];
      const auto& C = qp_.C[k];
      if (C.rows() > 0) Hw_[k].noalias() += C.transpose() * w.segment(row_[k], C.rows()).asDiagonal() * C;
    }
    P_[N_] = Hw_[N_];
    for (int k = N_ - 1; k >= 0; --k) {
      const Mat& A = qp_.A[k];
      const Mat& B = qp_.B[k];
      const Mat PA = P_[k + 1] * A;
      const Mat PB = P_[k + 1] * B;
      Mat Suu = Hw_[k].bottomRightCorner(m_, m_) + B.transpose() * PB;
      Sux_[k] = Hw_[k].bottomLeftCorner(m_, n_) + B.transpose() * PA;
      llt_[k].compute(Suu);
      double reg = 1e-12 * (1.0 + Suu.diagonal().cwiseAbs().maxCoeff());
      while (llt_[k].info() != Eigen::Success) {
        Suu.diagonal().array() += reg;
        reg *= 10.0;
        llt_[k].compute(Suu);
      }
      K_[k] = -llt_[k].solve(Sux_[k]);
      P_[k] = Hw_[k].topLeftCorner(n_, n_) + A.transpose() * PA + Sux_[k].transpose() * K_[k];
      P_[k] = 0.5 * (P_[k] + P_[k].transpose()).eval();
    }
  }

  void solve(const Vec& rz, const Vec& req, Vec& dz, Vec& dmu) const {
    VecSeq kff(N_);
    Vec p = -rz.segment(xo(N_), n_);
    for (int k = N_ - 1; k >= 0; --k) {
      const Vec e = req.segment((k + 1) * n_, n_);
      const Vec pe = p + P_[k + 1] * e;
      const Vec Qu = -rz.segment(uo(k), m_) + qp_.B[k].transpose() * pe;
      const Vec Qx = -rz.segment(xo(k), n_) + qp_.A[k].transpose() * pe;
      kff[k] = -llt_[k].solve(Qu);
      p = Qx + Sux_[k].transpose() * kff[k];
    }
    dz.resize(nz_);
    dz.segment(xo(0), n_) = req.head(n_);
    for (int k = 0; k < N_; ++k) {
      const Vec x = dz.segment(xo(k), n_);
      const Vec u = K_[k] * x + kff[k];
      dz.segment(uo(k), m_) = u;
      dz.segment(xo(k + 1), n_) = qp_.A[k] * x + qp_.B[k] * u + req.segment((k + 1) * n_, n_);
    }
    dmu.resize(neq());
    dmu.segment(N_ * n_, n_) = rz.segment(xo(N_), n_) - Hw_[N_] * dz.segment(xo(N_), n_);
    for (int k = N_ - 1; k >= 0; --k) {
      const Vec hz = Hw_[k].topRows(n_) * dz.segment(xo(k), n_ + m_);
      dmu.segment(k * n_, n_) =
          qp_.A[k].transpose() * dmu.segment((k + 1) * n_, n_) + rz.segment(xo(k), n_) - hz;
    }
  }

 private:
  const OcpQp& qp_;
  int N_, n_, m_, nz_;
  std::vector<int> row_;
  Vec g_, b_, h_;
  MatSeq Hw_, P_, K_, Sux_;
  std::vector<Eigen::LLT<Mat>> llt_;
};

}  // namespace

OcpQpSolution solve_ocp_qp(const OcpQp& qp, const QpOptions& opt) {
  qp.validate();
  RiccatiSystem sys(qp);
  IpmResult r = run_ipm(sys, opt, nullptr);
  OcpQpSolution sol;
  const int N = qp.horizon, n = qp.n(), m = qp.m();
  sol.x.resize(N + 1);
  sol.u.resize(N);
  sol.lambda.resize(N + 1);
  sol.costate.resize(N + 1);
  for (int k = 0; k <= N; ++k) {
    sol.x[k] = r.z.segment(sys.xo(k), n);
    if (k < N) sol.u[k] = r.z.segment(sys.uo(k), m);
    sol.lambda[k] = r.lam.segment(sys.row(k), qp.h[k].size());
    sol.costate[k] = r.mu.segment(k * n, n);
  }
  sol.status = r.status;
  sol.kkt_error = r.kkt;
  sol.iterations = r.iters;
  sol.objective = qp.objective(sol.x, sol.u);
  return sol;
}

QpInstance to_dense(const OcpQp& qp) {
  qp.validate();
  RiccatiSystem sys(qp);
  const int N = qp.horizon, n = qp.n(), m = qp.m();
  QpInstance d;
  const int nz = sys.nz();
  d.H = Mat::Zero(nz, nz);
  d.g = sys.g();
  d.b_eq = sys.b();
  d.h = sys.h();
  d.A_eq = Mat::Zero(sys.neq(), nz);
  d.G = Mat::Zero(sys.nin(), nz);
  d.A_eq.block(0, 0, n, n).setIdentity();
  for (int k = 0; k <= N; ++k) {
    const int w = sys.stage_width(k);
    d.H.block(sys.xo(k), sys.xo(k), w, w) = qp.Z[k];
    if (qp.C[k].rows() > 0) d.G.block(sys.row(k), sys.xo(k), qp.C[k].rows(), w) = qp.C[k];
    if (k < N) {
      const int r0 = (k + 1) * n;
      d.A_eq.block(r0, sys.xo(k + 1), n, n).setIdentity();
      d.A_eq.block(r0, sys.xo(k), n, n) = -qp.A[k];
      d.A_eq.block(r0, sys.uo(k), n, m) = -qp.B[k];
    }
  }
  return d;
}

}  // namespace clsqp
