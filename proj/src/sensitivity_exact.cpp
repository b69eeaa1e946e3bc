#include "clsqp/sensitivity_exact.hpp"

#include <cmath>
#include <limits>

namespace clsqp {

namespace {

double inf_norm(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }
double inf_norm(const Mat& M) { return M.size() ? M.cwiseAbs().rowwise().sum().maxCoeff() : 0.0; }

// Append (row, rhs) unless the row vanishes relative to the scale of the data it came from.
void push_row(std::vector<Vec>& rows, std::vector<double>& rhs, const Vec& row, double h, double scale,
              double prune_tol) {
  if (inf_norm(row) <= prune_tol * (1.0 + scale) && h >= -prune_tol * (1.0 + scale)) return;
  rows.push_back(row);
  rhs.push_back(h);
}

}  // namespace

double CriticalRegion::violation(const Vec& dx) const {
  if (rows() == 0) return -std::numeric_limits<double>::infinity();
  return (G * dx - h).maxCoeff();
}

QpInstance OneStepQp::instance(const Vec& dx) const {
  QpInstance q;
  q.H = Rbar;
  q.g = rbar + Mbar.transpose() * dx;
  q.A_eq.resize(0, Rbar.rows());
  q.b_eq.resize(0);
  q.G = G;
  q.h = h0 - F * dx;
  q.constant = 0.5 * dx.dot(Pxx * dx) + px.dot(dx) + v_next;
  return q;
}

OneStepQp make_one_step_qp(const QPData& d, int k, const CostToGo& next, const CriticalRegion& next_region) {
  const int n = d.n, m = d.m;
  const Mat& A = d.A[k];
  const Mat& B = d.B[k];
  const Mat& Zk = d.Z[k];
  OneStepQp o;
  o.k = k;
  const Mat PB = next.P * B;
  o.Rbar = Zk.bottomRightCorner(m, m) + B.transpose() * PB;
  o.Rbar = 0.5 * (o.Rbar + o.Rbar.transpose()).eval();
  o.Mbar = Zk.topRightCorner(n, m) + A.transpose() * PB;
  o.rbar = d.r[k] + B.transpose() * next.p;
  o.Pxx = Zk.topLeftCorner(n, n) + A.transpose() * next.P * A;
  o.px = d.q[k] + A.transpose() * next.p;
  o.v_next = next.v;
  const int nu = d.control_rows(), nr = next_region.rows();
  o.G.resize(nu + nr, m);
  o.F = Mat::Zero(nu + nr, n);
  o.h0.resize(nu + nr);
  o.G.topRows(nu) = -d.Ju;
  o.h0.head(nu) = d.cu[k];
  if (nr > 0) {
    o.G.bottomRows(nr) = next_region.G * B;
    o.F.bottomRows(nr) = next_region.G * A;
    o.h0.tail(nr) = next_region.h;
  }
  return o;
}

OneStepSolution solve_one_step_qp(const OneStepQp& osq, const Vec& dx, const ExactOptions& opt) {
  const QpInstance inst = osq.instance(dx);
  const QpSolution s = solve_qp(inst, opt.qp);
  OneStepSolution out;
  out.du = s.z;
  out.y = s.lambda_ineq;
  out.status = s.status;
  out.value = s.objective;
  out.kkt_error = s.kkt_error;
  return out;
}

PolicyJacobians kkt_policy_jacobians(const OneStepQp& osq, const OneStepSolution& sol, const Vec& dx,
                                     const ExactOptions& opt) {
  const QpInstance inst = osq.instance(dx);
  const int m = static_cast<int>(osq.Rbar.rows()), n = static_cast<int>(osq.Mbar.rows());
  const int rows = inst.num_ineq();
  const double tol = opt.tol_act * (1.0 + inf_norm(inst.h));
  const Vec slack = inst.h - inst.G * sol.du;

  PolicyJacobians pj;
  std::vector<int> tight;
  for (int i = 0; i < rows; ++i) {
    // rows without control dependence only restrict dx and stay with the region
    if (inst.G.row(i).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + osq.F.row(i).lpNorm<Eigen::Infinity>())) continue;
    if (sol.y(i) > tol) pj.active.push_back(i);
    if (slack(i) <= tol) {
      tight.push_back(i);
      if (!(sol.y(i) > tol)) pj.strict_complementarity = false;
    }
  }
  if (!tight.empty()) {
    Mat GT(tight.size(), m);
    for (std::size_t j = 0; j < tight.size(); ++j) GT.row(j) = inst.G.row(tight[j]);
    Eigen::ColPivHouseholderQR<Mat> qr(GT);
    qr.setThreshold(1e-10);
    pj.licq = qr.rank() == static_cast<Eigen::Index>(tight.size());
  }

  const int a = static_cast<int>(pj.active.size());
  Mat K = Mat::Zero(m + a, m + a);
  K.topLeftCorner(m, m) = osq.Rbar;
  Mat GA(a, m), FA(a, n);
  Vec hA(a);
  for (int j = 0; j < a; ++j) {
    GA.row(j) = inst.G.row(pj.active[j]);
    FA.row(j) = osq.F.row(pj.active[j]);
    hA(j) = inst.h(pj.active[j]);
  }
  K.topRightCorner(m, a) = GA.transpose();
  K.bottomLeftCorner(a, m) = GA;
  Eigen::FullPivLU<Mat> lu(K);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    pj.ok = false;
    return pj;
  }
  Mat rhs(m + a, n);
  rhs.topRows(m) = -osq.Mbar.transpose();
  rhs.bottomRows(a) = -FA;
  const Mat sens = lu.solve(rhs);
  pj.Ku = sens.topRows(m);
  pj.Ky = Mat::Zero(rows, n);
  for (int j = 0; j < a; ++j) pj.Ky.row(pj.active[j]) = sens.row(m + j);

  Vec r0(m + a);
  r0.head(m) = -inst.g;
  r0.tail(a) = hA;
  const Vec s0 = lu.solve(r0);
  Vec y = Vec::Zero(rows);
  for (int j = 0; j < a; ++j) y(pj.active[j]) = s0(m + j);
  const Vec du = s0.head(m);
  const double viol = rows ? (inst.G * du - inst.h).maxCoeff() : 0.0;
  const double ymin = a ? s0.tail(a).minCoeff() : 0.0;
  if (du.allFinite() && viol <= tol && ymin >= -tol) {
    pj.du = du;
    pj.y = y;
  } else {
    pj.du = sol.du;
    pj.y = sol.y;
  }
  return pj;
}

CriticalRegion recurse_region(const QPData& d, int k, const CriticalRegion& next, const Mat& Ku, const Mat& Ky,
                              const Vec& du_ff, const Vec& y_ff, double prune_tol) {
  const Mat& A = d.A[k];
  const Mat& B = d.B[k];
  const Mat Abar = A + B * Ku;
  const double gain_scale = inf_norm(Ku);
  const double abar_scale = inf_norm(Abar);
  std::vector<Vec> rows;
  std::vector<double> rhs;
  for (int i = 0; i < d.state_rows(k); ++i) {
    push_row(rows, rhs, -d.Jx[k].row(i).transpose(), d.cx[k](i), 0.0, prune_tol);
  }
  for (int i = 0; i < d.control_rows(); ++i) {
    const Vec row = -(d.Ju.row(i) * Ku).transpose();
    push_row(rows, rhs, row, d.cu[k](i) + d.Ju.row(i).dot(du_ff), inf_norm(Vec(d.Ju.row(i).transpose())) * gain_scale,
             prune_tol);
  }
  const Vec Bff = B * du_ff;
  for (int i = 0; i < next.rows(); ++i) {
    const Vec gi = next.G.row(i).transpose();
    push_row(rows, rhs, Abar.transpose() * gi, next.h(i) - gi.dot(Bff), inf_norm(gi) * abar_scale, prune_tol);
  }
  for (int i = 0; i < Ky.rows(); ++i) {
    push_row(rows, rhs, -Ky.row(i).transpose(), y_ff(i), 0.0, prune_tol);
  }
  CriticalRegion cr;
  cr.G.resize(rows.size(), d.n);
  cr.h.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    cr.G.row(i) = rows[i].transpose();
    cr.h(i) = rhs[i];
  }
  return cr;
}

CostToGo recurse_cost_to_go(const OneStepQp& o, const CostToGo& next, const Mat& Ku, const Vec& du_ff) {
  CostToGo c;
  const Mat KR = Ku.transpose() * o.Rbar;
  c.P = o.Pxx + KR * Ku + o.Mbar * Ku + Ku.transpose() * o.Mbar.transpose();
  c.P = 0.5 * (c.P + c.P.transpose()).eval();
  c.p = o.px + Ku.transpose() * o.rbar + (KR + o.Mbar) * du_ff;
  c.v = o.rbar.dot(du_ff) + 0.5 * du_ff.dot(o.Rbar * du_ff) + next.v;
  return c;
}

ExactGains backward_pass_exact(const QPData& d, const VecSeq& dx_star, const VecSeq& du_star,
                               const ExactOptions& opt) {
  const int N = d.horizon;
  ExactGains g;
  g.Ku.resize(N);
  g.Ky.resize(N);
  g.du_ff.resize(N);
  g.y_ff.resize(N);
  g.du_hat.resize(N);
  g.regions.resize(N + 1);
  g.cost_to_go.resize(N + 1);
  g.strict_complementarity.assign(N, true);
  g.licq.assign(N, true);
  g.reconstruction_error = Vec::Constant(N, std::numeric_limits<double>::quiet_NaN());
  g.membership_violation = Vec::Constant(N + 1, std::numeric_limits<double>::quiet_NaN());

  g.cost_to_go[N] = {d.Z[N], d.q[N], 0.0};
  g.regions[N] = {-d.Jx[N], d.cx[N]};
  g.membership_violation(N) = g.regions[N].violation(dx_star[N]);
  for (int k = N - 1; k >= 0; --k) {
    const OneStepQp osq = make_one_step_qp(d, k, g.cost_to_go[k + 1], g.regions[k + 1]);
    const OneStepSolution sol = solve_one_step_qp(osq, dx_star[k], opt);
    if (sol.status != QpStatus::optimal) {
      g.failed_step = k;
      g.reason = "one-step QP " + to_string(sol.status);
      return g;
    }
    const PolicyJacobians pj = kkt_policy_jacobians(osq, sol, dx_star[k], opt);
    g.licq[k] = pj.licq;
    g.strict_complementarity[k] = pj.strict_complementarity;
    if (!pj.ok) {
      g.failed_step = k;
      g.reason = "singular KKT system (LICQ)";
      return g;
    }
    g.Ku[k] = pj.Ku;
    g.Ky[k] = pj.Ky;
    g.du_hat[k] = pj.du;
    g.du_ff[k] = pj.du - pj.Ku * dx_star[k];
    g.y_ff[k] = pj.y - pj.Ky * dx_star[k];
    g.regions[k] = recurse_region(d, k, g.regions[k + 1], pj.Ku, pj.Ky, g.du_ff[k], g.y_ff[k], opt.prune_tol);
    g.cost_to_go[k] = recurse_cost_to_go(osq, g.cost_to_go[k + 1], pj.Ku, g.du_ff[k]);
    g.reconstruction_error(k) = (pj.du - du_star[k]).norm();
    g.membership_violation(k) = g.regions[k].violation(dx_star[k]);
  }
  g.ok = true;
  return g;
}

}  // namespace clsqp
