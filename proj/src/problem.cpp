#include "clsqp/problem.hpp"

#include "clsqp/qp_data.hpp"

#include <cmath>
#include <numbers>

namespace clsqp {

QuadraticCost::QuadraticCost(MatSeq Q, MatSeq R, Mat QN, Vec x_ref, Vec u_ref, Vec x_goal, MatSeq S)
    : Q_(std::move(Q)),
      R_(std::move(R)),
      S_(std::move(S)),
      QN_(std::move(QN)),
      x_ref_(std::move(x_ref)),
      u_ref_(std::move(u_ref)),
      x_goal_(std::move(x_goal)) {
  if (Q_.empty() || R_.empty()) throw DimensionError("QuadraticCost needs Q and R");
}

double QuadraticCost::stage(int k, const Vec& x, const Vec& u) const {
  const Vec dx = x - x_ref_;
  const Vec du = u - u_ref_;
  double v = 0.5 * dx.dot(at(Q_, k) * dx) + 0.5 * du.dot(at(R_, k) * du);
  if (!S_.empty()) v += dx.dot(at(S_, k) * du);
  return v;
}

double QuadraticCost::terminal(const Vec& x) const {
  const Vec dx = x - x_goal_;
  return 0.5 * dx.dot(QN_ * dx);
}

void QuadraticCost::stage_expansion(int k, const Vec& x, const Vec& u, StageExpansion& out) const {
  const Vec dx = x - x_ref_;
  const Vec du = u - u_ref_;
  out.lxx = at(Q_, k);
  out.luu = at(R_, k);
  out.lx = out.lxx * dx;
  out.lu = out.luu * du;
  if (!S_.empty()) {
    out.lxu = at(S_, k);
    out.lx += out.lxu * du;
    out.lu += out.lxu.transpose() * dx;
  } else {
    out.lxu = Mat::Zero(x.size(), u.size());
  }
}

void QuadraticCost::terminal_expansion(const Vec& x, Vec& lx, Mat& lxx) const {
  lxx = QN_;
  lx = QN_ * (x - x_goal_);
}

StateBounds::StateBounds(std::vector<int> index, Vec lower, Vec upper, int first_step, int last_step)
    : StateConstraint(first_step, last_step) {
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (std::isfinite(lower(i))) rows_.push_back({index[i], lower(i), 1.0});
  }
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (std::isfinite(upper(i))) rows_.push_back({index[i], upper(i), -1.0});
  }
}

void StateBounds::value(const Vec& x, const Vec&, Eigen::Ref<Vec> c) const {
  for (std::size_t r = 0; r < rows_.size(); ++r) c(r) = rows_[r].sign * (x(rows_[r].index) - rows_[r].bound);
}

void StateBounds::jacobian(const Vec&, const Vec&, Eigen::Ref<Mat> J) const {
  J.setZero();
  for (std::size_t r = 0; r < rows_.size(); ++r) J(r, rows_[r].index) = rows_[r].sign;
}

Mat SelectPoint::jacobian(const Vec&) const {
  Mat J = Mat::Zero(2, n_);
  J(0, i_) = 1.0;
  J(1, j_) = 1.0;
  return J;
}

Eigen::Vector2d PendulumPoint::point(const Vec& x) const {
  return {x(ix_) + length_ * std::sin(x(iphi_)), x(iz_) - length_ * std::cos(x(iphi_))};
}

Mat PendulumPoint::jacobian(const Vec& x) const {
  Mat J = Mat::Zero(2, n_);
  J(0, ix_) = 1.0;
  J(1, iz_) = 1.0;
  J(0, iphi_) = length_ * std::cos(x(iphi_));
  J(1, iphi_) = length_ * std::sin(x(iphi_));
  return J;
}

Mat PendulumPoint::weighted_hessian(const Vec& x, const Eigen::Vector2d& w) const {
  Mat H = Mat::Zero(n_, n_);
  H(iphi_, iphi_) = -w(0) * length_ * std::sin(x(iphi_)) + w(1) * length_ * std::cos(x(iphi_));
  return H;
}

void DiscAvoidance::value(const Vec& x, const Vec&, Eigen::Ref<Vec> c) const {
  c(0) = (point_->point(x) - center_).norm() - radius_;
}

void DiscAvoidance::jacobian(const Vec& x, const Vec&, Eigen::Ref<Mat> J) const {
  const Eigen::Vector2d d = point_->point(x) - center_;
  J.row(0) = (d / d.norm()).transpose() * point_->jacobian(x);
}

void DiscAvoidance::add_weighted_hessian(const Vec& x, const Vec&, const Vec& w, Mat& H) const {
  const Eigen::Vector2d d = point_->point(x) - center_;
  const double r = d.norm();
  const Mat Jp = point_->jacobian(x);
  const Eigen::Matrix2d curv = (Eigen::Matrix2d::Identity() - d * d.transpose() / (r * r)) / r;
  H += w(0) * (Jp.transpose() * curv * Jp + point_->weighted_hessian(x, d / r));
}

Vec GoalBall::difference(const Vec& x) const {
  Vec e = x - goal_;
  for (int i : angular_) e(i) = wrap_to_pi(e(i));
  return e;
}

void GoalBall::value(const Vec& x, const Vec&, Eigen::Ref<Vec> c) const {
  c(0) = radius_ * radius_ - difference(x).squaredNorm();
}

void GoalBall::jacobian(const Vec& x, const Vec&, Eigen::Ref<Mat> J) const {
  J.row(0) = -2.0 * difference(x).transpose();
}

void GoalBall::add_weighted_hessian(const Vec& x, const Vec&, const Vec& w, Mat& H) const {
  H.diagonal().array() -= 2.0 * w(0);
  (void)x;
}

void AngleWindow::value(const Vec& x, const Vec& shift, Eigen::Ref<Vec> c) const {
  constexpr double pi = std::numbers::pi;
  for (std::size_t j = 0; j < angular_.size(); ++j) {
    const double delta = shift.size() > 0 ? shift(j) : 0.0;
    const double q = chart_representative(x(angular_[j]), delta);
    c(2 * j) = q - (delta - pi);
    c(2 * j + 1) = (delta + pi) - q;
  }
}

void AngleWindow::jacobian(const Vec&, const Vec&, Eigen::Ref<Mat> J) const {
  J.setZero();
  for (std::size_t j = 0; j < angular_.size(); ++j) {
    J(2 * j, angular_[j]) = 1.0;
    J(2 * j + 1, angular_[j]) = -1.0;
  }
}

void ProblemSpec::validate() const {
  if (horizon < 1) throw Error("horizon must be >= 1");
  if (!dynamics) throw Error("problem has no dynamics model");
  if (!cost) throw Error("problem has no cost model");
  if (x0.size() != n()) throw DimensionError("x0 dimension does not match the dynamics");
  if (u_lower.size() != m() || u_upper.size() != m()) throw DimensionError("control bound dimension mismatch");
  for (int i = 0; i < m(); ++i) {
    if (!(u_lower(i) < u_upper(i))) throw Error("control bounds must satisfy lower < upper");
  }
  if (!x0.allFinite()) throw Error("x0 must be finite");
}

int ProblemSpec::state_constraint_dim(int k) const {
  int d = 0;
  for (const auto& c : state_constraints) {
    if (c->applies(k, horizon)) d += c->dim();
  }
  return d;
}

int ProblemSpec::control_constraint_dim() const {
  int d = 0;
  for (int i = 0; i < m(); ++i) d += std::isfinite(u_lower(i)) + std::isfinite(u_upper(i));
  return d;
}

Vec ProblemSpec::state_constraints_at(int k, const Vec& x, const Vec& shift) const {
  Vec c(state_constraint_dim(k));
  int row = 0;
  for (const auto& con : state_constraints) {
    if (!con->applies(k, horizon)) continue;
    con->value(x, shift, c.segment(row, con->dim()));
    row += con->dim();
  }
  return c;
}

Mat ProblemSpec::state_constraint_jacobian(int k, const Vec& x, const Vec& shift) const {
  Mat J = Mat::Zero(state_constraint_dim(k), n());
  int row = 0;
  for (const auto& con : state_constraints) {
    if (!con->applies(k, horizon)) continue;
    con->jacobian(x, shift, J.middleRows(row, con->dim()));
    row += con->dim();
  }
  return J;
}

void ProblemSpec::add_state_constraint_hessian(int k, const Vec& x, const Vec& shift, const Vec& w,
                                               Mat& H) const {
  int row = 0;
  for (const auto& con : state_constraints) {
    if (!con->applies(k, horizon)) continue;
    con->add_weighted_hessian(x, shift, w.segment(row, con->dim()), H);
    row += con->dim();
  }
}

Vec ProblemSpec::control_constraints_at(const Vec& u) const {
  Vec c(control_constraint_dim());
  int row = 0;
  for (int i = 0; i < m(); ++i) {
    if (std::isfinite(u_lower(i))) c(row++) = u(i) - u_lower(i);
  }
  for (int i = 0; i < m(); ++i) {
    if (std::isfinite(u_upper(i))) c(row++) = u_upper(i) - u(i);
  }
  return c;
}

Mat ProblemSpec::control_constraint_jacobian() const {
  Mat J = Mat::Zero(control_constraint_dim(), m());
  int row = 0;
  for (int i = 0; i < m(); ++i) {
    if (std::isfinite(u_lower(i))) J(row++, i) = 1.0;
  }
  for (int i = 0; i < m(); ++i) {
    if (std::isfinite(u_upper(i))) J(row++, i) = -1.0;
  }
  return J;
}

Iterate Iterate::from_controls(const ProblemSpec& spec, VecSeq u) {
  Iterate it;
  it.x = rollout_open_loop(spec, u);
  it.u = std::move(u);
  const int N = spec.horizon;
  const auto angular = spec.dynamics->angular_dims();
  it.y.resize(N + 1);
  it.s.resize(N + 1);
  it.chart.resize(N + 1);
  for (int k = 0; k <= N; ++k) {
    it.y[k] = Vec::Zero(spec.constraint_dim(k));
    it.s[k] = Vec::Zero(spec.constraint_dim(k));
    it.chart[k] = Vec::Zero(static_cast<Eigen::Index>(angular.size()));
    for (std::size_t j = 0; j < angular.size(); ++j) it.chart[k](j) = wrap_to_pi(it.x[k](angular[j]));
  }
  it.rho = Vec::Zero(N + 1);
  return it;
}

VecSeq rollout_open_loop(const ProblemSpec& spec, const VecSeq& u) {
  const int N = spec.horizon;
  if (static_cast<int>(u.size()) != N) throw DimensionError("control sequence length must equal the horizon");
  VecSeq x(N + 1);
  x[0] = spec.x0;
  for (int k = 0; k < N; ++k) {
    x[k + 1] = spec.dynamics->step(k, x[k], u[k]);
    if (!x[k + 1].allFinite()) throw DivergedRollout(k + 1);
  }
  return x;
}

double evaluate_objective(const ProblemSpec& spec, const VecSeq& x, const VecSeq& u) {
  const int N = spec.horizon;
  if (static_cast<int>(x.size()) != N + 1 || static_cast<int>(u.size()) != N)
    throw DimensionError("trajectory length does not match the horizon");
  double J = 0.0;
  for (int k = 0; k < N; ++k) J += spec.cost->stage(k, x[k], u[k]);
  return J + spec.cost->terminal(x[N]);
}

namespace {
const Vec& chart_at(const VecSeq& chart, int k) {
  static const Vec empty;
  return chart.empty() ? empty : chart[k];
}
}  // namespace

VecSeq evaluate_constraints(const ProblemSpec& spec, const VecSeq& x, const VecSeq& u, const VecSeq& chart) {
  const int N = spec.horizon;
  if (static_cast<int>(x.size()) != N + 1 || static_cast<int>(u.size()) != N)
    throw DimensionError("trajectory length does not match the horizon");
  VecSeq c(N + 1);
  for (int k = 0; k <= N; ++k) {
    const Vec cx = spec.state_constraints_at(k, x[k], chart_at(chart, k));
    if (k < N) {
      const Vec cu = spec.control_constraints_at(u[k]);
      c[k].resize(cx.size() + cu.size());
      c[k] << cx, cu;
    } else {
      c[k] = cx;
    }
  }
  return c;
}

double min_state_constraint(const ProblemSpec& spec, const VecSeq& x, const VecSeq& chart) {
  double v = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= spec.horizon; ++k) {
    const Vec cx = spec.state_constraints_at(k, x[k], chart_at(chart, k));
    if (cx.size() > 0) v = std::min(v, cx.minCoeff());
  }
  return v;
}

KKTResiduals kkt_residuals(const ProblemSpec& spec, const Iterate& it) {
  KKTResiduals r;
  r.min_primal = std::numeric_limits<double>::infinity();
  r.min_dual = std::numeric_limits<double>::infinity();
  const VecSeq c = evaluate_constraints(spec, it.x, it.u, it.chart);
  for (int k = 0; k <= spec.horizon; ++k) {
    if (c[k].size() == 0) continue;
    r.min_primal = std::min(r.min_primal, c[k].minCoeff());
    r.min_dual = std::min(r.min_dual, it.y[k].minCoeff());
    r.max_complementarity = std::max(r.max_complementarity, c[k].cwiseProduct(it.y[k]).cwiseAbs().maxCoeff());
  }
  if (!std::isfinite(r.min_primal)) r.min_primal = 0.0;
  if (!std::isfinite(r.min_dual)) r.min_dual = 0.0;
  const VecSeq grad = hamiltonian_control_gradients(spec, it);
  for (const Vec& g : grad) r.max_stationarity = std::max(r.max_stationarity, g.cwiseAbs().maxCoeff());
  return r;
}

}  // namespace clsqp
