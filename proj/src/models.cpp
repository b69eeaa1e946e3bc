#include "clsqp/models.hpp"

#include <unsupported/Eigen/AutoDiff>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace clsqp {

namespace {

using AD = Eigen::AutoDiffScalar<Eigen::VectorXd>;
template <typename T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

// Gaussian elimination for the small SPD mass matrices; works for AD scalars.
template <typename T>
VecT<T> solve_spd_small(MatT<T> M, VecT<T> b) {
  const int n = static_cast<int>(b.size());
  for (int c = 0; c < n; ++c) {
    for (int r = c + 1; r < n; ++r) {
      const T f = M(r, c) / M(c, c);
      for (int j = c; j < n; ++j) M(r, j) -= f * M(c, j);
      b(r) -= f * b(c);
    }
  }
  VecT<T> x(n);
  for (int r = n - 1; r >= 0; --r) {
    T acc = b(r);
    for (int j = r + 1; j < n; ++j) acc -= M(r, j) * x(j);
    x(r) = acc / M(r, r);
  }
  return x;
}

template <typename T>
VecT<T> acrobot_field(const AcrobotParams& p, const VecT<T>& x, const VecT<T>& u) {
  using std::cos;
  using std::sin;
  const T c2 = cos(x(1));
  const T s1 = sin(x(0));
  const T s2 = sin(x(1));
  const T s12 = sin(x(0) + x(1));
  const double h = p.m2 * p.l1 * p.lc2;
  MatT<T> M(2, 2);
  M(0, 0) = p.I1 + p.I2 + p.m2 * p.l1 * p.l1 + 2.0 * h * c2;
  M(0, 1) = p.I2 + h * c2;
  M(1, 0) = M(0, 1);
  M(1, 1) = T(p.I2);
  VecT<T> rhs(2);
  // tau_g + B u - C qdot
  rhs(0) = -p.m1 * p.g * p.lc1 * s1 - p.m2 * p.g * (p.l1 * s1 + p.lc2 * s12) +
           2.0 * h * s2 * x(3) * x(2) + h * s2 * x(3) * x(3);
  rhs(1) = -p.m2 * p.g * p.lc2 * s12 + u(0) - h * s2 * x(2) * x(2);
  const VecT<T> qdd = solve_spd_small<T>(M, rhs);
  VecT<T> xd(4);
  xd << x(2), x(3), qdd(0), qdd(1);
  return xd;
}

template <typename T>
VecT<T> quadpend_field(const QuadPendulumParams& p, const VecT<T>& x, const VecT<T>& u) {
  using std::cos;
  using std::sin;
  const T th = x(2);
  const T phi = x(3);
  const T cphi = cos(phi);
  const T sphi = sin(phi);
  const T phid = x(7);
  const T thd = x(6);
  const double mt = p.mq + p.mp;
  const double mpL = p.mp * p.L;
  MatT<T> M = MatT<T>::Zero(4, 4);
  M(0, 0) = T(mt);
  M(1, 1) = T(mt);
  M(2, 2) = T(p.J);
  M(0, 3) = mpL * cphi;
  M(3, 0) = M(0, 3);
  M(1, 3) = mpL * sphi;
  M(3, 1) = M(1, 3);
  M(3, 3) = T(mpL * p.L);
  const T thrust = u(0) + u(1);
  const T tau_f = -p.nu * (phid - thd);
  VecT<T> rhs(4);
  rhs(0) = -thrust * sin(th) + mpL * sphi * phid * phid;
  rhs(1) = thrust * cos(th) - mpL * cphi * phid * phid - mt * p.g;
  rhs(2) = (u(0) - u(1)) * p.l - tau_f;
  rhs(3) = tau_f - mpL * p.g * sphi;
  const VecT<T> qdd = solve_spd_small<T>(M, rhs);
  VecT<T> xd(8);
  xd << x(4), x(5), x(6), x(7), qdd(0), qdd(1), qdd(2), qdd(3);
  return xd;
}

// Euler step and its Jacobians through forward-mode AD of the vector field.
template <typename Field>
void euler_jacobians(const Field& field, double dt, const Vec& x, const Vec& u, Mat& A, Mat& B) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(u.size());
  VecT<AD> xa(n), ua(m);
  for (int i = 0; i < n; ++i) xa(i) = AD(x(i), n + m, i);
  for (int i = 0; i < m; ++i) ua(i) = AD(u(i), n + m, n + i);
  const VecT<AD> xd = field(xa, ua);
  A = Mat::Identity(n, n);
  B = Mat::Zero(n, m);
  for (int i = 0; i < n; ++i) {
    const Vec& d = xd(i).derivatives();
    if (d.size() == 0) continue;
    A.row(i) += dt * d.head(n).transpose();
    B.row(i) += dt * d.tail(m).transpose();
  }
}

}  // namespace

Mat DynamicsModel::weighted_hessian(int k, const Vec& x, const Vec& u, const Vec& w) const {
  const int n = state_dim();
  const int m = control_dim();
  Mat H(n + m, n + m);
  Mat A, B;
  auto contracted = [&](const Vec& xx, const Vec& uu) {
    jacobians(k, xx, uu, A, B);
    Vec g(n + m);
    g.head(n) = A.transpose() * w;
    g.tail(m) = B.transpose() * w;
    return g;
  };
  for (int j = 0; j < n + m; ++j) {
    Vec xp = x, xm = x, up = u, um = u;
    double h;
    if (j < n) {
      h = 1e-5 * (1.0 + std::abs(x(j)));
      xp(j) += h;
      xm(j) -= h;
    } else {
      h = 1e-5 * (1.0 + std::abs(u(j - n)));
      up(j - n) += h;
      um(j - n) -= h;
    }
    H.col(j) = (contracted(xp, up) - contracted(xm, um)) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

Vec CarModel::step(int, const Vec& x, const Vec& u) const {
  const double th = x(2);
  const double v = x(3);
  Vec xn = x;
  xn(0) += dt_ * v * std::sin(th);
  xn(1) += dt_ * v * std::cos(th);
  xn(2) += dt_ * v * u(0);
  xn(3) += dt_ * u(1);
  return xn;
}

void CarModel::jacobians(int, const Vec& x, const Vec& u, Mat& A, Mat& B) const {
  const double th = x(2);
  const double v = x(3);
  const double s = std::sin(th);
  const double c = std::cos(th);
  A = Mat::Identity(4, 4);
  A(0, 2) = dt_ * v * c;
  A(0, 3) = dt_ * s;
  A(1, 2) = -dt_ * v * s;
  A(1, 3) = dt_ * c;
  A(2, 3) = dt_ * u(0);
  B = Mat::Zero(4, 2);
  B(2, 0) = dt_ * v;
  B(3, 1) = dt_;
}

Mat CarModel::weighted_hessian(int, const Vec& x, const Vec&, const Vec& w) const {
  const double th = x(2);
  const double v = x(3);
  const double s = std::sin(th);
  const double c = std::cos(th);
  Mat H = Mat::Zero(6, 6);
  H(2, 2) = dt_ * (-w(0) * v * s - w(1) * v * c);
  H(2, 3) = H(3, 2) = dt_ * (w(0) * c - w(1) * s);
  H(3, 4) = H(4, 3) = dt_ * w(2);
  return H;
}

Vec AcrobotModel::vector_field(const Vec& x, const Vec& u) const {
  return acrobot_field<double>(p_, x, u);
}

Vec AcrobotModel::step(int, const Vec& x, const Vec& u) const {
  return x + dt_ * vector_field(x, u);
}

void AcrobotModel::jacobians(int, const Vec& x, const Vec& u, Mat& A, Mat& B) const {
  euler_jacobians([this](const VecT<AD>& xa, const VecT<AD>& ua) { return acrobot_field<AD>(p_, xa, ua); },
                  dt_, x, u, A, B);
}

Mat AcrobotModel::mass_matrix(const Vec& q) const {
  const double h = p_.m2 * p_.l1 * p_.lc2;
  const double c2 = std::cos(q(1));
  Mat M(2, 2);
  M << p_.I1 + p_.I2 + p_.m2 * p_.l1 * p_.l1 + 2.0 * h * c2, p_.I2 + h * c2, p_.I2 + h * c2, p_.I2;
  return M;
}

double AcrobotModel::energy(const Vec& x) const {
  const Vec qd = x.segment(2, 2);
  const double T = 0.5 * qd.dot(mass_matrix(x.head(2)) * qd);
  const double V = -p_.m1 * p_.g * p_.lc1 * std::cos(x(0)) -
                   p_.m2 * p_.g * (p_.l1 * std::cos(x(0)) + p_.lc2 * std::cos(x(0) + x(1)));
  return T + V;
}

Vec QuadPendulumModel::vector_field(const Vec& x, const Vec& u) const {
  return quadpend_field<double>(p_, x, u);
}

Vec QuadPendulumModel::step(int, const Vec& x, const Vec& u) const {
  return x + dt_ * vector_field(x, u);
}

void QuadPendulumModel::jacobians(int, const Vec& x, const Vec& u, Mat& A, Mat& B) const {
  euler_jacobians(
      [this](const VecT<AD>& xa, const VecT<AD>& ua) { return quadpend_field<AD>(p_, xa, ua); }, dt_,
      x, u, A, B);
}

Mat QuadPendulumModel::mass_matrix(double phi) const {
  const double mt = p_.mq + p_.mp;
  const double mpL = p_.mp * p_.L;
  Mat M = Mat::Zero(4, 4);
  M(0, 0) = mt;
  M(1, 1) = mt;
  M(2, 2) = p_.J;
  M(0, 3) = M(3, 0) = mpL * std::cos(phi);
  M(1, 3) = M(3, 1) = mpL * std::sin(phi);
  M(3, 3) = mpL * p_.L;
  return M;
}

double QuadPendulumModel::friction_torque(double theta_dot, double phi_dot) const {
  return -p_.nu * (phi_dot - theta_dot);
}

LinearModel::LinearModel(MatSeq A, MatSeq B, VecSeq d) : A_(std::move(A)), B_(std::move(B)), d_(std::move(d)) {
  if (A_.empty() || B_.empty()) throw DimensionError("LinearModel needs at least one (A, B) pair");
}

Vec LinearModel::step(int k, const Vec& x, const Vec& u) const {
  Vec xn = A_at(k) * x + B_at(k) * u;
  if (!d_.empty()) xn += d_[d_.size() == 1 ? 0 : k];
  return xn;
}

void LinearModel::jacobians(int k, const Vec&, const Vec&, Mat& A, Mat& B) const {
  A = A_at(k);
  B = B_at(k);
}

Mat LinearModel::weighted_hessian(int, const Vec&, const Vec&, const Vec&) const {
  const int nz = state_dim() + control_dim();
  return Mat::Zero(nz, nz);
}

double wrap_to_pi(double angle) {
  constexpr double pi = std::numbers::pi;
  double a = std::fmod(angle + pi, 2.0 * pi);
  if (a < 0) a += 2.0 * pi;
  return a - pi;
}

double chart_representative(double angle, double shift) {
  return shift + wrap_to_pi(angle - shift);
}

ChartUpdate chart_switch(const Vec& angles, const Vec& shift) {
  constexpr double quarter_turn = std::numbers::pi / 2.0;
  ChartUpdate out{shift, angles};
  for (Eigen::Index i = 0; i < angles.size(); ++i) {
    const double offset = wrap_to_pi(angles(i) - shift(i));
    out.shift(i) = wrap_to_pi(shift(i) + std::clamp(offset, -quarter_turn, quarter_turn));
    out.wrapped(i) = wrap_to_pi(angles(i));
  }
  return out;
}

std::shared_ptr<const DynamicsModel> make_model(const std::string& name) {
  if (name == "car") return std::make_shared<CarModel>();
  if (name == "acrobot") return std::make_shared<AcrobotModel>();
  if (name == "quadpend") return std::make_shared<QuadPendulumModel>();
  throw Error("unknown model '" + name + "' (expected car, acrobot or quadpend)");
}

}  // namespace clsqp
