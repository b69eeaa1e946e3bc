#pragma once

#include "clsqp/types.hpp"

#include <memory>
#include <string>
#include <vector>

namespace clsqp {

/// Discrete-time dynamics x_{k+1} = f_k(x_k, u_k) with first and second derivatives.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual std::string name() const = 0;
  virtual int state_dim() const = 0;
  virtual int control_dim() const = 0;
  virtual double dt() const = 0;

  virtual Vec step(int k, const Vec& x, const Vec& u) const = 0;

  /// A = df/dx (n x n), B = df/du (n x m).
  virtual void jacobians(int k, const Vec& x, const Vec& u, Mat& A, Mat& B) const = 0;

  /// Hessian of w^T f(x, u) with respect to z = (x, u); (n+m) x (n+m), symmetric.
  /// The default takes central differences of the analytic Jacobian contraction.
  virtual Mat weighted_hessian(int k, const Vec& x, const Vec& u, const Vec& w) const;

  /// Indices of state components living on S^1.
  virtual std::vector<int> angular_dims() const { return {}; }
};

using DynamicsPtr = std::shared_ptr<const DynamicsModel>;

/// Kinematic car, x = (p_x, p_y, theta, v), u = (steer rate, acceleration), explicit Euler.
class CarModel final : public DynamicsModel {
 public:
  explicit CarModel(double dt = 0.05) : dt_(dt) {}

  std::string name() const override { return "car"; }
  int state_dim() const override { return 4; }
  int control_dim() const override { return 2; }
  double dt() const override { return dt_; }

  Vec step(int k, const Vec& x, const Vec& u) const override;
  void jacobians(int k, const Vec& x, const Vec& u, Mat& A, Mat& B) const override;
  Mat weighted_hessian(int k, const Vec& x, const Vec& u, const Vec& w) const override;

 private:
  double dt_;
};

struct AcrobotParams {
  double m1 = 1.0;
  double m2 = 1.0;
  double l1 = 1.0;
  double l2 = 1.0;
  double lc1 = 0.5;
  double lc2 = 0.5;
  /// Link inertias about the respective pivots.
  double I1 = 1.0 / 3.0;
  double I2 = 1.0 / 3.0;
  double g = 9.81;
};

/// Two-link underactuated arm actuated at the elbow; q1 = 0 hangs straight down.
/// x = (q1, q2, v1, v2), explicit Euler.
class AcrobotModel final : public DynamicsModel {
 public:
  explicit AcrobotModel(AcrobotParams params = {}, double dt = 0.05) : p_(params), dt_(dt) {}

  std::string name() const override { return "acrobot"; }
  int state_dim() const override { return 4; }
  int control_dim() const override { return 1; }
  double dt() const override { return dt_; }
  std::vector<int> angular_dims() const override { return {0, 1}; }

  Vec step(int k, const Vec& x, const Vec& u) const override;
  void jacobians(int k, const Vec& x, const Vec& u, Mat& A, Mat& B) const override;

  const AcrobotParams& params() const { return p_; }
  /// Continuous-time vector field.
  Vec vector_field(const Vec& x, const Vec& u) const;
  Mat mass_matrix(const Vec& q) const;
  double energy(const Vec& x) const;

 private:
  AcrobotParams p_;
  double dt_;
};

struct QuadPendulumParams {
  double mq = 0.486;
  double mp = 0.2 * 0.486;
  double l = 0.25;
  double L = 0.5;
  double g = 9.81;
  double J = 0.00383;
  double nu = 0.01;
};

/// Planar quadrotor carrying a point-mass pendulum, x = (p_x, p_z, theta, phi, and their rates),
/// u = rotor thrusts. Euler step of M(q) qdd = F(q) - bias - dV/dq.
class QuadPendulumModel final : public DynamicsModel {
 public:
  explicit QuadPendulumModel(QuadPendulumParams params = {}, double dt = 0.025)
      : p_(params), dt_(dt) {}

  std::string name() const override { return "quadpend"; }
  int state_dim() const override { return 8; }
  int control_dim() const override { return 2; }
  double dt() const override { return dt_; }

  Vec step(int k, const Vec& x, const Vec& u) const override;
  void jacobians(int k, const Vec& x, const Vec& u, Mat& A, Mat& B) const override;

  const QuadPendulumParams& params() const { return p_; }
  Vec vector_field(const Vec& x, const Vec& u) const;
  Mat mass_matrix(double phi) const;
  /// Viscous torque at the pendulum joint.
  double friction_torque(double theta_dot, double phi_dot) const;
  /// Per-rotor thrust that holds the system at rest.
  double hover_thrust() const { return 0.5 * (p_.mq + p_.mp) * p_.g; }

 private:
  QuadPendulumParams p_;
  double dt_;
};

/// Time-varying affine model x_{k+1} = A_k x_k + B_k u_k + d_k.
class LinearModel final : public DynamicsModel {
 public:
  LinearModel(MatSeq A, MatSeq B, VecSeq d = {});

  std::string name() const override { return "linear"; }
  int state_dim() const override { return static_cast<int>(A_.front().rows()); }
  int control_dim() const override { return static_cast<int>(B_.front().cols()); }
  double dt() const override { return 1.0; }

  Vec step(int k, const Vec& x, const Vec& u) const override;
  void jacobians(int k, const Vec& x, const Vec& u, Mat& A, Mat& B) const override;
  Mat weighted_hessian(int k, const Vec& x, const Vec& u, const Vec& w) const override;

 private:
  const Mat& A_at(int k) const { return A_[A_.size() == 1 ? 0 : k]; }
  const Mat& B_at(int k) const { return B_[B_.size() == 1 ? 0 : k]; }
  MatSeq A_, B_;
  VecSeq d_;
};

/// Wrap an angle into [-pi, pi].
double wrap_to_pi(double angle);

struct ChartUpdate {
  Vec shift;    ///< new per-angle window offsets delta
  Vec wrapped;  ///< angles wrapped into [-pi, pi]
};

/// Recenter the admissible window [-pi + delta, pi + delta] of each angle on its current
/// value, rotating by at most pi/2 per call, and wrap the angles themselves.
ChartUpdate chart_switch(const Vec& angles, const Vec& shift);

/// Representative of `angle` inside the window [shift - pi, shift + pi).
double chart_representative(double angle, double shift);

std::shared_ptr<const DynamicsModel> make_model(const std::string& name);

}  // namespace clsqp
