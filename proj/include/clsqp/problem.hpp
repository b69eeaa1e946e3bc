#pragma once

#include "clsqp/models.hpp"
#include "clsqp/types.hpp"

#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace clsqp {

/// Second-order expansion of a stage cost l_k(x, u).
struct StageExpansion {
  Vec lx, lu;
  Mat lxx, lxu, luu;  ///< lxu is n x m
};

class CostModel {
 public:
  virtual ~CostModel() = default;
  virtual double stage(int k, const Vec& x, const Vec& u) const = 0;
  virtual double terminal(const Vec& x) const = 0;
  virtual void stage_expansion(int k, const Vec& x, const Vec& u, StageExpansion& out) const = 0;
  virtual void terminal_expansion(const Vec& x, Vec& lx, Mat& lxx) const = 0;
};

using CostPtr = std::shared_ptr<const CostModel>;

/// l_k = 1/2 (x - xr)' Q (x - xr) + 1/2 (u - ur)' R (u - ur) + (x - xr)' S (u - ur),
/// l_N = 1/2 (x - xg)' QN (x - xg). Per-step matrices are optional (size 1 = time invariant).
class QuadraticCost final : public CostModel {
 public:
  QuadraticCost(MatSeq Q, MatSeq R, Mat QN, Vec x_ref, Vec u_ref, Vec x_goal, MatSeq S = {});

  double stage(int k, const Vec& x, const Vec& u) const override;
  double terminal(const Vec& x) const override;
  void stage_expansion(int k, const Vec& x, const Vec& u, StageExpansion& out) const override;
  void terminal_expansion(const Vec& x, Vec& lx, Mat& lxx) const override;

 private:
  template <typename T>
  static const T& at(const std::vector<T>& v, int k) { return v[v.size() == 1 ? 0 : k]; }
  MatSeq Q_, R_, S_;
  Mat QN_;
  Vec x_ref_, u_ref_, x_goal_;
};

/// A block of state constraint rows c(x) >= 0 active on a contiguous range of steps.
/// `shift` carries the per-step chart window offsets of the angular state components.
class StateConstraint {
 public:
  StateConstraint(int first_step, int last_step) : first_(first_step), last_(last_step) {}
  virtual ~StateConstraint() = default;

  virtual int dim() const = 0;
  virtual void value(const Vec& x, const Vec& shift, Eigen::Ref<Vec> c) const = 0;
  virtual void jacobian(const Vec& x, const Vec& shift, Eigen::Ref<Mat> J) const = 0;
  /// H += sum_i w_i * d2 c_i / dx2
  virtual void add_weighted_hessian(const Vec& x, const Vec& shift, const Vec& w, Mat& H) const = 0;

  /// Steps are 1..N; a negative last step counts from N (-1 means N).
  bool applies(int k, int horizon) const {
    const int last = last_ < 0 ? horizon + 1 + last_ : last_;
    return k >= std::max(first_, 1) && k <= last;
  }

 private:
  int first_, last_;
};

using ConstraintPtr = std::shared_ptr<const StateConstraint>;

/// Lower/upper bounds on selected state components; infinite bounds are skipped.
class StateBounds final : public StateConstraint {
 public:
  StateBounds(std::vector<int> index, Vec lower, Vec upper, int first_step = 1, int last_step = -1);
  int dim() const override { return static_cast<int>(rows_.size()); }
  void value(const Vec& x, const Vec& shift, Eigen::Ref<Vec> c) const override;
  void jacobian(const Vec& x, const Vec& shift, Eigen::Ref<Mat> J) const override;
  void add_weighted_hessian(const Vec&, const Vec&, const Vec&, Mat&) const override {}

 private:
  struct Row {
    int index;
    double bound;
    double sign;  // +1: x - lo >= 0, -1: hi - x >= 0
  };
  std::vector<Row> rows_;
};

/// A point attached to the state, p(x) in R^2.
class PointMap {
 public:
  virtual ~PointMap() = default;
  virtual Eigen::Vector2d point(const Vec& x) const = 0;
  virtual Mat jacobian(const Vec& x) const = 0;  ///< 2 x n
  /// sum_i w_i d2 p_i / dx2
  virtual Mat weighted_hessian(const Vec& x, const Eigen::Vector2d& w) const = 0;
};

/// p = (x[i], x[j]).
class SelectPoint final : public PointMap {
 public:
  SelectPoint(int n, int i, int j) : n_(n), i_(i), j_(j) {}
  Eigen::Vector2d point(const Vec& x) const override { return {x(i_), x(j_)}; }
  Mat jacobian(const Vec& x) const override;
  Mat weighted_hessian(const Vec&, const Eigen::Vector2d&) const override { return Mat::Zero(n_, n_); }

 private:
  int n_, i_, j_;
};

/// Point at distance `length` along a pendulum hanging from (x[ix], x[iz]) at angle x[iphi]:
/// p = (x[ix] + length sin(phi), x[iz] - length cos(phi)).
class PendulumPoint final : public PointMap {
 public:
  PendulumPoint(int n, int ix, int iz, int iphi, double length)
      : n_(n), ix_(ix), iz_(iz), iphi_(iphi), length_(length) {}
  Eigen::Vector2d point(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  Mat weighted_hessian(const Vec& x, const Eigen::Vector2d& w) const override;

 private:
  int n_, ix_, iz_, iphi_;
  double length_;
};

/// Clearance ||p(x) - center|| - radius >= 0 to a disc obstacle.
class DiscAvoidance final : public StateConstraint {
 public:
  DiscAvoidance(std::shared_ptr<const PointMap> point, Eigen::Vector2d center, double radius,
                int first_step = 1, int last_step = -1)
      : StateConstraint(first_step, last_step), point_(std::move(point)), center_(center), radius_(radius) {}
  int dim() const override { return 1; }
  void value(const Vec& x, const Vec& shift, Eigen::Ref<Vec> c) const override;
  void jacobian(const Vec& x, const Vec& shift, Eigen::Ref<Mat> J) const override;
  void add_weighted_hessian(const Vec& x, const Vec& shift, const Vec& w, Mat& H) const override;

 private:
  std::shared_ptr<const PointMap> point_;
  Eigen::Vector2d center_;
  double radius_;
};

/// Terminal ball radius^2 - ||x - goal||^2 >= 0; angular components use wrapped differences.
class GoalBall final : public StateConstraint {
 public:
  GoalBall(Vec goal, double radius, std::vector<int> angular = {})
      : StateConstraint(-1, -1), goal_(std::move(goal)), radius_(radius), angular_(std::move(angular)) {}
  int dim() const override { return 1; }
  void value(const Vec& x, const Vec& shift, Eigen::Ref<Vec> c) const override;
  void jacobian(const Vec& x, const Vec& shift, Eigen::Ref<Mat> J) const override;
  void add_weighted_hessian(const Vec& x, const Vec& shift, const Vec& w, Mat& H) const override;

 private:
  Vec difference(const Vec& x) const;
  Vec goal_;
  double radius_;
  std::vector<int> angular_;
};

/// Chart-relative angle limits q in [-pi + delta, pi + delta] for each angular component,
/// evaluated on the representative of q inside the current window.
class AngleWindow final : public StateConstraint {
 public:
  explicit AngleWindow(std::vector<int> angular, int first_step = 1, int last_step = -1)
      : StateConstraint(first_step, last_step), angular_(std::move(angular)) {}
  int dim() const override { return 2 * static_cast<int>(angular_.size()); }
  void value(const Vec& x, const Vec& shift, Eigen::Ref<Vec> c) const override;
  void jacobian(const Vec& x, const Vec& shift, Eigen::Ref<Mat> J) const override;
  void add_weighted_hessian(const Vec&, const Vec&, const Vec&, Mat&) const override {}

 private:
  std::vector<int> angular_;
};

/// The optimal control problem. Immutable once validated.
///
/// Constraint layout at step k is the stacked vector c_k = (c_k^x, c_k^u):
///   c_k^x: every StateConstraint block applying at k, in registration order (empty at k = 0,
///          x_0 being data);
///   c_k^u: u_i - lower_i for finite lower bounds, then upper_i - u_i for finite upper bounds
///          (empty at k = N).
struct ProblemSpec {
  int horizon = 0;
  Vec x0;
  DynamicsPtr dynamics;
  CostPtr cost;
  std::vector<ConstraintPtr> state_constraints;
  Vec u_lower, u_upper;

  void validate() const;

  int n() const { return dynamics->state_dim(); }
  int m() const { return dynamics->control_dim(); }
  int state_constraint_dim(int k) const;
  int control_constraint_dim() const;
  int constraint_dim(int k) const {
    return state_constraint_dim(k) + (k < horizon ? control_constraint_dim() : 0);
  }
  int num_angles() const { return static_cast<int>(dynamics->angular_dims().size()); }

  /// c_k^x(x) stacked over the applying blocks.
  Vec state_constraints_at(int k, const Vec& x, const Vec& shift) const;
  Mat state_constraint_jacobian(int k, const Vec& x, const Vec& shift) const;
  /// Adds sum_i w_i d2 c^x_{k,i} / dx2 to H.
  void add_state_constraint_hessian(int k, const Vec& x, const Vec& shift, const Vec& w, Mat& H) const;

  Vec control_constraints_at(const Vec& u) const;
  /// Jacobian of c^u; constant.
  Mat control_constraint_jacobian() const;
};

/// Primal-dual iterate of the shooting formulation.
struct Iterate {
  VecSeq u;      ///< u_0..u_{N-1}
  VecSeq x;      ///< x_0..x_N = x[u]
  VecSeq y;      ///< duals per step, stacked like c_k
  VecSeq s;      ///< line-search slacks per step
  Vec rho;       ///< penalties rho_0..rho_N
  VecSeq chart;  ///< chart window offsets per step (size = number of angular dims)

  static Iterate from_controls(const ProblemSpec& spec, VecSeq u);
};

struct KKTResiduals {
  double min_primal = 0.0;
  double min_dual = 0.0;
  double max_complementarity = 0.0;
  double max_stationarity = 0.0;
};

VecSeq rollout_open_loop(const ProblemSpec& spec, const VecSeq& u);

double evaluate_objective(const ProblemSpec& spec, const VecSeq& x, const VecSeq& u);

/// c_k = (c_k^x(x_k), c_k^u(u_k)) for k = 0..N.
VecSeq evaluate_constraints(const ProblemSpec& spec, const VecSeq& x, const VecSeq& u, const VecSeq& chart);

/// Smallest state-constraint value over the trajectory (+inf when there are none).
double min_state_constraint(const ProblemSpec& spec, const VecSeq& x, const VecSeq& chart);

KKTResiduals kkt_residuals(const ProblemSpec& spec, const Iterate& it);

}  // namespace clsqp
