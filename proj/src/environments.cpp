#include "clsqp/environments.hpp"

#include "clsqp/qp_data.hpp"
#include "clsqp/rollout.hpp"

#include <algorithm>
#include <numbers>

namespace clsqp {

namespace {

constexpr double pi = std::numbers::pi;

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

Vec AcrobotCost::error(const Vec& x) const {
  Vec e = x - goal_;
  e(0) = wrap_to_pi(e(0));
  e(1) = wrap_to_pi(e(1));
  return e;
}

double AcrobotCost::stage(int, const Vec& x, const Vec& u) const {
  return 0.5 * (w1_ * (std::cos(x(0)) + std::cos(x(0) + x(1)) + 2.0) + w2_ * u.squaredNorm());
}

double AcrobotCost::terminal(const Vec& x) const { return 0.5 * w3_ * error(x).squaredNorm(); }

void AcrobotCost::stage_expansion(int, const Vec& x, const Vec& u, StageExpansion& out) const {
  const double s1 = std::sin(x(0)), c1 = std::cos(x(0));
  const double s12 = std::sin(x(0) + x(1)), c12 = std::cos(x(0) + x(1));
  out.lx = Vec::Zero(4);
  out.lx(0) = -0.5 * w1_ * (s1 + s12);
  out.lx(1) = -0.5 * w1_ * s12;
  out.lxx = Mat::Zero(4, 4);
  out.lxx(0, 0) = -0.5 * w1_ * (c1 + c12);
  out.lxx(0, 1) = out.lxx(1, 0) = -0.5 * w1_ * c12;
  out.lxx(1, 1) = -0.5 * w1_ * c12;
  out.lu = w2_ * u;
  out.luu = w2_ * Mat::Identity(u.size(), u.size());
  out.lxu = Mat::Zero(4, u.size());
}

void AcrobotCost::terminal_expansion(const Vec& x, Vec& lx, Mat& lxx) const {
  lx = w3_ * error(x);
  lxx = w3_ * Mat::Identity(x.size(), x.size());
}

double QuadPendulumCost::stage(int, const Vec& x, const Vec& u) const {
  const double pos = (x.head(3) - goal_.head(3)).squaredNorm();
  return 0.5 * (w1_ * (pos + 1.0 + std::cos(x(3))) + w2_ * (u - u_hover_).squaredNorm());
}

double QuadPendulumCost::terminal(const Vec& x) const {
  const Vec e = x - goal_;
  return 0.5 * w3_ * e.dot(QN_ * e);
}

void QuadPendulumCost::stage_expansion(int, const Vec& x, const Vec& u, StageExpansion& out) const {
  const int n = static_cast<int>(x.size()), m = static_cast<int>(u.size());
  out.lx = Vec::Zero(n);
  out.lx.head(3) = w1_ * (x.head(3) - goal_.head(3));
  out.lx(3) = -0.5 * w1_ * std::sin(x(3));
  out.lxx = Mat::Zero(n, n);
  out.lxx.topLeftCorner(3, 3).diagonal().setConstant(w1_);
  out.lxx(3, 3) = -0.5 * w1_ * std::cos(x(3));
  out.lu = w2_ * (u - u_hover_);
  out.luu = w2_ * Mat::Identity(m, m);
  out.lxu = Mat::Zero(n, m);
}

void QuadPendulumCost::terminal_expansion(const Vec& x, Vec& lx, Mat& lxx) const {
  lx = w3_ * QN_ * (x - goal_);
  lxx = w3_ * QN_;
}

double quadrotor_body_radius(const QuadPendulumParams& p) { return p.l; }

std::vector<int> available_cases(const std::string& env) {
  if (env == "car") return {1, 2, 3};
  if (env == "acrobot") return {1};
  if (env == "quadpend") return {1, 2};
  throw Error("unknown environment '" + env + "' (valid: car, acrobot, quadpend)");
}

// Obstacle positions and car start states are read off the figures; they are approximations.
CaseSetup default_case(const std::string& env, int case_index) {
  const auto cases = available_cases(env);
  if (std::find(cases.begin(), cases.end(), case_index) == cases.end()) {
    throw Error("environment '" + env + "' has no case " + std::to_string(case_index));
  }
  CaseSetup c;
  if (env == "car") {
    c.obstacles = {{1.0, 1.0, 0.5}, {2.0, 2.4, 0.35}, {2.6, 1.3, 0.35}};
    if (case_index == 1) c.x0 = vec({0.0, 0.0, 0.0, 0.0});
    if (case_index == 2) c.x0 = vec({0.0, 1.0, pi / 4.0, 0.0});
    if (case_index == 3) c.x0 = vec({-2.0, -2.0, pi / 4.0, 0.0});
  } else if (env == "acrobot") {
    c.x0 = Vec::Zero(4);
  } else {
    c.x0 = Vec::Zero(8);
    if (case_index == 1) c.obstacles = {{1.5, -0.8, 0.6}};
    if (case_index == 2) c.obstacles = {{1.2, -0.6, 0.4}, {2.3, 0.3, 0.35}};
  }
  return c;
}

VecSeq make_initial_guess(const std::string& env, const ProblemSpec& spec) {
  const int N = spec.horizon, n = spec.n(), m = spec.m();
  if (env == "car") return VecSeq(N, Vec::Zero(m));
  if (env == "quadpend") {
    const auto& model = dynamic_cast<const QuadPendulumModel&>(*spec.dynamics);
    return VecSeq(N, Vec::Constant(m, model.hover_thrust()));
  }
  if (env != "acrobot") throw Error("unknown environment '" + env + "'");

  Vec goal = Vec::Zero(n);
  goal(0) = pi;
  VecSeq chi(N + 1);
  for (int k = 0; k <= N; ++k) chi[k] = spec.x0 + (static_cast<double>(k) / N) * (goal - spec.x0);
  const Vec mu = Vec::Zero(m);
  MatSeq A(N), B(N), W(N + 1);
  for (int k = 0; k < N; ++k) {
    spec.dynamics->jacobians(k, chi[k], mu, A[k], B[k]);
    StageExpansion e;
    spec.cost->stage_expansion(k, chi[k], mu, e);
    Mat H(n + m, n + m);
    H << e.lxx, e.lxu, e.lxu.transpose(), e.luu;
    W[k] = project_psd(0.5 * (H + H.transpose()), 1e-6);
  }
  Vec lx;
  Mat lxx;
  spec.cost->terminal_expansion(chi[N], lx, lxx);
  W[N] = project_psd(0.5 * (lxx + lxx.transpose()), 1e-6);
  const MatSeq K = riccati_gains(A, B, W, 1e-6);

  VecSeq u(N);
  Vec x = spec.x0;
  for (int k = 0; k < N; ++k) {
    u[k] = (mu + K[k] * (x - chi[k])).cwiseMax(spec.u_lower).cwiseMin(spec.u_upper);
    x = spec.dynamics->step(k, x, u[k]);
  }
  return u;
}

Environment make_environment(const std::string& env, int case_index, const std::optional<CaseSetup>& setup) {
  const CaseSetup cs = setup ? *setup : default_case(env, case_index);
  if (!setup) (void)available_cases(env);
  Environment out;
  out.name = env;
  out.case_index = case_index;
  ProblemSpec& spec = out.spec;
  spec.x0 = cs.x0;
  SolverOptions& opt = out.options;

  if (env == "car") {
    spec.horizon = 40;
    spec.dynamics = std::make_shared<CarModel>(0.05);
    const Mat R = 0.1 * vec({0.2, 0.1}).asDiagonal().toDenseMatrix();
    const Mat QN = 2.0 * vec({50.0, 50.0, 50.0, 10.0}).asDiagonal().toDenseMatrix();
    const Vec xg = vec({3.0, 3.0, pi / 2.0, 0.0});
    spec.cost = std::make_shared<QuadraticCost>(MatSeq{Mat::Zero(4, 4)}, MatSeq{R}, QN, Vec::Zero(4), Vec::Zero(2), xg);
    for (const Obstacle& o : cs.obstacles) {
      spec.state_constraints.push_back(std::make_shared<DiscAvoidance>(std::make_shared<SelectPoint>(4, 0, 1),
                                                                       Eigen::Vector2d(o.x, o.y), o.radius));
    }
    spec.u_lower = vec({-pi / 3.0, -6.0});
    spec.u_upper = vec({pi / 3.0, 6.0});
    opt.gamma = {1e-4, 1.0, 1e-4};
  } else if (env == "acrobot") {
    spec.horizon = 150;
    spec.dynamics = std::make_shared<AcrobotModel>(AcrobotParams{}, 0.05);
    const Vec xg = vec({pi, 0.0, 0.0, 0.0});
    spec.cost = std::make_shared<AcrobotCost>(0.1, 0.01, 10.0, xg);
    spec.state_constraints.push_back(std::make_shared<AngleWindow>(std::vector<int>{0, 1}));
    spec.state_constraints.push_back(std::make_shared<GoalBall>(xg, 0.2, std::vector<int>{0, 1}));
    spec.u_lower = vec({-2.0});
    spec.u_upper = vec({2.0});
    opt.hessian_mode = HessianMode::gauss_newton;
    opt.gamma = {1e-4, 1.0, 1e-4};
  } else if (env == "quadpend") {
    spec.horizon = 160;
    const QuadPendulumParams p;
    auto model = std::make_shared<QuadPendulumModel>(p, 0.025);
    spec.dynamics = model;
    const double mg = p.mq * p.g;
    Vec xg = Vec::Zero(8);
    xg.head(4) = vec({3.0, -1.5, 0.0, pi});
    const Mat QN = vec({10.0, 10.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0}).asDiagonal().toDenseMatrix();
    spec.cost = std::make_shared<QuadPendulumCost>(0.01, 0.05, 5.0, xg, Vec::Constant(2, model->hover_thrust()), QN);
    spec.state_constraints.push_back(std::make_shared<StateBounds>(
        std::vector<int>{0, 1, 2}, vec({-4.0, -2.0, -0.75 * pi}), vec({4.0, 2.0, 0.75 * pi})));
    const double body = quadrotor_body_radius(p);
    for (const Obstacle& o : cs.obstacles) {
      const Eigen::Vector2d c(o.x, o.y);
      spec.state_constraints.push_back(
          std::make_shared<DiscAvoidance>(std::make_shared<SelectPoint>(8, 0, 1), c, o.radius + body));
      for (double frac : {0.5, 1.0}) {
        spec.state_constraints.push_back(
            std::make_shared<DiscAvoidance>(std::make_shared<PendulumPoint>(8, 0, 1, 3, frac * p.L), c, o.radius));
      }
    }
    spec.u_lower = Vec::Constant(2, 0.1 * mg);
    spec.u_upper = Vec::Constant(2, 3.0 * mg);
    opt.gamma = {1e-3, 0.1, 1e-5};
    opt.tol_dual = 1e-2;
  } else {
    throw Error("unknown environment '" + env + "' (valid: car, acrobot, quadpend)");
  }
  spec.validate();
  out.u_init = make_initial_guess(env, spec);
  return out;
}

}  // namespace clsqp
