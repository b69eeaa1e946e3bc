#pragma once

#include "clsqp/problem.hpp"
#include "clsqp/sqp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace clsqp {

/// l_k = 1/2 [w1 (cos q1 + cos(q1 + q2) + 2) + w2 u^2],  l_N = 1/2 w3 ||x - xg||^2 with wrapped angle errors.
class AcrobotCost final : public CostModel {
 public:
  AcrobotCost(double w1, double w2, double w3, Vec goal) : w1_(w1), w2_(w2), w3_(w3), goal_(std::move(goal)) {}
  double stage(int k, const Vec& x, const Vec& u) const override;
  double terminal(const Vec& x) const override;
  void stage_expansion(int k, const Vec& x, const Vec& u, StageExpansion& out) const override;
  void terminal_expansion(const Vec& x, Vec& lx, Mat& lxx) const override;

 private:
  Vec error(const Vec& x) const;
  double w1_, w2_, w3_;
  Vec goal_;
};

/// l_k = 1/2 [w1 (||(px, pz, theta) - g||^2 + 1 + cos phi) + w2 ||u - uh||^2],
/// l_N = w3 * 1/2 (x - xg)' QN (x - xg).
class QuadPendulumCost final : public CostModel {
 public:
  QuadPendulumCost(double w1, double w2, double w3, Vec goal, Vec u_hover, Mat QN)
      : w1_(w1), w2_(w2), w3_(w3), goal_(std::move(goal)), u_hover_(std::move(u_hover)), QN_(std::move(QN)) {}
  double stage(int k, const Vec& x, const Vec& u) const override;
  double terminal(const Vec& x) const override;
  void stage_expansion(int k, const Vec& x, const Vec& u, StageExpansion& out) const override;
  void terminal_expansion(const Vec& x, Vec& lx, Mat& lxx) const override;

 private:
  double w1_, w2_, w3_;
  Vec goal_, u_hover_;
  Mat QN_;
};

struct Obstacle {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
  bool operator==(const Obstacle&) const = default;
};

/// Geometry and initial condition of one environment case.
struct CaseSetup {
  Vec x0;
  std::vector<Obstacle> obstacles;
};

/// Cases shipped for an environment, 1-based.
std::vector<int> available_cases(const std::string& env);
/// Throws for an unknown environment or case.
CaseSetup default_case(const std::string& env, int case_index);

struct Environment {
  std::string name;
  int case_index = 1;
  ProblemSpec spec;
  VecSeq u_init;
  SolverOptions options;  ///< per-environment defaults
};

/// Builds the problem; `setup` replaces the shipped case geometry when given.
Environment make_environment(const std::string& env, int case_index, const std::optional<CaseSetup>& setup = {});

/// Per-environment initial control sequence for the given problem.
VecSeq make_initial_guess(const std::string& env, const ProblemSpec& spec);

/// Radius of the disc circumscribing the quadrotor body.
double quadrotor_body_radius(const QuadPendulumParams& p);

}  // namespace clsqp
