#pragma once

#include "clsqp/qp.hpp"
#include "clsqp/qp_data.hpp"
#include "test_util.hpp"

namespace testutil {

/// A box-constrained LQ problem linearized at zero controls, with the solution of its QP.
struct BoxLqInstance {
  LqProblem problem;
  clsqp::Iterate iterate;
  clsqp::QPData data;
  clsqp::OcpQpSolution solution;
  VecSeq dx, du;
  int active_rows = 0;
  unsigned seed = 0;
};

/// Smallest |slack| + |dual| over all inequality rows of the full QP; a strictly complementary
/// solution keeps this away from zero.
inline double complementarity_gap(const clsqp::OcpQp& qp, const clsqp::OcpQpSolution& s, int* active) {
  double gap = std::numeric_limits<double>::infinity();
  const int n = qp.n();
  int act = 0;
  for (int k = 0; k <= qp.horizon; ++k) {
    Vec z(k < qp.horizon ? n + qp.m() : n);
    if (k < qp.horizon) {
      z << s.x[k], s.u[k];
    } else {
      z = s.x[k];
    }
    const Vec slack = qp.h[k] - qp.C[k] * z;
    for (int i = 0; i < slack.size(); ++i) {
      gap = std::min(gap, std::max(std::abs(slack(i)), std::abs(s.lambda[k](i))));
      if (s.lambda[k](i) > std::abs(slack(i))) ++act;
    }
  }
  if (active) *active = act;
  return gap;
}

/// Random instances with n in 2..4, N in 5..8, control boxes and (for odd seeds) a box on the first state
/// component. Candidates whose QP solution is not strictly complementary (gap < 1e-4) or has no active
/// row are skipped; `seed` advances past them.
inline BoxLqInstance make_box_lq_instance(unsigned& seed) {
  for (;; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> nd(2, 4), Nd(5, 8), md(1, 2);
    const int n = nd(rng), N = Nd(rng), m = std::min(md(rng), n);
    BoxLqInstance inst;
    inst.seed = seed;
    inst.problem = random_lq_problem(rng, n, m, N, 0.0);
    std::uniform_real_distribution<double> bd(0.2, 1.0);
    auto& spec = inst.problem.spec;
    spec.x0 *= 3.0;
    for (int i = 0; i < m; ++i) {
      spec.u_lower(i) = -bd(rng);
      spec.u_upper(i) = bd(rng);
    }
    if (seed % 2 == 1) {
      const double b = 1.0 + 2.0 * bd(rng);
      spec.state_constraints.push_back(std::make_shared<clsqp::StateBounds>(
          std::vector<int>{0}, Vec::Constant(1, -b), Vec::Constant(1, b)));
    }
    spec.validate();
    inst.iterate = clsqp::Iterate::from_controls(spec, VecSeq(N, Vec::Zero(m)));
    clsqp::QpDataOptions dopt;
    dopt.eps_psd = 1e-12;
    inst.data = clsqp::build_qp_data(spec, inst.iterate, dopt);
    const clsqp::OcpQp qp = clsqp::to_ocp_qp(inst.data);
    clsqp::QpOptions qopt;
    qopt.tol = 1e-12;
    qopt.max_iter = 400;
    inst.solution = clsqp::solve_ocp_qp(qp, qopt);
    if (inst.solution.status != clsqp::QpStatus::optimal) continue;
    if (complementarity_gap(qp, inst.solution, &inst.active_rows) < 1e-4 || inst.active_rows == 0) continue;
    inst.dx = inst.solution.x;
    inst.du = inst.solution.u;
    ++seed;
    return inst;
  }
}

}  // namespace testutil
