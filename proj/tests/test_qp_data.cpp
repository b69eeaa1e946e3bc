#include "clsqp/environments.hpp"
#include "clsqp/qp_data.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace clsqp;

namespace {

// Central second differences of a scalar function.
template <typename F>
Mat fd_hessian(const F& f, const Vec& z, double h = 1e-3) {
  const int n = static_cast<int>(z.size());
  Mat H(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      auto at = [&](double a, double b) {
        Vec zz = z;
        zz(i) += a;
        zz(j) += b;
        return f(zz);
      };
      H(i, j) = H(j, i) = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
    }
  }
  return H;
}

Iterate random_iterate(const Environment& env, std::mt19937_64& rng, double uscale, double yscale) {
  VecSeq u = env.u_init;
  for (auto& uk : u) uk += testutil::random_vec(rng, env.spec.m(), uscale);
  Iterate it = Iterate::from_controls(env.spec, u);
  std::uniform_real_distribution<double> ud(0.0, yscale);
  for (auto& yk : it.y)
    for (int i = 0; i < yk.size(); ++i) yk(i) = ud(rng);
  return it;
}

}  // namespace

TEST(ProjectPsd, IdentityUnchanged) {
  EXPECT_LT((project_psd(Mat::Identity(3, 3), 1e-8) - Mat::Identity(3, 3)).norm(), 1e-15);
}

TEST(ProjectPsd, ClampsNegativeEigenvalue) {
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = -1.0;
  const Mat P = project_psd(D, 1e-8);
  EXPECT_NEAR(P(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(P(1, 1), 1e-8, 1e-15);
  EXPECT_NEAR(P(0, 1), 0.0, 1e-15);
}

TEST(ProjectPsd, RandomSymmetricIsNearestFeasible) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 10; ++t) {
    Mat M = testutil::random_mat(rng, 5, 5);
    M = (0.5 * (M + M.transpose())).eval();
    const double eps = 1e-3;
    const Mat P = project_psd(M, eps);
    // spectrum of P must be max(eig(M), eps)
    Eigen::SelfAdjointEigenSolver<Mat> em(M), ep(P);
    EXPECT_LT((ep.eigenvalues() - em.eigenvalues().cwiseMax(eps)).norm(), 1e-12);
    EXPECT_GE(ep.eigenvalues().minCoeff(), eps - 1e-12);
    // no feasible neighbour is closer
    for (int s = 0; s < 50; ++s) {
      Mat E = testutil::random_mat(rng, 5, 5, 0.05);
      const Mat cand = project_psd(P + 0.5 * (E + E.transpose()), eps);
      EXPECT_GE((cand - M).norm(), (P - M).norm() - 1e-12);
    }
  }
}

TEST(ProjectPsd, RejectsNonSquare) { EXPECT_THROW(project_psd(Mat::Zero(2, 3), 1e-6), DimensionError); }

TEST(QPData, LqrBlocksAreCostHessianAndCostate) {
  std::mt19937_64 rng(22);
  auto p = testutil::random_lq_problem(rng, 3, 2, 5);
  const Vec xg = testutil::random_vec(rng, 3);
  p.spec.cost = std::make_shared<QuadraticCost>(p.Q, p.R, p.QN, Vec::Zero(3), Vec::Zero(2), xg);
  VecSeq u(5);
  for (auto& uk : u) uk = testutil::random_vec(rng, 2);
  const Iterate it = Iterate::from_controls(p.spec, u);
  QpDataOptions opt;
  opt.eps_psd = 1e-12;
  const QPData d = build_qp_data(p.spec, it, opt);
  for (int k = 0; k < 5; ++k) {
    Mat Z = Mat::Zero(5, 5);
    Z.topLeftCorner(3, 3) = p.Q[k];
    Z.bottomRightCorner(2, 2) = p.R[k];
    EXPECT_LT((d.Z[k] - Z).norm(), 1e-12);
  }
  EXPECT_LT((d.Z[5] - p.QN).norm(), 1e-12);
  Vec lam = p.QN * (it.x[5] - xg);
  EXPECT_LT((d.nu[5] - lam).norm(), 1e-12);
  for (int k = 4; k >= 1; --k) {
    lam = p.Q[k] * it.x[k] + p.A[k].transpose() * lam;
    EXPECT_LT((d.nu[k] - lam).norm(), 1e-10 * (1 + lam.norm()));
  }
  opt.mode = HessianMode::gauss_newton;
  const QPData gn = build_qp_data(p.spec, it, opt);
  for (int k = 0; k <= 5; ++k) EXPECT_EQ((gn.Z[k] - d.Z[k]).norm(), 0.0);
}

TEST(QPData, HessianBlocksMatchStageLagrangianDifferences) {
  std::mt19937_64 rng(23);
  for (const std::string name : {"car", "quadpend"}) {
    const Environment env = make_environment(name, 1);
    const ProblemSpec& spec = env.spec;
    const int n = spec.n(), m = spec.m(), N = spec.horizon;
    const Iterate it = random_iterate(env, rng, 0.2, 1.0);
    QpDataOptions opt;
    opt.project = false;
    const QPData d = build_qp_data(spec, it, opt);
    for (int k : {1, N / 2, N - 1}) {
      Vec z(n + m);
      z << it.x[k], it.u[k];
      const Vec yx = it.y[k].head(d.cx[k].size());
      auto stage_lagrangian = [&](const Vec& zz) {
        const Vec x = zz.head(n), u = zz.tail(m);
        return spec.cost->stage(k, x, u) - yx.dot(spec.state_constraints_at(k, x, it.chart[k])) +
               d.nu[k + 1].dot(spec.dynamics->step(k, x, u));
      };
      const Mat Hfd = fd_hessian(stage_lagrangian, z);
      EXPECT_LT(testutil::rel_err(d.Z_raw[k], Hfd), 1e-4) << name << " k=" << k;
    }
    auto terminal_lagrangian = [&](const Vec& x) {
      const Vec yx = it.y[N].head(d.cx[N].size());
      return spec.cost->terminal(x) - yx.dot(spec.state_constraints_at(N, x, it.chart[N]));
    };
    EXPECT_LT(testutil::rel_err(d.Z_raw[N], fd_hessian(terminal_lagrangian, it.x[N])), 1e-4) << name;
  }
}

TEST(QPData, ReducedGradientMatchesObjectiveDifferences) {
  const Environment env = make_environment("car", 2);
  const ProblemSpec& spec = env.spec;
  std::mt19937_64 rng(24);
  const Iterate it = random_iterate(env, rng, 0.3, 0.0);
  const QPData d = build_qp_data(spec, it);
  const VecSeq g = reduced_objective_gradient(d);
  const int N = spec.horizon, m = spec.m();
  Vec flat(N * m);
  for (int k = 0; k < N; ++k) flat.segment(k * m, m) = it.u[k];
  auto J = [&](const Vec& f) {
    VecSeq u(N);
    for (int k = 0; k < N; ++k) u[k] = f.segment(k * m, m);
    return Vec::Constant(1, evaluate_objective(spec, rollout_open_loop(spec, u), u));
  };
  const Mat fd = testutil::fd4_jacobian(J, flat, 1e-4);
  for (int k = 0; k < N; ++k) {
    EXPECT_LT((g[k] - fd.block(0, k * m, 1, m).transpose()).norm(), 1e-6 * (1 + g[k].norm()));
  }
}

TEST(QPData, SerialAndParallelAreIdentical) {
  std::mt19937_64 rng(25);
  for (const std::string name : {"car", "quadpend"}) {
    const Environment env = make_environment(name, 1);
    const Iterate it = random_iterate(env, rng, 0.2, 1.0);
    QpDataOptions ser, par;
    ser.parallel = false;
    par.parallel = true;
    const QPData a = build_qp_data(env.spec, it, ser);
    const QPData b = build_qp_data(env.spec, it, par);
    for (int k = 0; k <= env.spec.horizon; ++k) {
      EXPECT_TRUE(a.Z[k] == b.Z[k]);
      EXPECT_TRUE(a.q[k] == b.q[k]);
      EXPECT_TRUE(a.nu[k] == b.nu[k]);
      if (k < env.spec.horizon) EXPECT_TRUE(a.A[k] == b.A[k]);
    }
  }
}

TEST(TailQp, FullStartIsTheSubproblem) {
  const Environment env = make_environment("car", 1);
  const QPData d = build_qp_data(env.spec, Iterate::from_controls(env.spec, env.u_init));
  const OcpQp a = to_ocp_qp(d);
  const OcpQp b = build_tail_qp(d, 0, Vec::Zero(d.n));
  ASSERT_EQ(a.horizon, b.horizon);
  for (int k = 0; k <= a.horizon; ++k) {
    EXPECT_TRUE(a.Z[k] == b.Z[k]);
    EXPECT_TRUE(a.C[k] == b.C[k]);
    EXPECT_TRUE(a.h[k] == b.h[k]);
  }
}

TEST(TailQp, LastStepHasOneControlBlock) {
  const Environment env = make_environment("car", 1);
  const QPData d = build_qp_data(env.spec, Iterate::from_controls(env.spec, env.u_init));
  const OcpQp q = build_tail_qp(d, d.horizon - 1, Vec::Ones(d.n));
  EXPECT_EQ(q.horizon, 1);
  EXPECT_EQ(q.B.size(), 1u);
  EXPECT_TRUE(q.Z[1] == d.Z[d.horizon]);
  EXPECT_THROW(build_tail_qp(d, d.horizon, Vec::Zero(d.n)), DimensionError);
}

TEST(TailQp, ValueAtPredictedStateEqualsFullTailCost) {
  const Environment env = make_environment("car", 1);
  const QPData d = build_qp_data(env.spec, Iterate::from_controls(env.spec, env.u_init));
  const OcpQp full = to_ocp_qp(d);
  QpOptions opt;
  opt.tol = 1e-11;
  const OcpQpSolution sol = solve_ocp_qp(full, opt);
  ASSERT_EQ(sol.status, QpStatus::optimal);
  for (int k : {5, 20, 39}) {
    const OcpQp tail = build_tail_qp(d, k, sol.x[k]);
    const OcpQpSolution ts = solve_ocp_qp(tail, opt);
    ASSERT_EQ(ts.status, QpStatus::optimal);
    const VecSeq xt(sol.x.begin() + k, sol.x.end());
    const VecSeq ut(sol.u.begin() + k, sol.u.end());
    const double expected = tail.objective(xt, ut);
    EXPECT_NEAR(ts.objective, expected, 1e-7 * (1 + std::abs(expected))) << "k=" << k;
  }
}

TEST(LinearRollout, MatchesManualPropagation) {
  std::mt19937_64 rng(26);
  auto p = testutil::random_lq_problem(rng, 3, 2, 4);
  const Iterate it = Iterate::from_controls(p.spec, VecSeq(4, Vec::Zero(2)));
  const QPData d = build_qp_data(p.spec, it);
  VecSeq du(4);
  for (auto& v : du) v = testutil::random_vec(rng, 2);
  const VecSeq dx = linear_rollout(d, du);
  Vec x = Vec::Zero(3);
  for (int k = 0; k < 4; ++k) x = p.A[k] * x + p.B[k] * du[k];
  EXPECT_LT((dx[4] - x).norm(), 1e-12);
}
