#include "clsqp/environments.hpp"
#include "clsqp/rollout.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace clsqp;

namespace {

VecSeq random_controls(std::mt19937_64& rng, int N, int m, double scale) {
  VecSeq u(N);
  for (auto& v : u) v = testutil::random_vec(rng, m, scale);
  return u;
}

MatSeq lq_weights(const testutil::LqProblem& p) {
  const int N = p.spec.horizon, n = p.spec.n(), m = p.spec.m();
  MatSeq W(N + 1);
  for (int k = 0; k < N; ++k) {
    W[k] = Mat::Zero(n + m, n + m);
    W[k].topLeftCorner(n, n) = p.Q[k];
    W[k].bottomRightCorner(m, m) = p.R[k];
  }
  W[N] = p.QN;
  return W;
}

}  // namespace

TEST(ClosedLoopRollout, ZeroGainsIsOpenLoop) {
  const Environment env = make_environment("car", 1);
  std::mt19937_64 rng(41);
  const Iterate it = Iterate::from_controls(env.spec, random_controls(rng, 40, 2, 0.2));
  const VecSeq du = random_controls(rng, 40, 2, 0.1);
  const VecSeq dx(41, Vec::Zero(4));
  const double alpha = 0.7;
  const RolloutResult r = closed_loop_rollout(env.spec, it, du, dx, GainSchedule::zeros(40, 4, 2), alpha);
  VecSeq u(40);
  for (int k = 0; k < 40; ++k) u[k] = it.u[k] + alpha * du[k];
  const VecSeq x = rollout_open_loop(env.spec, u);
  for (int k = 0; k <= 40; ++k) EXPECT_LT((r.x[k] - x[k]).norm(), 1e-12);
}

TEST(ClosedLoopRollout, LinearModelReproducesPrediction) {
  std::mt19937_64 rng(42);
  auto p = testutil::random_lq_problem(rng, 3, 2, 6);
  const Iterate it = Iterate::from_controls(p.spec, random_controls(rng, 6, 2, 1.0));
  const QPData d = build_qp_data(p.spec, it);
  const VecSeq du = random_controls(rng, 6, 2, 1.0);
  const VecSeq dx = linear_rollout(d, du);
  GainSchedule g = GainSchedule::zeros(6, 3, 2);
  for (auto& K : g.K) K = testutil::random_mat(rng, 2, 3);
  const RolloutResult r = closed_loop_rollout(p.spec, it, du, dx, g, 1.0);
  for (int k = 0; k <= 6; ++k) EXPECT_LT((r.dx[k] - dx[k]).norm(), 1e-10);
}

TEST(ClosedLoopRollout, ControlsAreClipped) {
  const Environment env = make_environment("car", 1);
  const Iterate it = Iterate::from_controls(env.spec, env.u_init);
  const VecSeq du(40, Vec::Constant(2, 100.0));
  const RolloutResult r = closed_loop_rollout(env.spec, it, du, VecSeq(41, Vec::Zero(4)), GainSchedule::zeros(40, 4, 2), 1.0);
  for (const Vec& u : r.u) {
    EXPECT_TRUE((u.array() <= env.spec.u_upper.array()).all());
    EXPECT_TRUE((u.array() >= env.spec.u_lower.array()).all());
    EXPECT_TRUE(u == env.spec.u_upper);
  }
}

TEST(ClosedLoopRollout, DivergenceThrowsWithStep) {
  ProblemSpec spec;
  spec.horizon = 10;
  spec.x0 = Vec::Ones(1);
  spec.dynamics = std::make_shared<LinearModel>(MatSeq{Mat::Constant(1, 1, 1e200)}, MatSeq{Mat::Identity(1, 1)});
  spec.u_lower = Vec::Constant(1, -1.0);
  spec.u_upper = Vec::Constant(1, 1.0);
  Iterate it;
  it.u.assign(10, Vec::Zero(1));
  it.x.assign(11, Vec::Zero(1));
  it.x[0] = spec.x0;
  try {
    closed_loop_rollout(spec, it, VecSeq(10, Vec::Zero(1)), VecSeq(11, Vec::Zero(1)), GainSchedule::zeros(10, 1, 1), 1.0);
    FAIL() << "expected DivergedRollout";
  } catch (const DivergedRollout& e) {
    EXPECT_EQ(e.step(), 2);
  }
}

TEST(RiccatiGains, MatchClassicalRecursion) {
  std::mt19937_64 rng(43);
  auto p = testutil::random_lq_problem(rng, 4, 2, 12);
  const MatSeq K = riccati_gains(p.A, p.B, lq_weights(p), 1e-9);
  const MatSeq Kref = testutil::riccati_oracle(p.A, p.B, p.Q, p.R, p.QN);
  for (int k = 0; k < 12; ++k) EXPECT_LT(testutil::rel_err(K[k], Kref[k]), 1e-10);
}

TEST(RiccatiGains, ZeroWeightsGiveZeroGains) {
  std::mt19937_64 rng(44);
  auto p = testutil::random_lq_problem(rng, 3, 1, 5);
  MatSeq W(6, Mat::Zero(4, 4));
  W[5] = Mat::Zero(3, 3);
  for (const Mat& K : riccati_gains(p.A, p.B, W, 1e-6)) EXPECT_EQ(K.norm(), 0.0);
}

TEST(RiccatiGains, ClosedLoopContractsFasterThanOpenLoop) {
  std::mt19937_64 rng(45);
  for (int t = 0; t < 10; ++t) {
    const int n = 3, m = 2, N = 30;
    Mat A0, B0;
    testutil::random_dynamics(rng, n, m, A0, B0);
    A0 *= 1.2;
    const MatSeq A(N, A0), B(N, B0);
    MatSeq W(N + 1);
    for (int k = 0; k < N; ++k) W[k] = Mat::Identity(n + m, n + m);
    W[N] = Mat::Identity(n, n);
    const MatSeq K = riccati_gains(A, B, W, 1e-9);
    Mat Pcl = Mat::Identity(n, n), Pol = Mat::Identity(n, n);
    for (int k = 0; k < N / 2; ++k) {
      Pcl = (A[k] + B[k] * K[k]) * Pcl;
      Pol = A[k] * Pol;
    }
    EXPECT_LT(Pcl.norm(), Pol.norm());
  }
}

TEST(TvlqrFallback, LqrProblemGivesRiccatiGains) {
  std::mt19937_64 rng(46);
  auto p = testutil::random_lq_problem(rng, 3, 2, 8);
  const Iterate it = Iterate::from_controls(p.spec, random_controls(rng, 8, 2, 1.0));
  const QPData d = build_qp_data(p.spec, it);
  const GainSchedule g = tvlqr_fallback_gains(p.spec, it, d, 1e-9);
  const MatSeq Kref = testutil::riccati_oracle(p.A, p.B, p.Q, p.R, p.QN);
  for (int k = 0; k < 8; ++k) {
    EXPECT_LT(testutil::rel_err(g.K[k], Kref[k]), 1e-10);
    EXPECT_EQ(g.source[k], GainSource::tvlqr);
  }
}

TEST(GainSource, Names) {
  EXPECT_EQ(to_string(GainSource::exact), "exact");
  EXPECT_EQ(to_string(GainSource::barrier), "barrier");
  EXPECT_EQ(to_string(GainSource::tvlqr), "tvlqr");
  EXPECT_EQ(to_string(GainSource::zero), "zero");
}
