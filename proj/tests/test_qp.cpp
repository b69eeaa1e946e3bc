#include "clsqp/qp.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace clsqp;

namespace {

QpInstance box_qp(const Mat& H, const Vec& g, const Vec& lo, const Vec& hi) {
  const int n = static_cast<int>(g.size());
  QpInstance q;
  q.H = H;
  q.g = g;
  q.A_eq = Mat::Zero(0, n);
  q.b_eq = Vec::Zero(0);
  q.G = Mat::Zero(2 * n, n);
  q.G.topRows(n) = Mat::Identity(n, n);
  q.G.bottomRows(n) = -Mat::Identity(n, n);
  q.h.resize(2 * n);
  q.h << hi, -lo;
  return q;
}

QpInstance scalar_qp(double H, double g, std::vector<std::pair<double, double>> rows) {
  QpInstance q;
  q.H = Mat::Constant(1, 1, H);
  q.g = Vec::Constant(1, g);
  q.A_eq = Mat::Zero(0, 1);
  q.b_eq = Vec::Zero(0);
  q.G.resize(static_cast<int>(rows.size()), 1);
  q.h.resize(static_cast<int>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    q.G(i, 0) = rows[i].first;
    q.h(i) = rows[i].second;
  }
  return q;
}

OcpQp random_ocp(std::mt19937_64& rng, int n, int m, int N, double bound) {
  OcpQp qp;
  qp.horizon = N;
  qp.x0 = testutil::random_vec(rng, n);
  for (int k = 0; k < N; ++k) {
    Mat A, B;
    testutil::random_dynamics(rng, n, m, A, B);
    qp.A.push_back(A);
    qp.B.push_back(B);
    qp.d.push_back(testutil::random_vec(rng, n, 0.1));
    qp.Z.push_back(testutil::random_spd(rng, n + m, 0.1));
    qp.q.push_back(testutil::random_vec(rng, n));
    qp.r.push_back(testutil::random_vec(rng, m));
    Mat C = Mat::Zero(2 * m, n + m);
    C.block(0, n, m, m) = Mat::Identity(m, m);
    C.block(m, n, m, m) = -Mat::Identity(m, m);
    qp.C.push_back(C);
    qp.h.push_back(Vec::Constant(2 * m, bound));
  }
  qp.Z.push_back(testutil::random_spd(rng, n, 1.0));
  qp.q.push_back(testutil::random_vec(rng, n));
  qp.C.push_back(Mat::Zero(0, n));
  qp.h.push_back(Vec::Zero(0));
  return qp;
}

}  // namespace

TEST(SolveQp, UnconstrainedScalar) {
  const QpSolution s = solve_qp(scalar_qp(1.0, -1.0, {}));
  ASSERT_EQ(s.status, QpStatus::optimal);
  EXPECT_NEAR(s.z(0), 1.0, 1e-10);
}

TEST(SolveQp, ActiveLowerBoundScalar) {
  // z >= 2 written as -z <= -2
  const QpSolution s = solve_qp(scalar_qp(1.0, 0.0, {{-1.0, -2.0}}));
  ASSERT_EQ(s.status, QpStatus::optimal);
  EXPECT_NEAR(s.z(0), 2.0, 1e-9);
  EXPECT_NEAR(s.lambda_ineq(0), 2.0, 1e-8);
}

TEST(SolveQp, RandomBoxQpMatchesProjectedGradient) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 5; ++t) {
    const Mat H = testutil::random_spd(rng, 20, 0.5);
    const Vec g = testutil::random_vec(rng, 20, 3.0);
    const Vec lo = Vec::Constant(20, -1.0), hi = Vec::Constant(20, 1.0);
    const QpSolution s = solve_qp(box_qp(H, g, lo, hi));
    ASSERT_EQ(s.status, QpStatus::optimal);
    const Vec ref = testutil::projected_gradient_box(H, g, lo, hi);
    EXPECT_LT((s.z - ref).lpNorm<Eigen::Infinity>(), 1e-6);
  }
}

TEST(SolveQp, RandomInequalityQpMatchesActiveSetEnumeration) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const int n = 3, p = 6;
    const Mat H = testutil::random_spd(rng, n, 0.3);
    const Vec g = testutil::random_vec(rng, n, 2.0);
    const Mat G = testutil::random_mat(rng, p, n);
    const Vec h = testutil::random_vec(rng, p).cwiseAbs() + Vec::Constant(p, 0.1);
    QpInstance q;
    q.H = H;
    q.g = g;
    q.A_eq = Mat::Zero(0, n);
    q.b_eq = Vec::Zero(0);
    q.G = G;
    q.h = h;
    const QpSolution s = solve_qp(q);
    ASSERT_EQ(s.status, QpStatus::optimal);
    const Vec ref = testutil::enumerate_active_sets(H, g, G, h);
    ASSERT_EQ(ref.size(), n);
    EXPECT_LT((s.z - ref).lpNorm<Eigen::Infinity>(), 1e-8);
  }
}

TEST(SolveQp, EqualityConstrainedMatchesKktSolve) {
  std::mt19937_64 rng(13);
  const int n = 5, me = 2;
  QpInstance q;
  q.H = testutil::random_spd(rng, n);
  q.g = testutil::random_vec(rng, n);
  q.A_eq = testutil::random_mat(rng, me, n);
  q.b_eq = testutil::random_vec(rng, me);
  q.G = Mat::Zero(0, n);
  q.h = Vec::Zero(0);
  Mat K = Mat::Zero(n + me, n + me);
  K.topLeftCorner(n, n) = q.H;
  K.topRightCorner(n, me) = q.A_eq.transpose();
  K.bottomLeftCorner(me, n) = q.A_eq;
  Vec rhs(n + me);
  rhs << -q.g, q.b_eq;
  const Vec ref = K.fullPivLu().solve(rhs).head(n);
  const QpSolution s = solve_qp(q);
  ASSERT_EQ(s.status, QpStatus::optimal);
  EXPECT_LT((s.z - ref).norm(), 1e-9);
}

TEST(SolveQp, DetectsInfeasibility) {
  // z <= -1 and z >= 1
  const QpSolution s = solve_qp(scalar_qp(1.0, 0.0, {{1.0, -1.0}, {-1.0, -1.0}}));
  EXPECT_EQ(s.status, QpStatus::infeasible);
}

TEST(SolveQp, RejectsNonFiniteData) {
  QpInstance q = scalar_qp(1.0, std::nan(""), {});
  EXPECT_THROW(q.validate(), Error);
  EXPECT_THROW(solve_qp(q), Error);
}

TEST(SolveQp, MuTargetStopsOnCentralPath) {
  // min 1/2 z^2 - z s.t. z <= 0.5; the barrier minimizer solves z - 1 + mu / (0.5 - z) = 0
  const double mu = 1e-3;
  QpOptions opt;
  opt.mu_target = mu;
  opt.polish = false;
  const QpSolution s = solve_qp(scalar_qp(1.0, -1.0, {{1.0, 0.5}}), opt);
  ASSERT_EQ(s.status, QpStatus::optimal);
  double lo = -10.0, hi = 0.5;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid - 1.0 + mu / (0.5 - mid) < 0.0 ? lo : hi) = mid;
  }
  EXPECT_NEAR(s.z(0), lo, 1e-8);
  EXPECT_NEAR(s.slack(0) * s.lambda_ineq(0), mu, 1e-8);
}

TEST(ActiveSet, InteriorSolutionHasNoActiveRows) {
  const QpInstance q = box_qp(Mat::Identity(2, 2), Vec::Constant(2, -0.1), Vec::Constant(2, -1), Vec::Constant(2, 1));
  const QpSolution s = solve_qp(q);
  const ActiveSetInfo a = active_set(s, q, 1e-7);
  EXPECT_TRUE(a.indices.empty());
  EXPECT_TRUE(a.licq);
}

TEST(ActiveSet, SingleFace) {
  Vec g(2);
  g << -3.0, 0.1;
  const QpInstance q = box_qp(Mat::Identity(2, 2), g, Vec::Constant(2, -1), Vec::Constant(2, 1));
  const QpSolution s = solve_qp(q);
  const ActiveSetInfo a = active_set(s, q, 1e-7);
  ASSERT_EQ(a.indices.size(), 1u);
  EXPECT_EQ(a.indices[0], 0);
  EXPECT_TRUE(a.licq);
  EXPECT_TRUE(a.strict_complementarity);
}

TEST(ActiveSet, DoubledRowFailsLicq) {
  const QpInstance q = scalar_qp(1.0, -3.0, {{1.0, 1.0}, {1.0, 1.0}});
  const QpSolution s = solve_qp(q);
  ASSERT_EQ(s.status, QpStatus::optimal);
  const ActiveSetInfo a = active_set(s, q, 1e-7);
  EXPECT_EQ(a.indices.size(), 2u);
  EXPECT_FALSE(a.licq);
}

TEST(OcpQp, RiccatiBackendMatchesDense) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 5; ++t) {
    const OcpQp qp = random_ocp(rng, 3, 2, 8, 0.3);
    QpOptions opt;
    opt.tol = 1e-10;
    const OcpQpSolution a = solve_ocp_qp(qp, opt);
    const QpInstance dense = to_dense(qp);
    const QpSolution b = solve_qp(dense, opt);
    ASSERT_EQ(a.status, QpStatus::optimal);
    ASSERT_EQ(b.status, QpStatus::optimal);
    for (int k = 0; k < qp.horizon; ++k) {
      EXPECT_LT((a.u[k] - b.z.segment(ocp_u_offset(qp, k), 2)).norm(), 1e-7);
      EXPECT_LT((a.x[k] - b.z.segment(ocp_x_offset(qp, k), 3)).norm(), 1e-7);
    }
    EXPECT_NEAR(a.objective, b.objective, 1e-7 * (1 + std::abs(b.objective)));
  }
}

TEST(OcpQp, UnconstrainedMatchesRiccati) {
  std::mt19937_64 rng(15);
  auto p = testutil::random_lq_problem(rng, 3, 2, 6);
  OcpQp qp;
  qp.horizon = 6;
  qp.x0 = p.spec.x0;
  qp.A = p.A;
  qp.B = p.B;
  for (int k = 0; k < 6; ++k) {
    qp.d.push_back(Vec::Zero(3));
    Mat Z = Mat::Zero(5, 5);
    Z.topLeftCorner(3, 3) = p.Q[k];
    Z.bottomRightCorner(2, 2) = p.R[k];
    qp.Z.push_back(Z);
    qp.q.push_back(Vec::Zero(3));
    qp.r.push_back(Vec::Zero(2));
    qp.C.push_back(Mat::Zero(0, 5));
    qp.h.push_back(Vec::Zero(0));
  }
  qp.Z.push_back(p.QN);
  qp.q.push_back(Vec::Zero(3));
  qp.C.push_back(Mat::Zero(0, 3));
  qp.h.push_back(Vec::Zero(0));
  const MatSeq K = testutil::riccati_oracle(p.A, p.B, p.Q, p.R, p.QN);
  const OcpQpSolution s = solve_ocp_qp(qp);
  ASSERT_EQ(s.status, QpStatus::optimal);
  for (int k = 0; k < 6; ++k) EXPECT_LT((s.u[k] - K[k] * s.x[k]).norm(), 1e-8);
}
