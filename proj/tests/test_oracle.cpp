#include "clsqp/oracle.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace clsqp;

TEST(FdJacobian, AffineMapIsExact) {
  std::mt19937_64 rng(71);
  const Mat M = testutil::random_mat(rng, 4, 6);
  const Vec b = testutil::random_vec(rng, 4);
  const Vec x = testutil::random_vec(rng, 6);
  for (int r : {0, 1}) {
    FDConfig cfg;
    cfg.richardson = r;
    const Mat J = fd_jacobian([&](const Vec& z) { return Vec(M * z + b); }, x, cfg);
    EXPECT_LT(testutil::rel_err(J, M), 1e-10);
  }
}

TEST(FdJacobian, SmoothMapMatchesAnalytic) {
  Vec x(2);
  x << 0.3, -1.2;
  auto f = [](const Vec& z) {
    Vec out(2);
    out << std::sin(z(0)) * z(1), std::exp(z(0) + z(1));
    return out;
  };
  Mat J(2, 2);
  J << std::cos(x(0)) * x(1), std::sin(x(0)), std::exp(x(0) + x(1)), std::exp(x(0) + x(1));
  FDConfig cfg;
  cfg.h = 1e-3;
  EXPECT_LT(testutil::rel_err(fd_jacobian(f, x, cfg), J), 1e-9);
  cfg.richardson = 0;
  EXPECT_LT(testutil::rel_err(fd_jacobian(f, x, cfg), J), 1e-6);
}

TEST(FdJacobian, SerialAndParallelAgree) {
  std::mt19937_64 rng(72);
  const Mat M = testutil::random_mat(rng, 3, 5);
  auto f = [&](const Vec& z) { return Vec((M * z).array().sin()); };
  const Vec x = testutil::random_vec(rng, 5);
  FDConfig ser, par;
  ser.parallel = false;
  EXPECT_TRUE(fd_jacobian(f, x, ser) == fd_jacobian(f, x, par));
}

TEST(FdConfig, RejectsBadSettings) {
  FDConfig cfg;
  cfg.h = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.h = 1e-5;
  cfg.richardson = 2;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(FdPolicyJacobian, HalvesStepNearUndefinedSet) {
  Vec x(2);
  x << 0.0, 0.5;
  const PartialMap policy = [](const Vec& z) -> std::optional<Vec> {
    if (z(1) > 0.508) return std::nullopt;
    return Vec::Constant(1, 2.0 * z(0) - z(1));
  };
  FDConfig cfg;
  cfg.h = 1e-2;
  cfg.parallel = false;
  const FdPolicyResult r = fd_policy_jacobian(policy, x, cfg);
  ASSERT_TRUE(r.ok) << r.message;
  EXPECT_LT(r.h, 1.5e-2);
  EXPECT_NEAR(r.J(0, 0), 2.0, 1e-10);
  EXPECT_NEAR(r.J(0, 1), -1.0, 1e-10);
}

TEST(FdPolicyJacobian, ReportsUndefinedCentre) {
  const PartialMap policy = [](const Vec&) -> std::optional<Vec> { return std::nullopt; };
  const FdPolicyResult r = fd_policy_jacobian(policy, Vec::Zero(2));
  EXPECT_FALSE(r.ok);
  EXPECT_FALSE(r.message.empty());
}

TEST(TailQpPolicy, LqrPolicyIsAffineWithRiccatiGain) {
  std::mt19937_64 rng(73);
  auto p = testutil::random_lq_problem(rng, 3, 2, 6);
  const Iterate it = Iterate::from_controls(p.spec, VecSeq(6, Vec::Zero(2)));
  QpDataOptions dopt;
  dopt.eps_psd = 1e-12;
  const QPData d = build_qp_data(p.spec, it, dopt);
  const MatSeq K = testutil::riccati_oracle(p.A, p.B, p.Q, p.R, p.QN);
  for (int k : {0, 3, 5}) {
    FDConfig cfg;
    cfg.h = 1e-2;
    cfg.parallel = false;
    const FdPolicyResult r = fd_policy_jacobian(tail_qp_policy(d, k), testutil::random_vec(rng, 3), cfg);
    ASSERT_TRUE(r.ok);
    EXPECT_LT(testutil::rel_err(r.J, K[k]), 1e-7) << "k=" << k;
  }
}

TEST(TailQpValue, QuadraticInTheInitialPerturbation) {
  std::mt19937_64 rng(74);
  auto p = testutil::random_lq_problem(rng, 2, 1, 5);
  const Iterate it = Iterate::from_controls(p.spec, VecSeq(5, Vec::Zero(1)));
  QpDataOptions dopt;
  dopt.eps_psd = 1e-12;
  const QPData d = build_qp_data(p.spec, it, dopt);
  MatSeq P;
  testutil::riccati_oracle(p.A, p.B, p.Q, p.R, p.QN, &P);
  const auto value = tail_qp_value(d, 2);
  const Vec a = testutil::random_vec(rng, 2), b = testutil::random_vec(rng, 2);
  // second difference of a quadratic recovers its Hessian along b
  const double v0 = *value(a), vp = *value(Vec(a + b)), vm = *value(Vec(a - b));
  EXPECT_NEAR(vp - 2 * v0 + vm, b.dot(P[2] * b), 1e-7 * (1 + std::abs(v0)));
}

TEST(RegionSampling, HalfSpaceAcceptsAboutHalf) {
  const CriticalRegion r{Mat::Identity(1, 3), Vec::Zero(1)};
  const RegionSamples s = sample_critical_region(r, Vec::Zero(3), 2000, 1.0, 5);
  ASSERT_TRUE(s.ok) << s.message;
  EXPECT_EQ(s.points.size(), 2000u);
  EXPECT_NEAR(s.acceptance_rate, 0.5, 0.03);
  for (const Vec& p : s.points) {
    EXPECT_LE(p(0), 0.0);
    EXPECT_LE(p.norm(), 1.0);
  }
}

TEST(RegionSampling, WholeSpaceAcceptsEverything) {
  const CriticalRegion r{Mat::Zero(0, 2), Vec::Zero(0)};
  const RegionSamples s = sample_critical_region(r, Vec::Ones(2), 100, 0.5, 6);
  ASSERT_TRUE(s.ok);
  EXPECT_EQ(s.acceptance_rate, 1.0);
  EXPECT_EQ(s.radius, 0.5);
}

TEST(RegionSampling, ShrinksRadiusForThinRegions) {
  // a slab of half-width 1e-3 through the centre
  Mat G(2, 2);
  G << 1.0, 0.0, -1.0, 0.0;
  const CriticalRegion r{G, Vec::Constant(2, 1e-3)};
  const RegionSamples s = sample_critical_region(r, Vec::Zero(2), 50, 1.0, 7);
  ASSERT_TRUE(s.ok) << s.message;
  EXPECT_LT(s.radius, 1.0);
  EXPECT_GE(s.acceptance_rate, 0.01);
  for (const Vec& p : s.points) EXPECT_TRUE(r.contains(p, 0.0));
}

TEST(RegionSampling, CentreOutsideFails) {
  const CriticalRegion r{Mat::Identity(1, 1), Vec::Constant(1, -1.0)};
  const RegionSamples s = sample_critical_region(r, Vec::Zero(1), 10, 1.0);
  EXPECT_FALSE(s.ok);
}

TEST(MeritDerivative, SecondOrderAccurate) {
  auto phi = [](double a) { return std::exp(-a) + a * a * a; };
  const double e1 = std::abs(fd_merit_derivative(phi, 1e-2) + 1.0);
  const double e2 = std::abs(fd_merit_derivative(phi, 5e-3) + 1.0);
  EXPECT_NEAR(e1 / e2, 4.0, 0.2);
  EXPECT_THROW(fd_merit_derivative(phi, -1.0), Error);
}
