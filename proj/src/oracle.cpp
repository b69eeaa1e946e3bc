#include "clsqp/oracle.hpp"

#include <cmath>
#include <random>

namespace clsqp {

void FDConfig::validate() const {
  if (!(h > 0.0)) throw Error("FD step must be positive");
  if (richardson < 0 || richardson > 1) throw Error("Richardson level must be 0 or 1");
}

namespace {

Vec central(const VectorMap& f, const Vec& x, int j, double h) {
  Vec xp = x, xm = x;
  xp(j) += h;
  xm(j) -= h;
  return (f(xp) - f(xm)) / (2.0 * h);
}

}  // namespace

Mat fd_jacobian(const VectorMap& f, const Vec& x, const FDConfig& cfg) {
  cfg.validate();
  const double h = cfg.h * (1.0 + x.lpNorm<Eigen::Infinity>());
  const Eigen::Index rows = f(x).size();
  Mat J(rows, x.size());
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const Vec d1 = central(f, x, static_cast<int>(j), h);
    if (cfg.richardson == 0) {
      J.col(j) = d1;
    } else {
      const Vec d2 = central(f, x, static_cast<int>(j), 0.5 * h);
      J.col(j) = (4.0 * d2 - d1) / 3.0;
    }
  }
  return J;
}

FdPolicyResult fd_policy_jacobian(const PartialMap& policy, const Vec& x, const FDConfig& cfg) {
  cfg.validate();
  FdPolicyResult res;
  const auto base = policy(x);
  if (!base) {
    res.message = "policy undefined at the centre";
    return res;
  }
  double h = cfg.h * (1.0 + x.lpNorm<Eigen::Infinity>());
  for (int attempt = 0; attempt <= 3; ++attempt, h *= 0.5) {
    Mat J(base->size(), x.size());
    bool defined = true;
    const int levels = cfg.richardson + 1;
#pragma omp parallel for schedule(dynamic) if (cfg.parallel)
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      Vec d[2];
      for (int l = 0; l < levels; ++l) {
        const double hl = l == 0 ? h : 0.5 * h;
        Vec xp = x, xm = x;
        xp(j) += hl;
        xm(j) -= hl;
        const auto fp = policy(xp);
        const auto fm = policy(xm);
        if (!fp || !fm) {
#pragma omp atomic write
          defined = false;
          break;
        }
        d[l] = (*fp - *fm) / (2.0 * hl);
      }
      if (d[levels - 1].size() == 0) continue;
      J.col(j) = levels == 1 ? d[0] : Vec((4.0 * d[1] - d[0]) / 3.0);
    }
    if (defined) {
      res.ok = true;
      res.J = J;
      res.h = h;
      return res;
    }
  }
  res.message = "perturbed problem undefined after 3 step reductions";
  return res;
}

namespace {

std::optional<QpSolution> solve_tail(const QPData& data, int k, const Vec& dx, double tol, OcpQp& qp) {
  qp = build_tail_qp(data, k, dx);
  QpOptions opt;
  opt.tol = tol;
  opt.max_iter = 300;
  opt.polish = true;
  QpSolution sol = solve_qp(to_dense(qp), opt);
  if (sol.status != QpStatus::optimal) return std::nullopt;
  return sol;
}

}  // namespace

PartialMap tail_qp_policy(const QPData& data, int k, double tol) {
  return [&data, k, tol](const Vec& dx) -> std::optional<Vec> {
    OcpQp qp;
    const auto sol = solve_tail(data, k, dx, tol, qp);
    if (!sol) return std::nullopt;
    return Vec(sol->z.segment(ocp_u_offset(qp, 0), qp.m()));
  };
}

std::function<std::optional<double>(const Vec&)> tail_qp_value(const QPData& data, int k, double tol) {
  return [&data, k, tol](const Vec& dx) -> std::optional<double> {
    OcpQp qp;
    const auto sol = solve_tail(data, k, dx, tol, qp);
    if (!sol) return std::nullopt;
    return sol->objective;
  };
}

RegionSamples sample_critical_region(const CriticalRegion& region, const Vec& center, int n_samples,
                                     double radius, unsigned seed, double tol) {
  RegionSamples out;
  if (region.rows() > 0 && !region.contains(center, 1e-8 * (1.0 + region.h.cwiseAbs().maxCoeff()))) {
    out.message = "centre is outside the region";
    return out;
  }
  const int n = static_cast<int>(center.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  auto draw = [&](double r) {
    Vec d(n);
    for (int i = 0; i < n; ++i) d(i) = normal(rng);
    const double nd = d.norm();
    if (nd > 0.0) d /= nd;
    return Vec(center + r * std::pow(unif(rng), 1.0 / n) * d);
  };
  double r = radius;
  for (int shrink = 0; shrink <= 4; ++shrink, r *= 0.1) {
    out.points.clear();
    int tries = 0;
    const int max_tries = std::max(100 * n_samples, 1000);
    while (static_cast<int>(out.points.size()) < n_samples && tries < max_tries) {
      ++tries;
      const Vec p = draw(r);
      if (region.contains(p, tol)) out.points.push_back(p);
    }
    out.attempts += tries;
    out.radius = r;
    out.acceptance_rate = static_cast<double>(out.points.size()) / tries;
    if (out.acceptance_rate >= 0.01 && static_cast<int>(out.points.size()) == n_samples) {
      out.ok = true;
      return out;
    }
  }
  out.message = "acceptance rate " + std::to_string(out.acceptance_rate) + " at radius " + std::to_string(out.radius);
  return out;
}

double fd_merit_derivative(const std::function<double(double)>& phi, double h) {
  if (!(h > 0.0)) throw Error("FD step must be positive");
  return (-3.0 * phi(0.0) + 4.0 * phi(h) - phi(2.0 * h)) / (2.0 * h);
}

}  // namespace clsqp
