#include "clsqp/merit.hpp"

#include <cmath>
#include <limits>

namespace clsqp {

VecSeq init_slacks(const VecSeq& c, const VecSeq& y, const Vec& rho) {
  VecSeq s(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (rho(k) == 0.0) {
      s[k] = c[k].cwiseMax(0.0);
    } else {
      s[k] = (c[k] - y[k] / rho(k)).cwiseMax(0.0);
    }
  }
  return s;
}

VecSeq slack_directions(const QPData& d, const VecSeq& dx, const VecSeq& du, const VecSeq& s) {
  const int N = d.horizon;
  VecSeq ds(N + 1);
  for (int k = 0; k <= N; ++k) {
    const Vec lin_x = d.cx[k] + d.Jx[k] * dx[k];
    if (k < N) {
      const Vec lin_u = d.cu[k] + d.Ju * du[k];
      ds[k].resize(lin_x.size() + lin_u.size());
      ds[k] << lin_x, lin_u;
      ds[k] -= s[k];
    } else {
      ds[k] = lin_x - s[k];
    }
  }
  return ds;
}

double merit_value(const ProblemSpec& spec, const VecSeq& x, const VecSeq& u, const VecSeq& y, const VecSeq& s,
                   const Vec& rho, const VecSeq& chart) {
  const VecSeq c = evaluate_constraints(spec, x, u, chart);
  double phi = evaluate_objective(spec, x, u);
  for (int k = 0; k <= spec.horizon; ++k) {
    const Vec r = c[k] - s[k];
    phi += -y[k].dot(r) + 0.5 * rho(k) * r.squaredNorm();
  }
  return std::isfinite(phi) ? phi : std::numeric_limits<double>::infinity();
}

double merit_directional_derivative(const MeritSnapshot& snap, const Vec& rho) {
  double v = snap.g_dx;
  for (std::size_t k = 0; k < snap.c.size(); ++k) {
    const Vec r = snap.c[k] - snap.s[k];
    v += (2.0 * snap.y[k] - snap.yhat[k]).dot(r) - rho(k) * r.squaredNorm();
  }
  return v;
}

Vec update_penalties(const MeritSnapshot& snap, const Vec& rho) {
  if (merit_directional_derivative(snap, rho) <= -0.5 * snap.delta) return rho;
  std::vector<int> active;
  for (std::size_t k = 0; k < snap.c.size(); ++k) {
    if ((snap.c[k] - snap.s[k]).squaredNorm() > 0.0) active.push_back(static_cast<int>(k));
  }
  Vec out = rho;
  if (active.empty()) return out;
  const double share = snap.psi() / static_cast<double>(active.size());
  for (int k : active) {
    const Vec r = snap.c[k] - snap.s[k];
    const double rho_hat = (share + (2.0 * snap.y[k] - snap.yhat[k]).dot(r)) / r.squaredNorm();
    out(k) = std::max(2.0 * rho(k), rho_hat);
  }
  return out;
}

LineSearchResult line_search(const std::function<double(double)>& phi, double phi0, double dphi0,
                             const LineSearchOptions& opt) {
  LineSearchResult res;
  res.best_phi = std::numeric_limits<double>::infinity();
  auto eval = [&](double a) {
    const double v = phi(a);
    ++res.evaluations;
    if (v < res.best_phi) {
      res.best_phi = v;
      res.best_alpha = a;
    }
    return v;
  };
  auto slope = [&](double a) {
    const double h = opt.fd_step * (1.0 + a);
    res.evaluations += 2;
    return (phi(a + h) - phi(a - h)) / (2.0 * h);
  };
  auto armijo = [&](double a, double v) { return std::isfinite(v) && v <= phi0 + opt.sigma * a * dphi0; };
  const double curv = -opt.eta * dphi0;

  if (!(dphi0 < 0.0)) return res;

  // Limited zoom inside [lo, hi] where lo meets the decrease condition.
  auto zoom = [&](double lo, double phi_lo, double dlo, double hi, double phi_hi, double& out_a, double& out_phi) {
    for (int i = 0; i < opt.max_zoom; ++i) {
      const double width = hi - lo;
      double a = lo + 0.5 * width;
      if (std::isfinite(phi_hi)) {
        const double denom = 2.0 * (phi_hi - phi_lo - dlo * width);
        if (denom > 0.0) a = lo - dlo * width * width / denom;
      }
      a = std::clamp(a, std::min(lo, hi) + 0.1 * std::abs(width), std::max(lo, hi) - 0.1 * std::abs(width));
      const double v = eval(a);
      if (!armijo(a, v) || v >= phi_lo) {
        hi = a;
        phi_hi = v;
        continue;
      }
      const double da = slope(a);
      if (std::abs(da) <= curv) {
        out_a = a;
        out_phi = v;
        return true;
      }
      if (da * (hi - lo) >= 0.0) {
        hi = lo;
        phi_hi = phi_lo;
      }
      lo = a;
      phi_lo = v;
      dlo = da;
    }
    return false;
  };

  double alpha = 1.0;
  double prev_alpha = 1.0, prev_phi = std::numeric_limits<double>::infinity();
  bool backtracked = false;
  while (alpha >= opt.alpha_min) {
    const double v = eval(alpha);
    if (armijo(alpha, v)) {
      res.success = true;
      res.alpha = alpha;
      res.phi = v;
      const double da = slope(alpha);
      if (std::abs(da) <= curv) {
        res.curvature_met = true;
        return res;
      }
      double za = 0.0, zphi = 0.0;
      if (da < 0.0) {
        // Still descending: a longer step would help, but only inside the last rejected step.
        if (backtracked && zoom(alpha, v, da, prev_alpha, prev_phi, za, zphi)) {
          res.alpha = za;
          res.phi = zphi;
          res.curvature_met = true;
        }
      } else if (zoom(0.0, phi0, dphi0, alpha, v, za, zphi)) {
        res.alpha = za;
        res.phi = zphi;
        res.curvature_met = true;
      }
      return res;
    }
    double next = 0.5 * alpha;
    if (std::isfinite(v)) {
      const double denom = 2.0 * (v - phi0 - dphi0 * alpha);
      if (denom > 0.0) next = -dphi0 * alpha * alpha / denom;
    }
    prev_alpha = alpha;
    prev_phi = v;
    alpha = std::clamp(next, 0.1 * alpha, 0.5 * alpha);
    backtracked = true;
  }
  return res;
}

}  // namespace clsqp
