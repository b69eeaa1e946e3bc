#include "clsqp/sqp.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

namespace clsqp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double stacked_norm(const VecSeq& v) {
  double s = 0.0;
  for (const Vec& x : v) s += x.squaredNorm();
  return std::sqrt(s);
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::OL: return "OL";
    case Method::CL: return "CL";
    case Method::CL_gamma: return "CLG";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "OL") return Method::OL;
  if (name == "CL") return Method::CL;
  if (name == "CLG" || name == "CL_gamma") return Method::CL_gamma;
  throw Error("unknown method '" + name + "' (valid: OL, CL, CLG)");
}

double GammaSchedule::at(int iter) const { return std::max(floor, initial * std::pow(factor, iter)); }

bool check_termination(const KKTResiduals& r, const Iterate& it, double tol_primal, double tol_dual) {
  const double tau_x = tol_primal * (1.0 + stacked_norm(it.u));
  const double tau_y = tol_dual * (1.0 + stacked_norm(it.y));
  return r.min_primal >= -tau_x && r.min_dual >= -tau_y && r.max_complementarity <= tau_y &&
         r.max_stationarity <= tau_y;
}

GainSchedule compute_gains(Method method, const ProblemSpec& spec, const Iterate& it, const QPData& data,
                           const VecSeq& dx_star, const VecSeq& du_star, double gamma, const SolverOptions& opt,
                           GainDiagnostics* diag) {
  const int N = spec.horizon, n = spec.n(), m = spec.m();
  GainDiagnostics local;
  GainDiagnostics& dg = diag ? *diag : local;
  dg = {};
  if (method == Method::OL) return GainSchedule::zeros(N, n, m);

  auto barrier = [&]() -> std::optional<GainSchedule> {
    BarrierOptions bo = opt.barrier;
    bo.gamma = gamma;
    bo.parallel = opt.parallel;
    const BarrierGains bg = barrier_gains(data, dx_star, du_star, bo);
    if (!bg.ok) {
      dg.note += bg.message + "; ";
      return std::nullopt;
    }
    dg.reconstruction_error = bg.reconstruction_error;
    GainSchedule g;
    g.K = bg.K;
    g.source.assign(N, GainSource::barrier);
    return g;
  };

  if (method == Method::CL) {
    const ExactGains eg = backward_pass_exact(data, dx_star, du_star, opt.exact);
    if (eg.ok) {
      dg.reconstruction_error = eg.reconstruction_error;
      GainSchedule g;
      g.K = eg.Ku;
      g.source.assign(N, GainSource::exact);
      return g;
    }
    dg.fallback = true;
    dg.note += "exact recursion failed at step " + std::to_string(eg.failed_step) + ": " + eg.reason + "; ";
    if (auto g = barrier()) return *g;
  } else {
    if (auto g = barrier()) return *g;
    dg.fallback = true;
  }
  dg.note += "using TV-LQR gains";
  return tvlqr_fallback_gains(spec, it, data, opt.eps_psd);
}

SolveReport sqp_solve(const ProblemSpec& spec, const VecSeq& u_init, const SolverOptions& opt) {
  spec.validate();
  const auto t_start = Clock::now();
  const int N = spec.horizon;
  const auto angular = spec.dynamics->angular_dims();
  SolveReport rep;
  Iterate it = Iterate::from_controls(spec, u_init);
  for (int k = 0; k <= N; ++k) {
    for (std::size_t j = 0; j < angular.size(); ++j) it.x[k](angular[j]) = wrap_to_pi(it.x[k](angular[j]));
  }

  QpDataOptions dopt;
  dopt.mode = opt.hessian_mode;
  dopt.eps_psd = opt.eps_psd;
  dopt.parallel = opt.parallel;
  QpOptions qopt;
  qopt.tol = opt.qp_tol > 0.0 ? opt.qp_tol : (opt.method == Method::OL ? 1e-6 : 1e-8);
  qopt.polish = false;

  for (int iter = 0;; ++iter) {
    IterationStats st;
    st.iter = iter;
    const KKTResiduals res = kkt_residuals(spec, it);
    st.objective = evaluate_objective(spec, it.x, it.u);
    st.max_violation = min_state_constraint(spec, it.x, it.chart);
    if (!std::isfinite(st.max_violation)) st.max_violation = 0.0;
    st.kkt_stationarity = res.max_stationarity;
    st.kkt_complementarity = res.max_complementarity;
    rep.final_residuals = res;

    if (check_termination(res, it, opt.tol_primal, opt.tol_dual)) {
      rep.converged = true;
      rep.iterations.push_back(st);
      break;
    }
    if (iter >= opt.max_iters) {
      rep.iterations.push_back(st);
      break;
    }

    auto t0 = Clock::now();
    const QPData data = build_qp_data(spec, it, dopt);
    const OcpQpSolution qp = solve_ocp_qp(to_ocp_qp(data), qopt);
    st.time_qp_s = seconds_since(t0);
    if (qp.status == QpStatus::infeasible || (qp.status == QpStatus::max_iter && !(qp.kkt_error <= 1e-4))) {
      rep.stalled = true;
      rep.stall_iteration = iter;
      rep.stall_reason = qp.status == QpStatus::infeasible ? "qp_infeasible" : "qp_max_iter";
      rep.iterations.push_back(st);
      break;
    }
    const VecSeq& dx = qp.x;
    const VecSeq& du = qp.u;

    t0 = Clock::now();
    GainDiagnostics gd;
    GainSchedule gains = compute_gains(opt.method, spec, it, data, dx, du, opt.gamma.at(iter), opt, &gd);
    st.time_gains_s = seconds_since(t0);
    st.gains = gains.source.empty() ? "zero" : to_string(gains.source.front());
    if (opt.method != Method::OL) rep.reconstruction_error.push_back(gd.reconstruction_error);

    t0 = Clock::now();
    const VecSeq c = evaluate_constraints(spec, it.x, it.u, it.chart);
    MeritSnapshot snap;
    snap.c = c;
    snap.s = init_slacks(c, it.y, it.rho);
    snap.y = it.y;
    snap.yhat = qp.lambda;
    for (int k = 0; k <= N; ++k) {
      snap.g_dx += data.q[k].dot(dx[k]);
      if (k < N) {
        snap.g_dx += data.r[k].dot(du[k]);
        Vec z(spec.n() + spec.m());
        z << dx[k], du[k];
        snap.delta += z.dot(data.Z[k] * z);
      } else {
        snap.delta += dx[k].dot(data.Z[k] * dx[k]);
      }
    }
    const Vec rho = update_penalties(snap, it.rho);
    const double slope = merit_directional_derivative(snap, rho);
    const VecSeq ds = slack_directions(data, dx, du, snap.s);
    VecSeq dy(N + 1);
    for (int k = 0; k <= N; ++k) dy[k] = qp.lambda[k] - it.y[k];

    auto trial = [&](const GainSchedule& g, double alpha, RolloutResult* out) {
      try {
        RolloutResult r = closed_loop_rollout(spec, it, du, dx, g, alpha);
        VecSeq y(N + 1), s(N + 1);
        for (int k = 0; k <= N; ++k) {
          y[k] = it.y[k] + alpha * dy[k];
          s[k] = snap.s[k] + alpha * ds[k];
        }
        const double v = merit_value(spec, r.x, r.u, y, s, rho, it.chart);
        if (out) *out = std::move(r);
        return v;
      } catch (const DivergedRollout&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    const double phi0 = merit_value(spec, it.x, it.u, it.y, snap.s, rho, it.chart);
    st.merit = phi0;

    if (opt.record_merit_checks) {
      MeritCheck mc;
      mc.slope = slope;
      mc.delta = snap.delta;
      const double h = 1e-4;
      const double d1 = (trial(gains, h, nullptr) - phi0) / h;
      const double d2 = (trial(gains, 0.5 * h, nullptr) - phi0) / (0.5 * h);
      mc.slope_fd = 2.0 * d2 - d1;
      mc.fd_noise = 1e-14 * (1.0 + std::abs(phi0)) / h;
      rep.merit_checks.push_back(mc);
    }

    auto phi = [&](double a) { return trial(gains, a, nullptr); };
    LineSearchResult ls = line_search(phi, phi0, slope, opt.line_search);
    if (!ls.success && opt.method != Method::OL && gains.source.front() != GainSource::tvlqr) {
      gains = tvlqr_fallback_gains(spec, it, data, opt.eps_psd);
      st.line_search_fallback = true;
      st.gains = "tvlqr";
      ls = line_search(phi, phi0, slope, opt.line_search);
    }
    double alpha = ls.alpha;
    if (!ls.success) {
      rep.stalled = true;
      rep.stall_iteration = iter;
      rep.stall_reason = "line_search";
      if (!(ls.best_phi < phi0)) {
        st.time_linesearch_s = seconds_since(t0);
        rep.iterations.push_back(st);
        break;
      }
      alpha = ls.best_alpha;
    }
    RolloutResult r;
    trial(gains, alpha, &r);
    st.time_linesearch_s = seconds_since(t0);
    st.alpha = alpha;
    rep.iterations.push_back(st);

    it.u = std::move(r.u);
    it.x = std::move(r.x);
    for (int k = 0; k <= N; ++k) {
      it.y[k] += alpha * dy[k];
      it.s[k] = snap.s[k] + alpha * ds[k];
    }
    it.rho = rho;
    if (!angular.empty()) {
      for (int k = 0; k <= N; ++k) {
        Vec ang(angular.size());
        for (std::size_t j = 0; j < angular.size(); ++j) ang(j) = it.x[k](angular[j]);
        const ChartUpdate cu = chart_switch(ang, it.chart[k]);
        for (std::size_t j = 0; j < angular.size(); ++j) it.x[k](angular[j]) = cu.wrapped(j);
        it.chart[k] = cu.shift;
      }
    }
    if (rep.stalled) {
      IterationStats last;
      last.iter = iter + 1;
      const KKTResiduals fr = kkt_residuals(spec, it);
      last.objective = evaluate_objective(spec, it.x, it.u);
      last.max_violation = min_state_constraint(spec, it.x, it.chart);
      if (!std::isfinite(last.max_violation)) last.max_violation = 0.0;
      last.kkt_stationarity = fr.max_stationarity;
      last.kkt_complementarity = fr.max_complementarity;
      rep.final_residuals = fr;
      rep.iterations.push_back(last);
      break;
    }
  }
  rep.final_iterate = it;
  rep.total_time_s = seconds_since(t_start);
  return rep;
}

}  // namespace clsqp
