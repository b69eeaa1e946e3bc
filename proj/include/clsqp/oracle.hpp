#pragma once

#include "clsqp/qp.hpp"
#include "clsqp/qp_data.hpp"
#include "clsqp/sensitivity_exact.hpp"

#include <functional>
#include <optional>
#include <string>

namespace clsqp {

struct FDConfig {
  /// Base step; the actual step is h (1 + ||x||_inf).
  double h = 1e-5;
  /// 0: plain central differences, 1: one Richardson extrapolation.
  int richardson = 1;
  /// Evaluate coordinates in parallel; the callable must be reentrant.
  bool parallel = true;
  void validate() const;
};

using VectorMap = std::function<Vec(const Vec&)>;
/// Returns nullopt where the map is undefined (e.g. infeasible QP).
using PartialMap = std::function<std::optional<Vec>(const Vec&)>;

/// Central-difference Jacobian of f at x.
Mat fd_jacobian(const VectorMap& f, const Vec& x, const FDConfig& cfg = {});

struct FdPolicyResult {
  bool ok = false;
  Mat J;
  double h = 0.0;  ///< step finally used
  std::string message;
};

/// Central-difference Jacobian of a partial map; halves the step up to 3 times when a perturbed
/// evaluation is undefined.
FdPolicyResult fd_policy_jacobian(const PartialMap& policy, const Vec& x, const FDConfig& cfg = {});

/// First control of the tail QP from step k as a function of dx_k, solved with the dense backend.
PartialMap tail_qp_policy(const QPData& data, int k, double tol = 1e-11);
/// Optimal value of the same tail QP.
std::function<std::optional<double>(const Vec&)> tail_qp_value(const QPData& data, int k, double tol = 1e-11);

struct RegionSamples {
  bool ok = false;
  std::vector<Vec> points;
  double acceptance_rate = 0.0;
  double radius = 0.0;  ///< radius finally used
  int attempts = 0;
  std::string message;
};

/// Rejection sampling of points of the region inside the ball of the given radius around center,
/// uniformly in the ball. The radius shrinks by 10 (at most 4 times) while acceptance is below 1%.
RegionSamples sample_critical_region(const CriticalRegion& region, const Vec& center, int n_samples,
                                     double radius, unsigned seed = 0, double tol = 0.0);

/// phi'(0+) by the second-order one-sided difference (-3 phi(0) + 4 phi(h) - phi(2h)) / (2h).
double fd_merit_derivative(const std::function<double(double)>& phi, double h = 1e-6);

}  // namespace clsqp
