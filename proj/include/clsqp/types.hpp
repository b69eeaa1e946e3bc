#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace clsqp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecSeq = std::vector<Vec>;
using MatSeq = std::vector<Mat>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Raised when a rollout produces a non-finite state; carries the step index.
class DivergedRollout : public Error {
 public:
  explicit DivergedRollout(int step)
      : Error("rollout diverged at step " + std::to_string(step)), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace clsqp
