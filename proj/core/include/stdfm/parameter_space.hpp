#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace stdfm {

/// Closed (or half-open) interval; infinite ends are allowed.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool lo_open = false;
  bool hi_open = false;
};

/// coefficients . theta <= bound
struct LinearConstraint {
  std::vector<double> coefficients;
  double bound = 0.0;
};

/// Theta as a box intersected with finitely many half-spaces.
class ParameterSpace {
 public:
  ParameterSpace() = default;
  ParameterSpace(std::vector<Interval> boxes, std::vector<LinearConstraint> constraints = {});

  int p() const { return static_cast<int>(boxes_.size()); }
  const std::vector<Interval>& boxes() const { return boxes_; }
  const std::vector<LinearConstraint>& constraints() const { return constraints_; }

  /// Feasibility with slack `tol` on every constraint (open ends require strict inequality
  /// when tol == 0).
  bool contains(std::span<const double> theta, double tol = 0.0) const;

  /// Smallest distance from theta to any box edge or constraint hyperplane (Euclidean,
  /// constraint rows normalized). Negative when infeasible.
  double boundary_distance(std::span<const double> theta) const;

  /// Human-readable reason theta is infeasible, or empty.
  std::string violation(std::span<const double> theta) const;

 private:
  std::vector<Interval> boxes_;
  std::vector<LinearConstraint> constraints_;
};

/// Smooth monotone bijection between one box coordinate and the real line.
double squash(double u, const Interval& box);
double unsquash(double theta, const Interval& box);

}  // namespace stdfm
