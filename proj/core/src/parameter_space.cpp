#include "stdfm/parameter_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace stdfm {

namespace {

double sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

ParameterSpace::ParameterSpace(std::vector<Interval> boxes, std::vector<LinearConstraint> constraints)
    : boxes_(std::move(boxes)), constraints_(std::move(constraints)) {}

bool ParameterSpace::contains(std::span<const double> theta, double tol) const {
  if (theta.size() != boxes_.size()) return false;
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    const auto& b = boxes_[i];
    const double t = theta[i];
    if (!std::isfinite(t)) return false;
    if (b.lo_open && tol == 0.0 ? !(t > b.lo) : !(t >= b.lo - tol)) return false;
    if (b.hi_open && tol == 0.0 ? !(t < b.hi) : !(t <= b.hi + tol)) return false;
  }
  for (const auto& c : constraints_) {
    double s = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) s += c.coefficients[i] * theta[i];
    if (s > c.bound + tol) return false;
  }
  return true;
}

double ParameterSpace::boundary_distance(std::span<const double> theta) const {
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    dist = std::min({dist, theta[i] - boxes_[i].lo, boxes_[i].hi - theta[i]});
  }
  for (const auto& c : constraints_) {
    double s = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      s += c.coefficients[i] * theta[i];
      norm += c.coefficients[i] * c.coefficients[i];
    }
    if (norm > 0) dist = std::min(dist, (c.bound - s) / std::sqrt(norm));
  }
  return dist;
}

std::string ParameterSpace::violation(std::span<const double> theta) const {
  std::ostringstream os;
  if (theta.size() != boxes_.size()) {
    os << "expected " << boxes_.size() << " parameters, got " << theta.size();
    return os.str();
  }
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    const auto& b = boxes_[i];
    const double t = theta[i];
    const bool low_bad = b.lo_open ? !(t > b.lo) : !(t >= b.lo);
    const bool high_bad = b.hi_open ? !(t < b.hi) : !(t <= b.hi);
    if (!std::isfinite(t) || low_bad || high_bad) {
      os << "parameter " << i << " = " << t << " outside " << (b.lo_open ? '(' : '[') << b.lo
         << ", " << b.hi << (b.hi_open ? ')' : ']');
      return os.str();
    }
  }
  for (std::size_t c = 0; c < constraints_.size(); ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) s += constraints_[c].coefficients[i] * theta[i];
    if (s > constraints_[c].bound) {
      os << "linear constraint " << c << " violated (" << s << " > " << constraints_[c].bound << ")";
      return os.str();
    }
  }
  return {};
}

double squash(double u, const Interval& box) {
  const bool lo_fin = std::isfinite(box.lo);
  const bool hi_fin = std::isfinite(box.hi);
  if (lo_fin && hi_fin) return box.lo + (box.hi - box.lo) * sigmoid(u);
  if (lo_fin) return box.lo + std::exp(u);
  if (hi_fin) return box.hi - std::exp(-u);
  return u;
}

double unsquash(double theta, const Interval& box) {
  const bool lo_fin = std::isfinite(box.lo);
  const bool hi_fin = std::isfinite(box.hi);
  constexpr double kEdge = 1e-12;
  if (lo_fin && hi_fin) {
    double s = (theta - box.lo) / (box.hi - box.lo);
    s = std::clamp(s, kEdge, 1.0 - kEdge);
    return std::log(s / (1.0 - s));
  }
  if (lo_fin) return std::log(std::max(theta - box.lo, kEdge));
  if (hi_fin) return -std::log(std::max(box.hi - theta, kEdge));
  return theta;
}

}  // namespace stdfm
