#include "stdfm/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stdfm/error.hpp"
#include "stdfm/stdf_bounds.hpp"

namespace stdfm {

namespace {

void check_theta(double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw ParameterDomainError("logistic dependence parameter must lie in (0, 1], got " +
                               std::to_string(theta));
  }
}

double max_of(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, v);
  return m;
}

// l computed with max(x) factored out; avoids overflow of x^{1/theta}.
double logistic_unchecked(double theta, std::span<const double> x) {
  const double m = max_of(x);
  if (m == 0.0) return 0.0;
  if (theta < kLogisticMaxBranch) return m;
  if (theta == 1.0) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const double inv = 1.0 / theta;
  double s = 0.0;
  for (double v : x) {
    if (v > 0.0) s += std::pow(v / m, inv);
  }
  return m * std::pow(s, theta);
}

}  // namespace

double logistic_l(double theta, std::span<const double> x) {
  check_theta(theta);
  const double l = logistic_unchecked(theta, x);
  debug_check_stdf(l, x);
  return l;
}

void logistic_partials(double theta, std::span<const double> x, std::span<double> out) {
  check_theta(theta);
  const double l = logistic_unchecked(theta, x);
  if (l == 0.0 || theta == 1.0) {
    std::fill(out.begin(), out.end(), 1.0);
    return;
  }
  const double m = max_of(x);
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (theta < kLogisticMaxBranch) {
      out[j] = x[j] == m ? 1.0 : 0.0;
    } else {
      out[j] = x[j] > 0.0 ? std::pow(x[j] / l, 1.0 / theta - 1.0) : 0.0;
    }
  }
}

double logistic_theta_derivative(double theta, std::span<const double> x) {
  check_theta(theta);
  const double m = max_of(x);
  if (m == 0.0 || theta < kLogisticMaxBranch) return 0.0;
  const double inv = 1.0 / theta;
  double s = 0.0;
  double s_log = 0.0;
  for (double v : x) {
    if (v <= 0.0) continue;
    const double y = v / m;
    const double yp = std::pow(y, inv);
    s += yp;
    if (y < 1.0) s_log += yp * std::log(y);
  }
  const double l = m * std::pow(s, theta);
  return l * (std::log(s) - s_log / (theta * s));
}

LogisticFamily::LogisticFamily(int d) : d_(d) {
  if (d < 2) throw ParameterDomainError("logistic family needs d >= 2");
}

ParameterSpace LogisticFamily::parameter_space() const {
  return ParameterSpace({Interval{0.0, 1.0, true, false}});
}

double LogisticFamily::stdf(std::span<const double> theta, std::span<const double> x) const {
  return logistic_l(theta[0], x);
}

void LogisticFamily::partials(std::span<const double> theta, std::span<const double> x,
                              std::span<double> out) const {
  logistic_partials(theta[0], x, out);
}

void LogisticFamily::theta_gradient(std::span<const double> theta, std::span<const double> x,
                                    std::span<double> out) const {
  out[0] = logistic_theta_derivative(theta[0], x);
}

}  // namespace stdfm
