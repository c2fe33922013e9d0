#include "stdfm/asym_logistic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stdfm/error.hpp"
#include "stdfm/logistic.hpp"
#include "stdfm/stdf_bounds.hpp"

namespace stdfm {

namespace {

void check_params(double theta, double psi1, double psi2) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw ParameterDomainError("asymmetric logistic theta must lie in (0, 1], got " +
                               std::to_string(theta));
  }
  if (!(psi1 >= 0.0 && psi1 <= 1.0) || !(psi2 >= 0.0 && psi2 <= 1.0)) {
    throw ParameterDomainError("asymmetry parameters must lie in [0, 1], got psi1=" +
                               std::to_string(psi1) + ", psi2=" + std::to_string(psi2));
  }
}

double sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double logit(double s) {
  s = std::clamp(s, 1e-12, 1.0 - 1e-12);
  return std::log(s / (1.0 - s));
}

}  // namespace

double alog_l(double theta, double psi1, double psi2, double x, double y) {
  check_params(theta, psi1, psi2);
  const double uv[2] = {psi1 * x, psi2 * y};
  const double l = (1.0 - psi1) * x + (1.0 - psi2) * y + logistic_l(theta, uv);
  const double xy[2] = {x, y};
  debug_check_stdf(l, xy);
  return l;
}

std::array<double, 2> alog_partials(double theta, double psi1, double psi2, double x, double y) {
  check_params(theta, psi1, psi2);
  const double uv[2] = {psi1 * x, psi2 * y};
  double lp[2];
  logistic_partials(theta, uv, lp);
  return {(1.0 - psi1) + psi1 * lp[0], (1.0 - psi2) + psi2 * lp[1]};
}

std::array<double, 3> alog_param_gradient(double theta, double psi1, double psi2, double x,
                                          double y) {
  check_params(theta, psi1, psi2);
  const double uv[2] = {psi1 * x, psi2 * y};
  double lp[2];
  logistic_partials(theta, uv, lp);
  return {logistic_theta_derivative(theta, uv), -x + x * lp[0], -y + y * lp[1]};
}

std::vector<std::string> AsymLogisticFamily::param_names() const {
  if (symmetric_) return {"theta", "psi"};
  return {"theta", "eta1", "eta2"};
}

ParameterSpace AsymLogisticFamily::parameter_space() const {
  if (symmetric_) {
    return ParameterSpace({Interval{0.0, 1.0, true, false}, Interval{0.0, 1.0}});
  }
  // psi1 = eta1 + eta2 in [0,1], psi2 = eta1 - eta2 in [0,1]
  std::vector<LinearConstraint> cons = {
      {{0.0, -1.0, -1.0}, 0.0},
      {{0.0, 1.0, 1.0}, 1.0},
      {{0.0, -1.0, 1.0}, 0.0},
      {{0.0, 1.0, -1.0}, 1.0},
  };
  return ParameterSpace({Interval{0.0, 1.0, true, false}, Interval{0.0, 1.0}, Interval{-0.5, 0.5}},
                        std::move(cons));
}

std::vector<double> AsymLogisticFamily::default_start() const {
  if (symmetric_) return {0.5, 0.5};
  return {0.5, 0.5, 0.0};
}

std::array<double, 3> AsymLogisticFamily::natural(std::span<const double> theta) const {
  if (symmetric_) return {theta[0], theta[1], theta[1]};
  const auto psi = psi_from_eta(theta[1], theta[2]);
  // rounding in eta -> psi can leave psi a hair outside [0,1]
  return {theta[0], std::clamp(psi[0], 0.0, 1.0), std::clamp(psi[1], 0.0, 1.0)};
}

double AsymLogisticFamily::stdf(std::span<const double> theta, std::span<const double> x) const {
  const auto [t, p1, p2] = natural(theta);
  return alog_l(t, p1, p2, x[0], x[1]);
}

void AsymLogisticFamily::partials(std::span<const double> theta, std::span<const double> x,
                                  std::span<double> out) const {
  const auto [t, p1, p2] = natural(theta);
  const auto g = alog_partials(t, p1, p2, x[0], x[1]);
  out[0] = g[0];
  out[1] = g[1];
}

void AsymLogisticFamily::theta_gradient(std::span<const double> theta, std::span<const double> x,
                                        std::span<double> out) const {
  const auto [t, p1, p2] = natural(theta);
  const auto g = alog_param_gradient(t, p1, p2, x[0], x[1]);
  out[0] = g[0];
  if (symmetric_) {
    out[1] = g[1] + g[2];
  } else {
    out[1] = g[1] + g[2];
    out[2] = g[1] - g[2];
  }
}

std::vector<double> AsymLogisticFamily::to_unconstrained(std::span<const double> theta) const {
  if (symmetric_) return {logit(theta[0]), logit(theta[1])};
  const double eta1 = theta[1];
  const double half = std::min(eta1, 1.0 - eta1);
  const double r = half > 0.0 ? std::clamp(theta[2] / half, -1.0 + 1e-12, 1.0 - 1e-12) : 0.0;
  return {logit(theta[0]), logit(eta1), std::atanh(r)};
}

std::vector<double> AsymLogisticFamily::from_unconstrained(std::span<const double> u) const {
  if (symmetric_) return {sigmoid(u[0]), sigmoid(u[1])};
  const double eta1 = sigmoid(u[1]);
  return {sigmoid(u[0]), eta1, std::min(eta1, 1.0 - eta1) * std::tanh(u[2])};
}

nlohmann::json AsymLogisticFamily::to_json(std::span<const double> theta) const {
  auto j = Family::to_json(theta);
  const auto [t, p1, p2] = natural(theta);
  j["natural"] = {{"theta", t}, {"psi1", p1}, {"psi2", p2}};
  return j;
}

WeightSpec AsymLogisticFamily::default_weights() const {
  if (symmetric_) return WeightSpec::parse("x1;2*x1+2*x2", 2);
  return WeightSpec::parse("1;x1;x2", 2);
}

}  // namespace stdfm
