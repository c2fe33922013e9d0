#pragma once

#include <span>

#include "stdfm/family.hpp"

namespace stdfm {

/// Below this dependence parameter the logistic stdf is replaced by its limit max_j x_j.
inline constexpr double kLogisticMaxBranch = 1e-12;

/// (sum_j x_j^{1/theta})^theta, theta in (0, 1]. Throws ParameterDomainError otherwise.
double logistic_l(double theta, std::span<const double> x);

/// d l / d x_j = (x_j / l)^{1/theta - 1}; zero coordinates get the right-hand limit.
void logistic_partials(double theta, std::span<const double> x, std::span<double> out);

/// d l / d theta.
double logistic_theta_derivative(double theta, std::span<const double> x);

class LogisticFamily final : public Family {
 public:
  explicit LogisticFamily(int d);

  std::string name() const override { return "logistic"; }
  int dimension() const override { return d_; }
  int num_params() const override { return 1; }
  std::vector<std::string> param_names() const override { return {"theta"}; }
  ParameterSpace parameter_space() const override;
  std::vector<double> default_start() const override { return {0.5}; }

  double stdf(std::span<const double> theta, std::span<const double> x) const override;
  void partials(std::span<const double> theta, std::span<const double> x,
                std::span<double> out) const override;
  bool has_theta_gradient() const override { return true; }
  void theta_gradient(std::span<const double> theta, std::span<const double> x,
                      std::span<double> out) const override;
  WeightSpec default_weights() const override { return WeightSpec::constant(d_); }

 private:
  int d_;
};

}  // namespace stdfm
