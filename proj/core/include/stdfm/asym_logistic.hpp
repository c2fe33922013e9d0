#pragma once

#include <array>
#include <span>

#include "stdfm/family.hpp"

namespace stdfm {

/// Bivariate asymmetric logistic stdf
///   (1-psi1) x + (1-psi2) y + ((psi1 x)^{1/theta} + (psi2 y)^{1/theta})^theta
/// with theta in (0,1], psi1, psi2 in [0,1].
double alog_l(double theta, double psi1, double psi2, double x, double y);
std::array<double, 2> alog_partials(double theta, double psi1, double psi2, double x, double y);
/// Derivatives with respect to (theta, psi1, psi2).
std::array<double, 3> alog_param_gradient(double theta, double psi1, double psi2, double x,
                                          double y);

/// psi <-> eta coordinates: eta1 = (psi1+psi2)/2, eta2 = (psi1-psi2)/2.
inline std::array<double, 2> eta_from_psi(double psi1, double psi2) {
  return {(psi1 + psi2) / 2.0, (psi1 - psi2) / 2.0};
}
inline std::array<double, 2> psi_from_eta(double eta1, double eta2) {
  return {eta1 + eta2, eta1 - eta2};
}

/// The asymmetric logistic family in (theta, eta1, eta2) coordinates, so that symmetry is
/// the hypothesis eta2 = 0; or, with `symmetric`, the submodel psi1 = psi2 = psi in
/// (theta, psi) coordinates.
class AsymLogisticFamily final : public Family {
 public:
  explicit AsymLogisticFamily(bool symmetric = false) : symmetric_(symmetric) {}

  bool symmetric() const { return symmetric_; }

  std::string name() const override { return symmetric_ ? "alog-sym" : "alog"; }
  int dimension() const override { return 2; }
  int num_params() const override { return symmetric_ ? 2 : 3; }
  std::vector<std::string> param_names() const override;
  ParameterSpace parameter_space() const override;
  std::vector<double> default_start() const override;

  /// (theta, psi1, psi2) for a canonical parameter vector.
  std::array<double, 3> natural(std::span<const double> theta) const;

  double stdf(std::span<const double> theta, std::span<const double> x) const override;
  void partials(std::span<const double> theta, std::span<const double> x,
                std::span<double> out) const override;
  bool has_theta_gradient() const override { return true; }
  void theta_gradient(std::span<const double> theta, std::span<const double> x,
                      std::span<double> out) const override;

  std::vector<double> to_unconstrained(std::span<const double> theta) const override;
  std::vector<double> from_unconstrained(std::span<const double> u) const override;

  nlohmann::json to_json(std::span<const double> theta) const override;
  WeightSpec default_weights() const override;

 private:
  bool symmetric_;
};

}  // namespace stdfm
