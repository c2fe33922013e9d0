#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "stdfm/parameter_space.hpp"
#include "stdfm/quadrature.hpp"
#include "stdfm/weight_spec.hpp"

namespace stdfm {

/// A parametric stable tail dependence function l(.; theta) on [0, inf)^d.
///
/// Implementations are immutable; every method is safe to call concurrently.
class Family {
 public:
  virtual ~Family() = default;

  virtual std::string name() const = 0;
  virtual int dimension() const = 0;
  virtual int num_params() const = 0;
  virtual std::vector<std::string> param_names() const = 0;
  virtual ParameterSpace parameter_space() const = 0;
  /// A feasible interior point used when no better start is available.
  virtual std::vector<double> default_start() const = 0;

  /// Throws ParameterDomainError when theta is infeasible.
  virtual void validate(std::span<const double> theta) const;

  virtual double stdf(std::span<const double> theta, std::span<const double> x) const = 0;
  /// Right-hand partial derivatives in x.
  virtual void partials(std::span<const double> theta, std::span<const double> x,
                        std::span<double> out) const = 0;

  /// Whether d l / d theta is available in closed form.
  virtual bool has_theta_gradient() const { return false; }
  virtual void theta_gradient(std::span<const double> theta, std::span<const double> x,
                              std::span<double> out) const;

  /// Bijection from the interior of the parameter space onto R^p used by the optimizer.
  /// The default squashes each box coordinate independently.
  virtual std::vector<double> to_unconstrained(std::span<const double> theta) const;
  virtual std::vector<double> from_unconstrained(std::span<const double> u) const;

  /// Maps theta to its identifiable representative (identity except for factor models).
  virtual std::vector<double> canonicalize(std::span<const double> theta) const;

  /// phi(theta) = int_{[0,1]^d} g(x) l(x; theta) dx.
  virtual std::vector<double> phi(std::span<const double> theta, const WeightSpec& g,
                                  const CubatureSpec& spec) const;

  /// The q x p total derivative of phi. Uses the closed-form theta gradient when present,
  /// otherwise central differences with step 1e-5 (one-sided next to the boundary).
  virtual Eigen::MatrixXd phi_jacobian(std::span<const double> theta, const WeightSpec& g,
                                       const CubatureSpec& spec) const;

  virtual nlohmann::json to_json(std::span<const double> theta) const;

  /// Default weight functions used by the CLI and studies.
  virtual WeightSpec default_weights() const = 0;
};

using FamilyPtr = std::shared_ptr<const Family>;

/// "logistic", "alog", "alog-sym", "factor:R".
FamilyPtr make_family(std::string_view spec, int d);

/// Central finite-difference step used by phi_jacobian.
inline constexpr double kPhiJacobianStep = 1e-5;

/// Integrates h(x) g_m(x) over [0,1]^d for every weight function and every component of h.
/// Returns a q x components matrix. `h` must be homogeneous of order one in x: for d == 2 the
/// cube integral is reduced exactly to 1-D integrals on the faces x_j = 1 and evaluated by
/// adaptive Gauss-Kronrod; for d >= 3 the QMC cube rule is used.
Eigen::MatrixXd integrate_homogeneous(
    const std::function<void(std::span<const double>, std::span<double>)>& h, int components,
    const WeightSpec& g, const CubatureSpec& spec);

/// Same, restricted to one monomial term and one scalar h.
double integrate_homogeneous_term(const std::function<double(std::span<const double>)>& h,
                                  const Monomial& term, int d, const CubatureSpec& spec);

}  // namespace stdfm
