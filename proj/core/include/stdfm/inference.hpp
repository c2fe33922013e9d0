#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "stdfm/estimator.hpp"
#include "stdfm/family.hpp"
#include "stdfm/quadrature.hpp"
#include "stdfm/weight_spec.hpp"

namespace stdfm {

/// E[W_l(x) W_l(y)] = l(x) + l(y) - l(x v y), with v the componentwise maximum.
double wl_cov(const std::function<double(std::span<const double>)>& l, std::span<const double> x,
              std::span<const double> y);

/// Covariance function of the limit process
///   B(x) = W_l(x) - sum_j l_j(x) W_{l,j}(x_j),
/// expressed through l and its right-hand partials only.
class CovKernel {
 public:
  CovKernel(FamilyPtr family, std::vector<double> theta);

  int d() const { return family_->dimension(); }
  double l(std::span<const double> x) const { return family_->stdf(theta_, x); }
  double wl_cov(std::span<const double> x, std::span<const double> y) const;
  double b_cov(std::span<const double> x, std::span<const double> y) const;

 private:
  FamilyPtr family_;
  std::vector<double> theta_;
};

/// Eigenvalues below -tol make a covariance matrix invalid; smaller negatives are floored at 0.
inline constexpr double kPsdTolerance = 1e-8;

/// Sigma_mm' = int int b_cov(x, y) g_m(x) g_m'(y) dx dy by QMC over [0,1]^{2d}; symmetrized
/// and floored to the PSD cone.
Eigen::MatrixXd sigma_matrix(const CovKernel& kernel, const WeightSpec& g,
                             const CubatureSpec& spec = CubatureSpec::fixed(std::size_t{1} << 16));

/// Projects a symmetric matrix onto the PSD cone; throws NumericalError when an eigenvalue
/// is below -kPsdTolerance.
Eigen::MatrixXd floor_psd(const Eigen::MatrixXd& s);

struct InferenceConfig {
  CubatureSpec phi_spec = CubatureSpec::fixed(std::size_t{1} << 14);
  CubatureSpec sigma_spec = CubatureSpec::fixed(std::size_t{1} << 16);
};

struct MMatrix {
  Eigen::MatrixXd m;
  Eigen::MatrixXd jacobian;
  Eigen::MatrixXd sigma;

  /// The trailing r x r block.
  Eigen::MatrixXd lower_block(int r) const;
  Eigen::MatrixXd block(const std::vector<int>& indices) const;
};

/// M = A Sigma A^T with A = (J^T J)^{-1} J^T from a QR factorization of J. Throws
/// IdentifiabilityError with a null direction when J's smallest singular value is <= 1e-10.
Eigen::MatrixXd m_from_parts(const Eigen::MatrixXd& jacobian, const Eigen::MatrixXd& sigma);

MMatrix m_matrix(const FamilyPtr& family, std::span<const double> theta, const WeightSpec& g,
                 const InferenceConfig& config = {});

/// Fills covariance = M(theta_hat) / k and the standard errors.
void attach_covariance(EstimateResult& result, const FamilyPtr& family, const WeightSpec& g,
                       const InferenceConfig& config = {});

/// k (theta_hat - theta0)^T M^{-1} (theta_hat - theta0), using result.covariance = M / k.
double confidence_statistic(const EstimateResult& result, std::span<const double> theta0);
double confidence_statistic(std::span<const double> theta_hat, const Eigen::MatrixXd& m, int k,
                            std::span<const double> theta0);

double chi_squared_quantile(double level, int dof);
/// Upper tail probability P(chi2_dof > x).
double chi_squared_sf(double x, int dof);

struct TestResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  int k = 0;
  std::string model;
  std::string hypothesis;
  std::vector<double> theta_hat;

  nlohmann::json to_json() const;
};

/// "eta2=0" or "psi1=0.5,psi2=0.5" -> (parameter index, value) pairs.
std::vector<std::pair<int, double>> parse_hypothesis(const Family& family, std::string_view text);

/// S = k d^T M2^{-1} d with d = theta_hat_2 - theta2_star and M2 the block of M for the tested
/// components, evaluated at the hybrid point (theta_hat_1, theta2_star).
TestResult submodel_test(const FamilyPtr& family, const EstimateResult& fit,
                         const std::vector<std::pair<int, double>>& hypothesis, const WeightSpec& g,
                         const InferenceConfig& config = {});

}  // namespace stdfm
