#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "stdfm/empirical.hpp"
#include "stdfm/family.hpp"
#include "stdfm/quadrature.hpp"
#include "stdfm/sample.hpp"
#include "stdfm/weight_spec.hpp"

namespace stdfm {

/// Q(theta) = || phi(theta) - int g l_hat ||^2.
class Criterion {
 public:
  Criterion(FamilyPtr family, WeightSpec g, std::vector<double> empirical_moments, int k, int n,
            CubatureSpec phi_spec = CubatureSpec::fixed(std::size_t{1} << 14));

  static Criterion from_empirical(FamilyPtr family, WeightSpec g, const EmpiricalStdf& est,
                                  CubatureSpec phi_spec = CubatureSpec::fixed(std::size_t{1} << 14));

  /// +inf for infeasible theta.
  double operator()(std::span<const double> theta) const;

  const Family& family() const { return *family_; }
  const FamilyPtr& family_ptr() const { return family_; }
  const WeightSpec& g() const { return g_; }
  const std::vector<double>& empirical_moments() const { return moments_; }
  const CubatureSpec& phi_spec() const { return phi_spec_; }
  int k() const { return k_; }
  int n() const { return n_; }

 private:
  FamilyPtr family_;
  WeightSpec g_;
  std::vector<double> moments_;
  int k_;
  int n_;
  CubatureSpec phi_spec_;
};

struct OptimizerOptions {
  /// Total number of starts: the given start plus restarts-1 jittered copies.
  int restarts = 5;
  /// Jitter half-width as a fraction of each box width.
  double jitter = 0.1;
  /// Stop when every vertex is within x_tol of the best one (natural coordinates, max norm).
  double x_tol = 1e-8;
  /// Or when the criterion values across the simplex differ by less than f_tol.
  double f_tol = 1e-20;
  int max_iterations = 4000;
  /// Initial simplex edge in unconstrained coordinates.
  double initial_step = 0.5;
  std::uint64_t seed = 1;
};

struct RestartRecord {
  std::vector<double> start;
  std::vector<double> theta;
  double q = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct OptimizerTrace {
  std::vector<RestartRecord> restarts;
  int best = -1;
  int total_iterations() const;
  bool converged() const;
};

struct EstimateResult {
  std::string family;
  std::vector<std::string> param_names;
  std::vector<double> theta;
  double q = 0.0;
  int k = 0;
  int n = 0;
  std::string g;
  bool near_boundary = false;
  OptimizerTrace trace;
  /// M(theta_hat) / k and its diagonal square roots; empty until inference fills them.
  Eigen::MatrixXd covariance;
  std::vector<double> std_errors;
  std::vector<std::string> warnings;

  nlohmann::json to_json(const Family& family) const;
};

/// Nelder-Mead on the family's unconstrained coordinates with multi-start. The returned
/// theta is canonical. Throws FitError carrying the trace when no start converged.
EstimateResult minimize(const Criterion& criterion, std::span<const double> start,
                        const OptimizerOptions& options = {});

/// Distance threshold used for the near-boundary flag.
inline constexpr double kNearBoundary = 1e-4;

struct EstimationConfig {
  int k = 0;
  /// Defaults to the family's weight functions.
  std::optional<WeightSpec> g;
  CubatureSpec phi_spec = CubatureSpec::fixed(std::size_t{1} << 14);
  OptimizerOptions optimizer;
  /// Defaults to k-means for factor models with r > 1, otherwise the family's default.
  std::optional<std::vector<double>> start;
};

/// Builds the criterion from the sample's ranks and minimizes it.
EstimateResult estimate(FamilyPtr family, const Sample& sample, const EstimationConfig& config);
EstimateResult estimate(FamilyPtr family, const RankMatrix& ranks, const EstimationConfig& config);

/// Starting point for factor models from r-means clustering of the largest pseudo-observations:
/// rows n/(n+1-R_ij) with coordinate sum above n/threshold_divisor are projected onto the simplex
/// and clustered; the centers are converted to loadings by nonnegative least squares on the
/// masses. Returns canonical theta.
std::vector<double> factor_init_kmeans(const RankMatrix& ranks, int r,
                                       double threshold_divisor = 75.0, std::uint64_t seed = 1);
std::vector<double> factor_init_kmeans(const Sample& sample, int r,
                                       double threshold_divisor = 75.0, std::uint64_t seed = 1);

/// Loadings from cluster centers w_i (points on the simplex): masses m >= eps minimizing
/// || sum_i m_i w_i - 1 ||, b_ij = m_i w_ij, rows renormalized, columns canonicalized.
Eigen::MatrixXd loadings_from_centers(const std::vector<std::vector<double>>& centers,
                                      double eps = 1e-6);

}  // namespace stdfm
