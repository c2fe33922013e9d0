#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "stdfm/sample.hpp"
#include "stdfm/weight_spec.hpp"

namespace stdfm {

/// The rank-based estimator
///   l_hat(x) = (1/k) #{ i : R_i^j > n + 1/2 - k x_j for some j },
/// stored through its threshold matrix a_ij = (n + 1/2 - R_i^j) / k, so that the
/// indicator reads x_j > a_ij.
class EmpiricalStdf {
 public:
  EmpiricalStdf(const RankMatrix& ranks, int k);
  static EmpiricalStdf from_sample(const Sample& sample, int k);

  int n() const { return static_cast<int>(thresholds_.rows()); }
  int d() const { return static_cast<int>(thresholds_.cols()); }
  int k() const { return k_; }

  using ThresholdMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const ThresholdMatrix& thresholds() const { return thresholds_; }

  double operator()(std::span<const double> x) const;

 private:
  ThresholdMatrix thresholds_;
  int k_;
};

/// Exact values of int_{[0,1]^d} g_m(x) l_hat(x) dx, m = 1..q.
///
/// Row i contributes int g - int_{box [0,c_i]} g with c_ij = clamp(a_ij, 0, 1); for a
/// monomial prod x_j^{p_j} that is prod 1/(p_j+1) - prod c_ij^{p_j+1}/(p_j+1).
std::vector<double> integral_g_empirical(const EmpiricalStdf& est, const WeightSpec& g);

}  // namespace stdfm
