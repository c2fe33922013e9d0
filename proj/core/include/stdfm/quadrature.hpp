#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace stdfm {

/// Randomized quasi-Monte Carlo rule on [0,1]^m: a Sobol sequence under two independent
/// hash-based Owen scrambles. The reported error is the half-range of the two estimates.
struct CubatureSpec {
  double rel_tol = 1e-6;
  /// Points per randomization; rounded down to a power of two.
  std::size_t max_points = std::size_t{1} << 14;
  /// Starting size of the doubling schedule. Setting min_points == max_points gives a
  /// fixed-budget rule, which makes the integral a smooth function of any parameter.
  std::size_t min_points = std::size_t{1} << 10;
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;

  static CubatureSpec fixed(std::size_t points, std::uint64_t seed = 0x9e3779b97f4a7c15ULL) {
    CubatureSpec s;
    s.max_points = points;
    s.min_points = points;
    s.seed = seed;
    return s;
  }
};

struct CubatureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t points = 0;  // per randomization
  bool tolerance_met = false;
};

struct VectorCubatureResult {
  std::vector<double> value;
  std::vector<double> error;
  std::size_t points = 0;
  bool tolerance_met = false;
};

using ScalarIntegrand = std::function<double(std::span<const double>)>;
/// Writes `components` values for one point.
using VectorIntegrand = std::function<void(std::span<const double>, std::span<double>)>;

CubatureResult integrate_cube(const ScalarIntegrand& f, int dimension, const CubatureSpec& spec = {});

VectorCubatureResult integrate_cube(const VectorIntegrand& f, int dimension, int components,
                                    const CubatureSpec& spec = {});

struct IntervalResult {
  double value = 0.0;
  double error = 0.0;
};

/// Adaptive 31-point Gauss-Kronrod on [a, b].
IntervalResult integrate_interval(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol = 1e-12);

/// Deterministic pairwise summation; the result does not depend on how callers chunk work.
double pairwise_sum(std::span<const double> values);

}  // namespace stdfm
