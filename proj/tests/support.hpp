#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "stdfm/family.hpp"

namespace testing {

/// Kolmogorov distribution tail P(K > t).
inline double kolmogorov_sf(double t) {
  if (t <= 0.0) return 1.0;
  double s = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    s += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

/// One-sample KS p-value against the uniform law on (0,1).
inline double ks_uniform_pvalue(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double dmax = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dmax = std::max({dmax, (i + 1) / n - u[i], u[i] - i / n});
  }
  const double sn = std::sqrt(n);
  return kolmogorov_sf((sn + 0.12 + 0.11 / sn) * dmax);
}

/// Two-sample KS p-value.
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double dmax = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    dmax = std::max(dmax, std::abs(i / na - j / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return kolmogorov_sf((ne + 0.12 + 0.11 / ne) * dmax);
}

inline std::vector<double> random_point(std::mt19937_64& gen, int d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> x(d);
  for (auto& v : x) v = u(gen);
  return x;
}

/// Central difference of f along coordinate j.
inline double central_diff(const std::function<double(std::span<const double>)>& f,
                           std::vector<double> x, int j, double h) {
  auto xp = x, xm = x;
  xp[j] += h;
  xm[j] -= h;
  return (f(xp) - f(xm)) / (2.0 * h);
}

/// Feasible parameter vectors used by the property tests.
struct FamilyCase {
  stdfm::FamilyPtr family;
  std::vector<double> theta;
};

}  // namespace testing
