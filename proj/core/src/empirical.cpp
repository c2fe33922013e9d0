#include "stdfm/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stdfm/error.hpp"
#include "stdfm/quadrature.hpp"

namespace stdfm {

EmpiricalStdf::EmpiricalStdf(const RankMatrix& ranks, int k) : k_(k) {
  const int n = ranks.n();
  if (k < 1 || k > n) {
    throw DataError("threshold k must satisfy 1 <= k <= n, got k=" + std::to_string(k) +
                    ", n=" + std::to_string(n));
  }
  thresholds_.resize(n, ranks.d());
  const double top = n + 0.5;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < ranks.d(); ++j) thresholds_(i, j) = (top - ranks.ranks(i, j)) / k;
}

EmpiricalStdf EmpiricalStdf::from_sample(const Sample& sample, int k) {
  return EmpiricalStdf(compute_ranks(sample), k);
}

double EmpiricalStdf::operator()(std::span<const double> x) const {
  const int dd = d();
  long count = 0;
  for (int i = 0; i < n(); ++i) {
    const double* a = thresholds_.data() + static_cast<std::ptrdiff_t>(i) * dd;
    for (int j = 0; j < dd; ++j) {
      if (x[j] > a[j]) {
        ++count;
        break;
      }
    }
  }
  return static_cast<double>(count) / k_;
}

std::vector<double> integral_g_empirical(const EmpiricalStdf& est, const WeightSpec& g) {
  if (g.d() != est.d()) throw DataError("weight spec dimension does not match the data");
  const int n = est.n();
  const int d = est.d();

  std::vector<double> result(g.q(), 0.0);
  std::vector<double> per_row(n);
  for (int m = 0; m < g.q(); ++m) {
    for (const auto& term : g[m].terms) {
      double full = 1.0;
      for (int j = 0; j < d; ++j) full /= term.exponents[j] + 1.0;
      for (int i = 0; i < n; ++i) {
        double box = 1.0;
        for (int j = 0; j < d; ++j) {
          const double c = std::clamp(est.thresholds()(i, j), 0.0, 1.0);
          const double e = term.exponents[j] + 1.0;
          box *= (e == 1.0 ? c : (e == 2.0 ? c * c : std::pow(c, e))) / e;
        }
        per_row[i] = full - box;
      }
      result[m] += term.coefficient * pairwise_sum(per_row) / est.k();
    }
  }
  return result;
}

}  // namespace stdfm
