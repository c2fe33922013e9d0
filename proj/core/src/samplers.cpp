#include "stdfm/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "stdfm/asym_logistic.hpp"
#include "stdfm/error.hpp"
#include "stdfm/factor.hpp"
#include "stdfm/rng.hpp"

namespace stdfm {

namespace {

void check_n(int n, int d) {
  if (n < d) throw DataError("sample size n=" + std::to_string(n) + " is below d=" + std::to_string(d));
}

void check_theta(double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw ParameterDomainError("logistic theta must lie in (0, 1], got " + std::to_string(theta));
  }
}

double frechet(Rng& rng) { return 1.0 / rng.exponential(); }

void logistic_row(double theta, Rng& rng, std::span<double> out) {
  if (theta >= 1.0) {
    for (auto& v : out) v = frechet(rng);
    return;
  }
  const double s = positive_stable(theta, rng);
  for (auto& v : out) v = std::pow(s / rng.exponential(), theta);
}

}  // namespace

double positive_stable(double alpha, Rng& rng) {
  const double u = std::numbers::pi * rng.uniform();
  const double w = rng.exponential();
  const double a = std::pow(std::sin(alpha * u), alpha / (1.0 - alpha)) *
                   std::sin((1.0 - alpha) * u) / std::pow(std::sin(u), 1.0 / (1.0 - alpha));
  return std::pow(a / w, (1.0 - alpha) / alpha);
}

Sample sample_logistic(double theta, int d, int n, std::uint64_t seed) {
  check_theta(theta);
  if (d < 2) throw DataError("dimension must be at least 2");
  check_n(n, d);
  Rng rng(seed);
  Eigen::MatrixXd x(n, d);
  std::vector<double> row(d);
  for (int i = 0; i < n; ++i) {
    logistic_row(theta, rng, row);
    for (int j = 0; j < d; ++j) x(i, j) = row[j];
  }
  return Sample(std::move(x));
}

Sample sample_alog(double theta, double psi1, double psi2, int n, std::uint64_t seed) {
  check_theta(theta);
  for (double psi : {psi1, psi2}) {
    if (!(psi >= 0.0 && psi <= 1.0)) {
      throw ParameterDomainError("asymmetry parameters must lie in [0, 1]");
    }
  }
  check_n(n, 2);
  Rng rng(seed);
  Eigen::MatrixXd x(n, 2);
  double v[2];
  for (int i = 0; i < n; ++i) {
    logistic_row(theta, rng, v);
    const double z1 = frechet(rng);
    const double z2 = frechet(rng);
    x(i, 0) = std::max((1.0 - psi1) * z1, psi1 * v[0]);
    x(i, 1) = std::max((1.0 - psi2) * z2, psi2 * v[1]);
  }
  return Sample(std::move(x));
}

Sample sample_factor(const Eigen::MatrixXd& a, double nu, int n, std::uint64_t seed,
                     FactorForm form, double noise) {
  const int d = static_cast<int>(a.rows());
  const int r = static_cast<int>(a.cols());
  if (d < 2 || r < 1) throw DataError("loadings must be d x r with d >= 2 and r >= 1");
  if (!(nu > 0.0)) throw ParameterDomainError("tail index nu must be positive");
  if (!a.allFinite() || (a.array() < 0.0).any()) {
    throw ParameterDomainError("loadings must be finite and nonnegative");
  }
  for (int i = 0; i < r; ++i) {
    if (!(a.col(i).maxCoeff() > 0.0)) {
      throw ParameterDomainError("factor " + std::to_string(i + 1) + " has all-zero loadings");
    }
  }
  for (int j = 0; j < d; ++j) {
    if (!(a.row(j).maxCoeff() > 0.0)) {
      throw ParameterDomainError("coordinate " + std::to_string(j + 1) + " loads on no factor");
    }
  }
  if (!(noise >= 0.0)) throw ParameterDomainError("noise scale must be nonnegative");
  check_n(n, d);
  Rng rng(seed);
  Eigen::MatrixXd x(n, d);
  std::vector<double> z(r);
  for (int t = 0; t < n; ++t) {
    for (auto& zi : z) zi = std::pow(rng.exponential(), -1.0 / nu);
    for (int j = 0; j < d; ++j) {
      double v = 0.0;
      for (int i = 0; i < r; ++i) {
        v = form == FactorForm::Max ? std::max(v, a(j, i) * z[i]) : v + a(j, i) * z[i];
      }
      if (form == FactorForm::Sum && noise > 0.0) v += noise * rng.normal();
      x(t, j) = v;
    }
  }
  return Sample(std::move(x));
}

Sample sample_family(const Family& family, std::span<const double> theta, int n,
                     std::uint64_t seed) {
  family.validate(theta);
  const std::string name = family.name();
  if (name == "logistic") return sample_logistic(theta[0], family.dimension(), n, seed);
  if (const auto* alog = dynamic_cast<const AsymLogisticFamily*>(&family)) {
    const auto nat = alog->natural(theta);
    return sample_alog(nat[0], nat[1], nat[2], n, seed);
  }
  if (const auto* factor = dynamic_cast<const FactorFamily*>(&family)) {
    return sample_factor(factor->loadings(theta), 1.0, n, seed);
  }
  throw Error("no sampler for family " + name);
}

}  // namespace stdfm
