#include <doctest.h>

#include <cmath>
#include <sstream>

#include "stdfm/empirical.hpp"
#include "stdfm/error.hpp"
#include "stdfm/factor.hpp"
#include "stdfm/logistic.hpp"
#include "stdfm/rng.hpp"
#include "stdfm/samplers.hpp"
#include "support.hpp"

using namespace stdfm;

namespace {

Eigen::MatrixXd reference_loadings() {
  Eigen::MatrixXd B(4, 2);
  B << 0.2, 0.8, 0.5, 0.5, 0.7, 0.3, 0.9, 0.1;
  return B;
}

// Monte Carlo standard error of l_hat(x) around the truth, using the binomial count.
double lhat_se(double l, int k) { return std::sqrt(l / k); }

std::vector<double> frechet_to_uniform(const Sample& s, int j, double scale = 1.0) {
  std::vector<double> u(s.n());
  for (int i = 0; i < s.n(); ++i) u[i] = std::exp(-scale / s.data()(i, j));
  return u;
}

}  // namespace

TEST_CASE("positive stable variates have Laplace transform exp(-s^alpha)") {
  Rng rng(1);
  const double alpha = 0.6;
  const int n = 400000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += std::exp(-positive_stable(alpha, rng));
  CHECK(acc / n == doctest::Approx(std::exp(-1.0)).epsilon(5e-3));
}

TEST_CASE("logistic sampler") {
  const int n = 100000, k = 1000;
  const double ones[2] = {1.0, 1.0};
  const auto ind = EmpiricalStdf::from_sample(sample_logistic(1.0, 2, n, 1), k);
  CHECK(std::abs(ind(ones) - 2.0) < 3 * lhat_se(2.0, k));
  const auto dep = EmpiricalStdf::from_sample(sample_logistic(0.5, 2, n, 2), k);
  CHECK(std::abs(dep(ones) - std::sqrt(2.0)) < 3 * lhat_se(std::sqrt(2.0), k));

  const Sample s = sample_logistic(0.4, 3, n, 3);
  for (int j = 0; j < 3; ++j) CHECK(testing::ks_uniform_pvalue(frechet_to_uniform(s, j)) > 1e-3);
  CHECK_THROWS_AS(sample_logistic(0.0, 2, 10, 1), ParameterDomainError);
  CHECK_THROWS_AS(sample_logistic(1.5, 2, 10, 1), ParameterDomainError);
}

TEST_CASE("asymmetric logistic sampler") {
  const int n = 100000, k = 1000;
  const double ones[2] = {1.0, 1.0};
  const auto ind = EmpiricalStdf::from_sample(sample_alog(0.5, 0.0, 0.0, n, 4), k);
  CHECK(std::abs(ind(ones) - 2.0) < 3 * lhat_se(2.0, k));
  const auto fitted = EmpiricalStdf::from_sample(sample_alog(0.65, 0.95, 0.95, n, 5), k);
  CHECK(std::abs(fitted(ones) - 1.5907) < 3 * lhat_se(1.5907, k));

  // psi = 1 is the logistic law
  const Sample a = sample_alog(0.5, 1.0, 1.0, 20000, 6);
  const Sample b = sample_logistic(0.5, 2, 20000, 7);
  for (int j = 0; j < 2; ++j) {
    std::vector<double> va(a.data().col(j).data(), a.data().col(j).data() + a.n());
    std::vector<double> vb(b.data().col(j).data(), b.data().col(j).data() + b.n());
    CHECK(testing::ks_two_sample_pvalue(va, vb) > 1e-3);
  }
  std::vector<double> ma(a.n()), mb(b.n());
  for (int i = 0; i < a.n(); ++i) {
    ma[i] = std::min(a.data()(i, 0), a.data()(i, 1));
    mb[i] = std::min(b.data()(i, 0), b.data()(i, 1));
  }
  CHECK(testing::ks_two_sample_pvalue(ma, mb) > 1e-3);

  const Sample c = sample_alog(0.3, 0.8, 0.4, n, 8);
  for (int j = 0; j < 2; ++j) CHECK(testing::ks_uniform_pvalue(frechet_to_uniform(c, j)) > 1e-3);
}

TEST_CASE("factor sampler") {
  const Sample one = sample_factor(Eigen::MatrixXd::Ones(3, 1), 1.0, 1000, 9);
  for (int i = 0; i < one.n(); ++i) {
    REQUIRE(one.data()(i, 0) == one.data()(i, 1));
    REQUIRE(one.data()(i, 1) == one.data()(i, 2));
  }
  const std::vector<double> ones3(3, 1.0);
  CHECK(EmpiricalStdf::from_sample(one, 50)(ones3) == doctest::Approx(1.0));

  const int n = 100000, k = 1000;
  const Sample s = sample_factor(reference_loadings(), 1.0, n, 10);
  const std::vector<double> ones4(4, 1.0);
  CHECK(std::abs(EmpiricalStdf::from_sample(s, k)(ones4) - 1.7) < 3 * lhat_se(1.7, k));
  for (int j = 0; j < 4; ++j) CHECK(testing::ks_uniform_pvalue(frechet_to_uniform(s, j)) > 1e-3);

  // nu = 2: margin scale sum_i a_ij^nu
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 2.0, 0.5, 0.3;
  const Sample t = sample_factor(a, 2.0, 50000, 11);
  for (int j = 0; j < 2; ++j) {
    const double scale = std::pow(a(j, 0), 2) + std::pow(a(j, 1), 2);
    std::vector<double> u(t.n());
    for (int i = 0; i < t.n(); ++i) u[i] = std::exp(-scale / std::pow(t.data()(i, j), 2.0));
    CHECK(testing::ks_uniform_pvalue(u) > 1e-3);
  }

  Eigen::MatrixXd zero(2, 2);
  zero << 1.0, 0.0, 1.0, 0.0;
  CHECK_THROWS_AS(sample_factor(zero, 1.0, 10, 1), ParameterDomainError);
  CHECK_THROWS_AS(sample_factor(reference_loadings(), 0.0, 10, 1), ParameterDomainError);

  const Sample sum = sample_factor(reference_loadings(), 1.0, 1000, 12, FactorForm::Sum, 1.0);
  CHECK(sum.n() == 1000);
}

TEST_CASE("samplers are seed deterministic") {
  std::ostringstream a, b, c;
  write_csv(a, sample_logistic(0.5, 3, 200, 42));
  write_csv(b, sample_logistic(0.5, 3, 200, 42));
  write_csv(c, sample_logistic(0.5, 3, 200, 43));
  CHECK(a.str() == b.str());
  CHECK(a.str() != c.str());
  std::ostringstream d, e;
  write_csv(d, sample_factor(reference_loadings(), 1.0, 100, 5, FactorForm::Sum, 0.5));
  write_csv(e, sample_factor(reference_loadings(), 1.0, 100, 5, FactorForm::Sum, 0.5));
  CHECK(d.str() == e.str());
  CHECK(substream_seed(1, 0) != substream_seed(1, 1));
  CHECK(substream_seed(1, 0) != substream_seed(2, 0));
}

TEST_CASE("l_hat from sampler output approaches l as n grows") {
  const auto grid = std::vector<std::vector<double>>{
      {1.0, 1.0}, {0.5, 1.0}, {1.0, 0.2}, {0.3, 0.7}, {0.9, 0.9}};
  const auto fam = make_family("alog", 2);
  const std::vector<double> th = {0.5, 0.6, 0.2};
  double err_small = 0.0, err_large = 0.0;
  for (int n : {10000, 100000}) {
    const int k = static_cast<int>(std::pow(n, 0.6));
    const auto est = EmpiricalStdf::from_sample(sample_family(*fam, th, n, 13), k);
    double e = 0.0;
    for (const auto& x : grid) e = std::max(e, std::abs(est(x) - fam->stdf(th, x)));
    (n == 10000 ? err_small : err_large) = e;
  }
  CHECK(err_large < err_small);
}
