#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "stdfm/error.hpp"
#include "stdfm/factor.hpp"
#include "stdfm/inference.hpp"
#include "stdfm/logistic.hpp"
#include "stdfm/rng.hpp"
#include "stdfm/samplers.hpp"
#include "support.hpp"

using namespace stdfm;

namespace {

std::vector<testing::FamilyCase> cases() {
  Eigen::MatrixXd B(3, 2);
  B << 0.2, 0.8, 0.6, 0.4, 0.9, 0.1;
  return {{make_family("logistic", 2), {0.5}},
          {make_family("logistic", 3), {0.3}},
          {make_family("alog", 2), {0.4, 0.6, 0.2}},
          {make_family("factor:2", 3), stack_loadings(B)}};
}

}  // namespace

TEST_CASE("wl_cov examples") {
  const auto l = [](std::span<const double> x) { return logistic_l(0.5, x); };
  const std::vector<double> x = {0.7, 1.3};
  CHECK(wl_cov(l, x, x) == doctest::Approx(l(x)));
  const auto ind = [](std::span<const double> z) { return logistic_l(1.0, z); };
  CHECK(wl_cov(ind, std::vector<double>{1, 0}, std::vector<double>{0, 1}) == doctest::Approx(0.0));
  CHECK(wl_cov(l, std::vector<double>{1, 0, 0}, std::vector<double>{0.4, 0, 0}) == doctest::Approx(0.4));
}

TEST_CASE("wl_cov satisfies Cauchy-Schwarz") {
  std::mt19937_64 gen(1);
  for (const auto& c : cases()) {
    const auto l = [&](std::span<const double> z) { return c.family->stdf(c.theta, z); };
    for (int t = 0; t < 200; ++t) {
      const int d = c.family->dimension();
      const auto x = testing::random_point(gen, d, 0.0, 1.0);
      const auto y = testing::random_point(gen, d, 0.0, 1.0);
      const double w = wl_cov(l, x, y);
      REQUIRE(w * w <= l(x) * l(y) + 1e-12);
    }
  }
}

TEST_CASE("b_cov examples") {
  const CovKernel k(make_family("logistic", 2), {0.5});
  const std::vector<double> zero = {0, 0}, ones = {1, 1};
  CHECK(k.b_cov(zero, ones) == 0.0);
  CHECK(k.b_cov(zero, zero) == 0.0);
  // hand expansion: sqrt2 - 4 (1/sqrt2) + 2 (1/2) + 2 (1/2)(2 - sqrt2)
  CHECK(k.b_cov(ones, ones) == doctest::Approx(3.0 - 2.0 * std::sqrt(2.0)).epsilon(1e-12));
  // B vanishes on the axes: B(x e_j) = W_l(x e_j) - W_l(x e_j)
  const std::vector<double> axis = {0.6, 0.0};
  CHECK(std::abs(k.b_cov(axis, axis)) < 1e-14);
}

TEST_CASE("b_cov is symmetric and positive semidefinite") {
  std::mt19937_64 gen(2);
  for (const auto& c : cases()) {
    const CovKernel k(c.family, c.theta);
    const int d = c.family->dimension();
    std::vector<std::vector<double>> pts;
    for (int t = 0; t < 40; ++t) pts.push_back(testing::random_point(gen, d, 0.0, 1.0));
    Eigen::MatrixXd gram(pts.size(), pts.size());
    for (std::size_t a = 0; a < pts.size(); ++a) {
      REQUIRE(k.b_cov(pts[a], pts[a]) >= -1e-14);
      for (std::size_t b = 0; b < pts.size(); ++b) {
        gram(a, b) = k.b_cov(pts[a], pts[b]);
        REQUIRE(gram(a, b) == k.b_cov(pts[b], pts[a]));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("sigma_matrix basics") {
  const CovKernel k(make_family("logistic", 2), {0.5});
  const auto zero = sigma_matrix(k, WeightSpec::parse("0", 2));
  CHECK(zero(0, 0) == 0.0);
  const auto s = sigma_matrix(k, WeightSpec::parse("1;x1;x2^2", 2));
  CHECK((s - s.transpose()).norm() == 0.0);
  CHECK(s(0, 0) > 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  CHECK(eig.eigenvalues().minCoeff() >= 0.0);
  CHECK_THROWS_AS(floor_psd((Eigen::MatrixXd(2, 2) << 1, 0, 0, -1e-3).finished()), NumericalError);
}

TEST_CASE("sigma_matrix against simulated integrated estimators") {
  // Var of sqrt(k) (int l_hat - int l) across replications estimates Sigma for g = 1
  const auto fam = make_family("logistic", 2);
  const std::vector<double> th = {0.5};
  const auto g = WeightSpec::constant(2);
  const double truth = fam->phi(th, g, {})[0];
  const double sigma = sigma_matrix(CovKernel(fam, th), g)(0, 0);
  const int reps = 2000, n = 20000, k = 400;
  double s = 0.0, s2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto est = EmpiricalStdf::from_sample(sample_logistic(0.5, 2, n, substream_seed(77, r)), k);
    const double v = std::sqrt(k) * (integral_g_empirical(est, g)[0] - truth);
    s += v;
    s2 += v * v;
  }
  const double var = (s2 - s * s / reps) / (reps - 1);
  CHECK(var == doctest::Approx(sigma).epsilon(0.10));
}

TEST_CASE("m_matrix algebra") {
  Eigen::MatrixXd j(2, 2);
  j << 2.0, 0.5, -0.3, 1.0;
  Eigen::MatrixXd s(2, 2);
  s << 1.0, 0.2, 0.2, 0.5;
  const auto m = m_from_parts(j, s);
  const Eigen::MatrixXd expected = j.inverse() * s * j.inverse().transpose();
  CHECK((m - expected).norm() < 1e-12);

  Eigen::MatrixXd tall(3, 2);
  tall << 1, 0, 0, 1, 1, 1;
  const Eigen::MatrixXd s3 = Eigen::MatrixXd::Identity(3, 3);
  const auto m3 = m_from_parts(tall, s3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m3);
  CHECK(eig.eigenvalues().minCoeff() >= 0.0);
  const Eigen::MatrixXd a = (tall.transpose() * tall).inverse() * tall.transpose();
  CHECK((m3 - a * s3 * a.transpose()).norm() < 1e-12);

  Eigen::MatrixXd flat(2, 2);
  flat << 1, 1, 1, 1;
  try {
    m_from_parts(flat, s);
    FAIL("expected IdentifiabilityError");
  } catch (const IdentifiabilityError& e) {
    const auto& v = e.null_direction();
    REQUIRE(v.size() == 2);
    CHECK(std::abs(v[0] + v[1]) < 1e-12);
  }
}

TEST_CASE("M predicts the logistic RMSE at k = 150") {
  const auto mm = m_matrix(make_family("logistic", 2), std::vector<double>{0.5}, WeightSpec::constant(2));
  const double predicted = std::sqrt(mm.m(0, 0) / 150);
  CHECK(predicted > 0.034 * 0.75);
  CHECK(predicted < 0.034 * 1.25);
  CHECK(mm.lower_block(1)(0, 0) == mm.m(0, 0));
}

TEST_CASE("the optimal weight function does not increase M") {
  const auto fam = make_family("logistic", 2);
  const std::vector<double> th = {0.5};
  const CovKernel kernel(fam, th);
  const auto dl = [](std::span<const double> x) { return logistic_theta_derivative(0.5, x); };
  const auto spec = CubatureSpec::fixed(std::size_t{1} << 16);
  const double sigma = integrate_cube(
      [&](std::span<const double> u) { return kernel.b_cov(u.subspan(0, 2), u.subspan(2, 2)) * dl(u.subspan(0, 2)) * dl(u.subspan(2, 2)); },
      4, spec).value;
  const double jac = integrate_cube([&](std::span<const double> x) { return dl(x) * dl(x); }, 2, spec).value;
  const double m_opt = sigma / (jac * jac);
  const double m_one = m_matrix(fam, th, WeightSpec::constant(2)).m(0, 0);
  CHECK(m_opt <= m_one * 1.001);
}

TEST_CASE("confidence statistic and submodel test") {
  const auto fam = make_family("alog", 2);
  const Sample s = sample_alog(0.5, 0.6, 0.6, 3000, 3);
  EstimationConfig cfg;
  cfg.k = 200;
  auto res = estimate(fam, s, cfg);
  const auto g = fam->default_weights();
  attach_covariance(res, fam, g);
  CHECK(res.std_errors.size() == 3);
  CHECK(confidence_statistic(res, res.theta) == 0.0);
  std::mt19937_64 gen(4);
  for (int t = 0; t < 20; ++t) {
    auto th0 = res.theta;
    th0[0] += std::uniform_real_distribution<double>(-0.1, 0.1)(gen);
    CHECK(confidence_statistic(res, th0) >= 0.0);
  }

  const auto hyp = parse_hypothesis(*fam, "eta2=0");
  REQUIRE(hyp.size() == 1);
  CHECK(hyp[0].first == 2);
  const auto test = submodel_test(fam, res, hyp, g);
  CHECK(test.statistic >= 0.0);
  CHECK(test.dof == 1);
  CHECK(test.p_value == doctest::Approx(chi_squared_sf(test.statistic, 1)));
  const auto j = test.to_json();
  for (const char* key : {"statistic", "dof", "p_value", "k", "model", "hypothesis"}) CHECK(j.contains(key));

  const auto at_fit = submodel_test(fam, res, {{2, res.theta[2]}}, g);
  CHECK(at_fit.statistic == 0.0);
  CHECK(at_fit.p_value == 1.0);

  // rank-based: strictly increasing transforms leave everything unchanged
  Eigen::MatrixXd tr = s.data();
  tr.col(0) = tr.col(0).array().sqrt();
  tr.col(1) = tr.col(1).array().cube() + 4.0;
  auto res2 = estimate(fam, Sample(tr), cfg);
  attach_covariance(res2, fam, g);
  CHECK(submodel_test(fam, res2, hyp, g).statistic == test.statistic);
  const std::vector<double> th0 = {0.5, 0.6, 0.0};
  CHECK(confidence_statistic(res2, th0) == confidence_statistic(res, th0));

  CHECK_THROWS_AS(parse_hypothesis(*fam, "zeta=0"), DataError);
  CHECK_THROWS_AS(parse_hypothesis(*fam, "eta2"), DataError);
  CHECK_THROWS_AS(confidence_statistic(std::vector<double>{0.5}, Eigen::MatrixXd::Zero(1, 1), 10,
                                       std::vector<double>{0.4}),
                  NumericalError);
}

TEST_CASE("chi-squared helpers") {
  CHECK(chi_squared_quantile(0.95, 1) == doctest::Approx(3.84).epsilon(1e-3));
  CHECK(chi_squared_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(std::isinf(chi_squared_quantile(1.0, 2)));
  CHECK(chi_squared_sf(0.0, 3) == 1.0);
}
