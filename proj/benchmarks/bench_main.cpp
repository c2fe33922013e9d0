#include <benchmark/benchmark.h>

#include "stdfm/empirical.hpp"
#include "stdfm/estimator.hpp"
#include "stdfm/factor.hpp"
#include "stdfm/inference.hpp"
#include "stdfm/samplers.hpp"

using namespace stdfm;

static void BM_EmpiricalIntegral(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto est = EmpiricalStdf::from_sample(sample_logistic(0.5, 3, n, 1), n / 10);
  const auto g = WeightSpec::parse("1;x1;x2^2", 3);
  for (auto _ : state) benchmark::DoNotOptimize(integral_g_empirical(est, g));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EmpiricalIntegral)->Arg(1500)->Arg(100000);

static void BM_RankSample(benchmark::State& state) {
  const Sample s = sample_logistic(0.5, 2, static_cast<int>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(compute_ranks(s));
}
BENCHMARK(BM_RankSample)->Arg(1500)->Arg(100000);

static void BM_PhiLogistic(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const auto fam = make_family("logistic", d);
  const std::vector<double> th = {0.5};
  const auto g = WeightSpec::constant(d);
  const auto spec = CubatureSpec::fixed(std::size_t{1} << 14);
  for (auto _ : state) benchmark::DoNotOptimize(fam->phi(th, g, spec));
}
BENCHMARK(BM_PhiLogistic)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_FactorClosedForm(benchmark::State& state) {
  Eigen::MatrixXd b(4, 2);
  b << 0.2, 0.8, 0.5, 0.5, 0.7, 0.3, 0.9, 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(factor_weighted_integral(b, 2, 1.0));
}
BENCHMARK(BM_FactorClosedForm);

static void BM_CovKernel(benchmark::State& state) {
  const CovKernel k(make_family("logistic", 2), std::vector<double>{0.5});
  const std::vector<double> x = {0.3, 0.8}, y = {0.6, 0.2};
  for (auto _ : state) benchmark::DoNotOptimize(k.b_cov(x, y));
}
BENCHMARK(BM_CovKernel);

static void BM_SigmaMatrix(benchmark::State& state) {
  const CovKernel k(make_family("logistic", 2), std::vector<double>{0.5});
  const auto g = WeightSpec::constant(2);
  const auto spec = CubatureSpec::fixed(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sigma_matrix(k, g, spec));
}
BENCHMARK(BM_SigmaMatrix)->Arg(1 << 12)->Arg(1 << 16)->Unit(benchmark::kMillisecond);

static void BM_EstimateLogistic(benchmark::State& state) {
  const auto fam = make_family("logistic", static_cast<int>(state.range(0)));
  const Sample s = sample_logistic(0.5, fam->dimension(), 1500, 3);
  EstimationConfig cfg;
  cfg.k = 150;
  cfg.optimizer.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(estimate(fam, s, cfg));
}
BENCHMARK(BM_EstimateLogistic)->Arg(2)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_EstimateFactor(benchmark::State& state) {
  Eigen::MatrixXd b(4, 2);
  b << 0.2, 0.8, 0.5, 0.5, 0.7, 0.3, 0.9, 0.1;
  const auto fam = make_family("factor:2", 4);
  const Sample s = sample_factor(b, 1.0, 5000, 4);
  EstimationConfig cfg;
  cfg.k = 250;
  for (auto _ : state) benchmark::DoNotOptimize(estimate(fam, s, cfg));
}
BENCHMARK(BM_EstimateFactor)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
