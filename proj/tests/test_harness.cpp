#include <doctest.h>

#include <cmath>
#include <sstream>

#include "stdfm/error.hpp"
#include "stdfm/harness.hpp"

using namespace stdfm;

TEST_CASE("summarize") {
  const std::vector<double> v = {0.4, 0.5, 0.7};
  const auto s = summarize(v, 0.5);
  CHECK(s.count == 3);
  CHECK(s.mean == doctest::Approx(1.6 / 3));
  CHECK(s.bias == doctest::Approx(1.6 / 3 - 0.5));
  CHECK(s.rmse == doctest::Approx(std::sqrt((0.01 + 0.0 + 0.04) / 3)));
  CHECK(s.rmse * s.rmse >= s.bias * s.bias);
  const auto one = summarize(std::vector<double>{0.3}, 0.5);
  CHECK(one.rmse == doctest::Approx(0.2));
  CHECK(one.bias == doctest::Approx(-0.2));
}

TEST_CASE("k grid default") {
  const auto g = default_k_grid();
  REQUIRE(g.size() == 8);
  CHECK(g.front() == 40);
  CHECK(g.back() == 320);
}

TEST_CASE("single replication study") {
  const auto fam = make_family("logistic", 2);
  const std::vector<double> th = {0.5};
  OptimizerOptions opt;
  opt.restarts = 1;
  const auto rep = run_study(fam, th, 500, 1, {50, 100}, std::nullopt, 3, opt, CubatureSpec::fixed(1024), 1);
  REQUIRE(rep.stats.size() == 2);
  for (const auto& row : rep.stats) {
    const auto& s = row[0];
    CHECK(s.count == 1);
    CHECK(s.rmse == doctest::Approx(std::abs(s.bias)));
  }
}

TEST_CASE("aggregation does not depend on the worker count") {
  const auto fam = make_family("logistic", 2);
  const std::vector<double> th = {0.6};
  OptimizerOptions opt;
  opt.restarts = 2;
  const auto a = run_study(fam, th, 400, 12, {40, 80}, std::nullopt, 9, opt, CubatureSpec::fixed(1024), 1);
  const auto b = run_study(fam, th, 400, 12, {40, 80}, std::nullopt, 9, opt, CubatureSpec::fixed(1024), 4);
  std::ostringstream ca, cb;
  a.write_csv(ca);
  b.write_csv(cb);
  CHECK(ca.str() == cb.str());
  CHECK(a.estimates == b.estimates);
  for (const auto& row : a.stats)
    for (const auto& s : row) CHECK(s.rmse * s.rmse >= s.bias * s.bias * (1 - 1e-12));
  CHECK_FALSE(a.flagged);
}

TEST_CASE("derived quantity study reports both estimators") {
  const auto fam = make_family("logistic", 2);
  const std::vector<double> th = {0.5};
  OptimizerOptions opt;
  opt.restarts = 1;
  const auto target = stdf_at_ones(fam, th);
  CHECK(target.truth == doctest::Approx(std::sqrt(2.0)));
  const auto rep = run_derived_quantity_study(fam, th, target, 600, 4, {60}, std::nullopt, 5, opt,
                                              CubatureSpec::fixed(1024), 2);
  REQUIRE(rep.plug_in.size() == 1);
  REQUIRE(rep.nonparametric.size() == 1);
  CHECK(rep.plug_in[0].count == 4);
  CHECK(rep.nonparametric[0].count == 4);
  CHECK(rep.to_json().contains("derived"));
}

TEST_CASE("coverage with level one covers everything") {
  const auto fam = make_family("logistic", 2);
  const std::vector<double> th = {0.5};
  OptimizerOptions opt;
  opt.restarts = 1;
  InferenceConfig inf;
  inf.phi_spec = CubatureSpec::fixed(1024);
  inf.sigma_spec = CubatureSpec::fixed(4096);
  const auto rep = run_coverage_study(fam, th, 800, 4, 80, std::nullopt, 1.0, 11, opt, inf, 2);
  CHECK(std::isinf(rep.critical_value));
  CHECK(rep.valid + rep.failures == 4);
  CHECK(rep.covered == rep.valid);
  CHECK(rep.coverage == 1.0);
  CHECK(rep.rejection_rate == 0.0);
}

TEST_CASE("parallel_for runs every index and rethrows") {
  std::vector<int> hits(50, 0);
  parallel_for(50, 3, [&](int i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 2, [](int i) {
                    if (i == 7) throw FitError("boom");
                  }),
                  FitError);
}

TEST_CASE("study config JSON") {
  const auto cfg = StudyConfig::from_json(nlohmann::json::parse(
      R"({"kind": "estimation", "model": "alog", "d": 2, "theta0": [0.5, 0.6, 0.2],
          "n": 300, "reps": 3, "k_grid": [30, 60], "seed": 4, "restarts": 2})"));
  CHECK(cfg.model == "alog");
  CHECK(cfg.reps == 3);
  CHECK(cfg.optimizer.restarts == 2);
  CHECK(cfg.k_grid == std::vector<int>{30, 60});
  const auto again = StudyConfig::from_json(cfg.to_json());
  CHECK(again.to_json() == cfg.to_json());
  std::ostringstream sink;
  CHECK_THROWS_AS(run_configured_study(StudyConfig::from_json(nlohmann::json::parse(
                      R"({"kind": "nope", "theta0": [0.5]})")), sink),
                  DataError);
  CHECK_THROWS_AS(StudyConfig::from_json(nlohmann::json::parse(R"({"reps": "x"})")), DataError);
}

TEST_CASE("configured study is reproducible") {
  auto cfg = StudyConfig::from_json(nlohmann::json::parse(
      R"({"model": "logistic", "d": 2, "theta0": [0.5], "n": 300, "reps": 3,
          "k_grid": [30], "seed": 2, "restarts": 1, "phi_points": 1024})"));
  std::ostringstream a, b;
  const auto ja = run_configured_study(cfg, a);
  cfg.workers = 3;
  const auto jb = run_configured_study(cfg, b);
  CHECK(a.str() == b.str());
  CHECK(ja.contains("config"));
}
