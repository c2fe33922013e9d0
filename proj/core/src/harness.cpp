#include "stdfm/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "stdfm/error.hpp"
#include "stdfm/factor.hpp"
#include "stdfm/rng.hpp"
#include "stdfm/samplers.hpp"

namespace stdfm {

namespace {

constexpr double kFailureFlag = 0.10;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

nlohmann::json stats_json(const ComponentStats& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"bias", s.bias}, {"rmse", s.rmse}, {"sd", s.sd}};
}

void write_stats_rows(std::ostream& out, const std::string& table, int k,
                      const std::string& component, const ComponentStats& s, int failed) {
  out << table << ',' << k << ',' << component << ",bias," << s.bias << '\n';
  out << table << ',' << k << ',' << component << ",rmse," << s.rmse << '\n';
  out << table << ',' << k << ',' << component << ",mean," << s.mean << '\n';
  out << table << ',' << k << ',' << component << ",sd," << s.sd << '\n';
  out << table << ',' << k << ',' << component << ",n_ok," << s.count << '\n';
  out << table << ',' << k << ',' << component << ",n_failed," << failed << '\n';
}

StudyReport study_impl(const FamilyPtr& family, std::span<const double> theta0_in, int n, int reps,
                       const std::vector<int>& k_grid, const std::optional<WeightSpec>& g,
                       std::uint64_t seed, const OptimizerOptions& optimizer,
                       const CubatureSpec& phi_spec, int workers, const DerivedQuantity* target) {
  if (reps < 1) throw DataError("reps must be positive");
  if (k_grid.empty()) throw DataError("empty k grid");
  for (int k : k_grid) {
    if (k < 1 || k >= n) throw DataError("every k must satisfy 1 <= k < n");
  }
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> theta0 = family->canonicalize(theta0_in);
  family->validate(theta0);
  const std::size_t nk = k_grid.size();
  const int p = family->num_params();

  std::vector<std::vector<std::vector<double>>> est(nk, std::vector<std::vector<double>>(reps));
  std::vector<std::vector<double>> plug(nk, std::vector<double>(reps, std::numeric_limits<double>::quiet_NaN()));
  std::vector<std::vector<double>> nonpar(nk, std::vector<double>(reps, std::numeric_limits<double>::quiet_NaN()));

  parallel_for(reps, workers, [&](int rep) {
    const Sample sample = sample_family(*family, theta0, n, substream_seed(seed, rep));
    const RankMatrix ranks = compute_ranks(sample);
    for (std::size_t ki = 0; ki < nk; ++ki) {
      EstimationConfig cfg;
      cfg.k = k_grid[ki];
      cfg.g = g;
      cfg.phi_spec = phi_spec;
      cfg.optimizer = optimizer;
      try {
        const auto res = estimate(family, ranks, cfg);
        est[ki][rep] = res.theta;
        if (target) plug[ki][rep] = target->plug_in(res.theta);
      } catch (const Error&) {
      }
      if (target) nonpar[ki][rep] = target->nonparametric(EmpiricalStdf(ranks, k_grid[ki]));
    }
  });

  StudyReport report;
  report.param_names = family->param_names();
  report.theta0 = theta0;
  report.k_grid = k_grid;
  report.reps = reps;
  report.stats.resize(nk);
  report.failures.assign(nk, 0);
  for (std::size_t ki = 0; ki < nk; ++ki) {
    std::vector<std::vector<double>> comp(p);
    for (int rep = 0; rep < reps; ++rep) {
      if (est[ki][rep].empty() && p > 0) {
        ++report.failures[ki];
        continue;
      }
      for (int c = 0; c < p; ++c) comp[c].push_back(est[ki][rep][c]);
    }
    for (int c = 0; c < p; ++c) report.stats[ki].push_back(summarize(comp[c], theta0[c]));
    if (report.failures[ki] > kFailureFlag * reps) report.flagged = true;
    if (target) {
      std::vector<double> a, b;
      for (int rep = 0; rep < reps; ++rep) {
        if (!std::isnan(plug[ki][rep])) a.push_back(plug[ki][rep]);
        b.push_back(nonpar[ki][rep]);
      }
      report.plug_in.push_back(summarize(a, target->truth));
      report.nonparametric.push_back(summarize(b, target->truth));
    }
  }
  if (target) {
    report.derived_name = target->name;
    report.derived_truth = target->truth;
  }
  report.estimates = std::move(est);
  report.config = {{"model", family->name()}, {"d", family->dimension()}, {"theta0", theta0},
                   {"n", n}, {"reps", reps}, {"k_grid", k_grid},
                   {"g", (g ? *g : family->default_weights()).to_string()}, {"seed", seed},
                   {"restarts", optimizer.restarts}, {"phi_points", phi_spec.max_points}};
  report.wall_seconds = seconds_since(t0);
  return report;
}

CoverageReport finish_coverage(CoverageReport r, std::chrono::steady_clock::time_point t0) {
  r.valid = 0;
  r.covered = 0;
  int rejected = 0;
  for (double s : r.statistics) {
    if (std::isnan(s)) continue;
    ++r.valid;
    if (s <= r.critical_value) {
      ++r.covered;
    } else {
      ++rejected;
    }
  }
  r.failures = r.reps - r.valid;
  r.coverage = r.valid ? static_cast<double>(r.covered) / r.valid : 0.0;
  r.rejection_rate = r.valid ? static_cast<double>(rejected) / r.valid : 0.0;
  r.flagged = r.failures > kFailureFlag * r.reps;
  r.wall_seconds = seconds_since(t0);
  return r;
}

}  // namespace

std::vector<int> default_k_grid() { return {40, 80, 120, 160, 200, 240, 280, 320}; }

ComponentStats summarize(std::span<const double> values, double truth) {
  ComponentStats s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) {
    s.mean = s.bias = s.rmse = s.sd = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  double sq = 0.0;
  for (double v : values) {
    sum += v;
    sq += (v - truth) * (v - truth);
  }
  s.mean = sum / s.count;
  s.bias = s.mean - truth;
  s.rmse = std::sqrt(sq / s.count);
  if (s.count > 1) {
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(var / (s.count - 1));
  }
  return s;
}

DerivedQuantity stdf_at_ones(const FamilyPtr& family, std::span<const double> theta0) {
  const std::vector<double> ones(family->dimension(), 1.0);
  DerivedQuantity q;
  q.name = "l(1,...,1)";
  q.plug_in = [family, ones](std::span<const double> th) { return family->stdf(th, ones); };
  q.nonparametric = [ones](const EmpiricalStdf& e) { return e(ones); };
  q.truth = family->stdf(theta0, ones);
  return q;
}

void parallel_for(int reps, int workers, const std::function<void(int)>& task) {
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, std::max(reps, 1));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto run = [&] {
    for (int rep; (rep = next.fetch_add(1)) < reps;) {
      try {
        task(rep);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

StudyReport run_study(const FamilyPtr& family, std::span<const double> theta0, int n, int reps,
                      const std::vector<int>& k_grid, const std::optional<WeightSpec>& g,
                      std::uint64_t seed, const OptimizerOptions& optimizer,
                      const CubatureSpec& phi_spec, int workers) {
  return study_impl(family, theta0, n, reps, k_grid, g, seed, optimizer, phi_spec, workers, nullptr);
}

StudyReport run_derived_quantity_study(const FamilyPtr& family, std::span<const double> theta0,
                                       const DerivedQuantity& target, int n, int reps,
                                       const std::vector<int>& k_grid,
                                       const std::optional<WeightSpec>& g, std::uint64_t seed,
                                       const OptimizerOptions& optimizer,
                                       const CubatureSpec& phi_spec, int workers) {
  return study_impl(family, theta0, n, reps, k_grid, g, seed, optimizer, phi_spec, workers, &target);
}

CoverageReport run_coverage_study(const FamilyPtr& family, std::span<const double> theta0_in,
                                  int n, int reps, int k, const std::optional<WeightSpec>& g,
                                  double level, std::uint64_t seed,
                                  const OptimizerOptions& optimizer,
                                  const InferenceConfig& inference, int workers) {
  if (reps < 1) throw DataError("reps must be positive");
  if (k < 1 || k >= n) throw DataError("k must satisfy 1 <= k < n");
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> theta0 = family->canonicalize(theta0_in);
  family->validate(theta0);
  const WeightSpec weights = g ? *g : family->default_weights();

  CoverageReport r;
  r.level = level;
  r.k = k;
  r.reps = reps;
  r.critical_value = chi_squared_quantile(level, family->num_params());
  r.statistics.assign(reps, std::numeric_limits<double>::quiet_NaN());
  parallel_for(reps, workers, [&](int rep) {
    const Sample sample = sample_family(*family, theta0, n, substream_seed(seed, rep));
    EstimationConfig cfg;
    cfg.k = k;
    cfg.g = weights;
    cfg.phi_spec = inference.phi_spec;
    cfg.optimizer = optimizer;
    try {
      auto res = estimate(family, sample, cfg);
      attach_covariance(res, family, weights, inference);
      r.statistics[rep] = confidence_statistic(res, theta0);
    } catch (const Error&) {
    }
  });
  r.config = {{"kind", "coverage"}, {"model", family->name()}, {"d", family->dimension()},
              {"theta0", theta0}, {"n", n}, {"reps", reps}, {"k", k},
              {"g", weights.to_string()}, {"level", level}, {"seed", seed},
              {"restarts", optimizer.restarts}, {"sigma_points", inference.sigma_spec.max_points}};
  return finish_coverage(std::move(r), t0);
}

CoverageReport run_submodel_study(const FamilyPtr& family, std::span<const double> theta0_in,
                                  const std::vector<std::pair<int, double>>& hypothesis, int n,
                                  int reps, int k, const std::optional<WeightSpec>& g,
                                  double level, std::uint64_t seed,
                                  const OptimizerOptions& optimizer,
                                  const InferenceConfig& inference, int workers) {
  if (reps < 1) throw DataError("reps must be positive");
  if (k < 1 || k >= n) throw DataError("k must satisfy 1 <= k < n");
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> theta0 = family->canonicalize(theta0_in);
  family->validate(theta0);
  const WeightSpec weights = g ? *g : family->default_weights();

  CoverageReport r;
  r.level = level;
  r.k = k;
  r.reps = reps;
  r.critical_value = chi_squared_quantile(level, static_cast<int>(hypothesis.size()));
  r.statistics.assign(reps, std::numeric_limits<double>::quiet_NaN());
  parallel_for(reps, workers, [&](int rep) {
    const Sample sample = sample_family(*family, theta0, n, substream_seed(seed, rep));
    EstimationConfig cfg;
    cfg.k = k;
    cfg.g = weights;
    cfg.phi_spec = inference.phi_spec;
    cfg.optimizer = optimizer;
    try {
      const auto res = estimate(family, sample, cfg);
      r.statistics[rep] = submodel_test(family, res, hypothesis, weights, inference).statistic;
    } catch (const Error&) {
    }
  });
  nlohmann::json hyp = nlohmann::json::array();
  const auto names = family->param_names();
  for (const auto& [i, v] : hypothesis) hyp.push_back({{"param", names[i]}, {"value", v}});
  r.config = {{"kind", "submodel"}, {"model", family->name()}, {"d", family->dimension()},
              {"theta0", theta0}, {"hypothesis", hyp}, {"n", n}, {"reps", reps}, {"k", k},
              {"g", weights.to_string()}, {"level", level}, {"seed", seed},
              {"restarts", optimizer.restarts}, {"sigma_points", inference.sigma_spec.max_points}};
  return finish_coverage(std::move(r), t0);
}

void StudyReport::write_csv(std::ostream& out) const {
  out.precision(17);
  out << "table,k,component,metric,value\n";
  for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
    for (std::size_t c = 0; c < stats[ki].size(); ++c) {
      write_stats_rows(out, "theta", k_grid[ki], param_names[c], stats[ki][c], failures[ki]);
    }
    if (derived_name) {
      write_stats_rows(out, "plug_in", k_grid[ki], *derived_name, plug_in[ki], reps - plug_in[ki].count);
      write_stats_rows(out, "nonparametric", k_grid[ki], *derived_name, nonparametric[ki], 0);
    }
  }
}

nlohmann::json StudyReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
    nlohmann::json comps = nlohmann::json::object();
    for (std::size_t c = 0; c < stats[ki].size(); ++c) comps[param_names[c]] = stats_json(stats[ki][c]);
    nlohmann::json row = {{"k", k_grid[ki]}, {"failures", failures[ki]}, {"theta", comps}};
    if (derived_name) {
      row["plug_in"] = stats_json(plug_in[ki]);
      row["nonparametric"] = stats_json(nonparametric[ki]);
    }
    rows.push_back(row);
  }
  nlohmann::json out = {{"config", config}, {"reps", reps}, {"flagged", flagged},
                        {"wall_seconds", wall_seconds}, {"results", rows}};
  if (derived_name) out["derived"] = {{"name", *derived_name}, {"truth", derived_truth}};
  return out;
}

void CoverageReport::write_csv(std::ostream& out) const {
  out.precision(17);
  out << "replication,statistic\n";
  for (std::size_t i = 0; i < statistics.size(); ++i) {
    out << i << ',';
    if (!std::isnan(statistics[i])) out << statistics[i];
    out << '\n';
  }
}

nlohmann::json CoverageReport::to_json() const {
  return {{"config", config},        {"level", level},       {"critical_value", critical_value},
          {"k", k},                  {"reps", reps},         {"valid", valid},
          {"failures", failures},    {"covered", covered},   {"coverage", coverage},
          {"rejection_rate", rejection_rate}, {"flagged", flagged},
          {"wall_seconds", wall_seconds}};
}

StudyConfig StudyConfig::from_json(const nlohmann::json& j) {
  StudyConfig c;
  try {
    c.kind = j.value("kind", c.kind);
    c.model = j.value("model", c.model);
    c.d = j.value("d", c.d);
    if (j.contains("theta0")) c.theta0 = j.at("theta0").get<std::vector<double>>();
    if (j.contains("B")) {
      const auto rows = j.at("B").get<std::vector<std::vector<double>>>();
      if (rows.empty()) throw DataError("empty loading matrix");
      Eigen::MatrixXd B(rows.size(), rows.front().size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size()) throw DataError("ragged loading matrix");
        for (std::size_t i = 0; i < rows[r].size(); ++i) B(r, i) = rows[r][i];
      }
      c.d = static_cast<int>(B.rows());
      c.theta0 = stack_loadings(B);
    }
    c.n = j.value("n", c.n);
    c.reps = j.value("reps", c.reps);
    if (j.contains("k_grid")) c.k_grid = j.at("k_grid").get<std::vector<int>>();
    c.k = j.value("k", c.k);
    if (j.contains("g")) c.g = j.at("g").get<std::string>();
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    c.optimizer.restarts = j.value("restarts", c.optimizer.restarts);
    c.optimizer.seed = j.value("optimizer_seed", c.optimizer.seed);
    if (j.contains("phi_points")) {
      const auto pts = j.at("phi_points").get<std::size_t>();
      c.phi_spec = CubatureSpec::fixed(pts);
      c.inference.phi_spec = CubatureSpec::fixed(pts);
    }
    if (j.contains("sigma_points")) {
      c.inference.sigma_spec = CubatureSpec::fixed(j.at("sigma_points").get<std::size_t>());
    }
    c.level = j.value("level", c.level);
    c.hypothesis = j.value("hypothesis", c.hypothesis);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad study config: ") + e.what());
  }
  return c;
}

nlohmann::json StudyConfig::to_json() const {
  nlohmann::json j = {{"kind", kind},       {"model", model},     {"d", d},
                      {"theta0", theta0},   {"n", n},             {"reps", reps},
                      {"k_grid", k_grid},   {"k", k},             {"seed", seed},
                      {"workers", workers}, {"restarts", optimizer.restarts},
                      {"phi_points", phi_spec.max_points},
                      {"sigma_points", inference.sigma_spec.max_points},
                      {"level", level},     {"hypothesis", hypothesis}};
  if (g) j["g"] = *g;
  return j;
}

nlohmann::json run_configured_study(const StudyConfig& config, std::ostream& csv) {
  const FamilyPtr family = make_family(config.model, config.d);
  if (static_cast<int>(config.theta0.size()) != family->num_params()) {
    throw DataError("theta0 has " + std::to_string(config.theta0.size()) + " entries; model " +
                    config.model + " needs " + std::to_string(family->num_params()));
  }
  std::optional<WeightSpec> g;
  if (config.g) g = WeightSpec::parse(*config.g, config.d);
  nlohmann::json out;
  if (config.kind == "estimation" || config.kind == "derived") {
    StudyReport rep;
    if (config.kind == "derived") {
      rep = run_derived_quantity_study(family, config.theta0, stdf_at_ones(family, config.theta0),
                                       config.n, config.reps, config.k_grid, g, config.seed,
                                       config.optimizer, config.phi_spec, config.workers);
    } else {
      rep = run_study(family, config.theta0, config.n, config.reps, config.k_grid, g, config.seed,
                      config.optimizer, config.phi_spec, config.workers);
    }
    rep.write_csv(csv);
    out = rep.to_json();
  } else if (config.kind == "coverage") {
    const auto rep = run_coverage_study(family, config.theta0, config.n, config.reps, config.k, g,
                                        config.level, config.seed, config.optimizer,
                                        config.inference, config.workers);
    rep.write_csv(csv);
    out = rep.to_json();
  } else if (config.kind == "submodel") {
    const auto hyp = parse_hypothesis(*family, config.hypothesis);
    const auto rep = run_submodel_study(family, config.theta0, hyp, config.n, config.reps,
                                        config.k, g, config.level, config.seed, config.optimizer,
                                        config.inference, config.workers);
    rep.write_csv(csv);
    out = rep.to_json();
  } else {
    throw DataError("unknown study kind '" + config.kind +
                    "' (expected estimation, derived, coverage, submodel)");
  }
  out["resolved_config"] = config.to_json();
  return out;
}

}  // namespace stdfm
