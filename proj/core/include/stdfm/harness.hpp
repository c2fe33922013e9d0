#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stdfm/empirical.hpp"
#include "stdfm/estimator.hpp"
#include "stdfm/family.hpp"
#include "stdfm/inference.hpp"

namespace stdfm {

/// {40, 80, ..., 320}.
std::vector<int> default_k_grid();

/// Declarative study description, read from JSON:
///   {"kind": "estimation" | "derived" | "coverage" | "submodel",
///    "model": "logistic", "d": 2, "theta0": [0.5], "n": 1500, "reps": 200,
///    "k_grid": [40, 80], "k": 300, "g": "1", "seed": 1, "workers": 0,
///    "restarts": 5, "phi_points": 16384, "sigma_points": 65536,
///    "level": 0.95, "hypothesis": "eta2=0"}
/// For factor models "B" (rows of loadings) may replace "theta0".
struct StudyConfig {
  std::string kind = "estimation";
  std::string model = "logistic";
  int d = 2;
  std::vector<double> theta0;
  int n = 1500;
  int reps = 200;
  std::vector<int> k_grid = default_k_grid();
  int k = 300;
  std::optional<std::string> g;
  std::uint64_t seed = 1;
  /// 0 uses the hardware concurrency.
  int workers = 0;
  OptimizerOptions optimizer;
  InferenceConfig inference;
  CubatureSpec phi_spec = CubatureSpec::fixed(std::size_t{1} << 14);
  double level = 0.95;
  std::string hypothesis;

  static StudyConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ComponentStats {
  int count = 0;
  double mean = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double sd = 0.0;
};

/// Statistics of values around a truth, accumulated in the given order.
ComponentStats summarize(std::span<const double> values, double truth);

/// A scalar function of theta together with its nonparametric counterpart.
struct DerivedQuantity {
  std::string name;
  std::function<double(std::span<const double>)> plug_in;
  std::function<double(const EmpiricalStdf&)> nonparametric;
  double truth = 0.0;
};

/// l(1,...,1) as plug-in l(1; theta_hat) and as l_hat(1,...,1).
DerivedQuantity stdf_at_ones(const FamilyPtr& family, std::span<const double> theta0);

struct StudyReport {
  nlohmann::json config;
  std::vector<std::string> param_names;
  std::vector<double> theta0;
  std::vector<int> k_grid;
  int reps = 0;
  /// [k index][component]
  std::vector<std::vector<ComponentStats>> stats;
  std::vector<int> failures;
  std::optional<std::string> derived_name;
  double derived_truth = 0.0;
  std::vector<ComponentStats> plug_in;
  std::vector<ComponentStats> nonparametric;
  /// More than 10% failed fits at some k.
  bool flagged = false;
  double wall_seconds = 0.0;
  /// theta_hat per [k index][replication]; empty vectors mark failed fits.
  std::vector<std::vector<std::vector<double>>> estimates;

  /// Tidy rows: table,k,component,metric,value.
  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

struct CoverageReport {
  nlohmann::json config;
  double level = 0.95;
  double critical_value = 0.0;
  int k = 0;
  int reps = 0;
  int valid = 0;
  int failures = 0;
  int covered = 0;
  double coverage = 0.0;
  /// Fraction of valid replications whose statistic exceeds the critical value.
  double rejection_rate = 0.0;
  bool flagged = false;
  double wall_seconds = 0.0;
  /// NaN for failed replications.
  std::vector<double> statistics;

  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

/// For each replication: draw a sample from the family at theta0 with substream seed
/// substream_seed(seed, rep), fit at every k, and aggregate bias and RMSE per component.
/// Failed fits are counted and excluded.
StudyReport run_study(const FamilyPtr& family, std::span<const double> theta0, int n, int reps,
                      const std::vector<int>& k_grid, const std::optional<WeightSpec>& g,
                      std::uint64_t seed, const OptimizerOptions& optimizer = {},
                      const CubatureSpec& phi_spec = CubatureSpec::fixed(std::size_t{1} << 14),
                      int workers = 0);

/// run_study plus parallel tables for a derived quantity's plug-in and nonparametric estimators.
StudyReport run_derived_quantity_study(
    const FamilyPtr& family, std::span<const double> theta0, const DerivedQuantity& target,
    int n, int reps, const std::vector<int>& k_grid, const std::optional<WeightSpec>& g,
    std::uint64_t seed, const OptimizerOptions& optimizer = {},
    const CubatureSpec& phi_spec = CubatureSpec::fixed(std::size_t{1} << 14), int workers = 0);

/// Fraction of replications whose confidence statistic at theta0 is within the chi2_p
/// quantile at `level`.
CoverageReport run_coverage_study(const FamilyPtr& family, std::span<const double> theta0, int n,
                                  int reps, int k, const std::optional<WeightSpec>& g, double level,
                                  std::uint64_t seed, const OptimizerOptions& optimizer = {},
                                  const InferenceConfig& inference = {}, int workers = 0);

/// Size or power of the submodel test: data from the family at theta0, full-model fit,
/// test of `hypothesis`; rejection when the statistic exceeds the chi2_r quantile at `level`.
CoverageReport run_submodel_study(const FamilyPtr& family, std::span<const double> theta0,
                                  const std::vector<std::pair<int, double>>& hypothesis, int n,
                                  int reps, int k, const std::optional<WeightSpec>& g,
                                  double level, std::uint64_t seed,
                                  const OptimizerOptions& optimizer = {},
                                  const InferenceConfig& inference = {}, int workers = 0);

/// Runs `task(rep)` for rep in [0, reps) on a pool of `workers` threads (0 = hardware).
void parallel_for(int reps, int workers, const std::function<void(int)>& task);

/// Dispatches on config.kind; writes CSV to `csv` and returns the JSON summary.
nlohmann::json run_configured_study(const StudyConfig& config, std::ostream& csv);

}  // namespace stdfm
