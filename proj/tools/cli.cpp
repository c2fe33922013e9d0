#include "cli.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stdfm/empirical.hpp"
#include "stdfm/error.hpp"
#include "stdfm/estimator.hpp"
#include "stdfm/factor.hpp"
#include "stdfm/harness.hpp"
#include "stdfm/inference.hpp"
#include "stdfm/samplers.hpp"

namespace stdfm::cli {

namespace {

using json = nlohmann::json;

struct Failure {
  int code;
  std::string kind;
  std::string message;
};

int fail(std::ostream& err, const Failure& f) {
  err << json{{"error", f.kind}, {"message", f.message}, {"exit_code", f.code}}.dump() << '\n';
  return f.code;
}

// Writes to `path` if non-empty, else to `out`.
void emit(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& w) {
  if (path.empty()) {
    w(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open '" + path + "' for writing");
  w(f);
}

double parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("'" + std::string(s) + "' is not a number");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(text);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

Eigen::MatrixXd parse_matrix(const std::string& text) {
  const auto rows = split(text, ';');
  std::vector<std::vector<double>> vals;
  for (const auto& r : rows) vals.push_back(parse_list(r));
  if (vals.empty() || vals.front().empty()) throw DataError("empty matrix");
  Eigen::MatrixXd m(vals.size(), vals.front().size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (vals[i].size() != vals.front().size()) throw DataError("ragged matrix '" + text + "'");
    for (std::size_t j = 0; j < vals[i].size(); ++j) m(i, j) = vals[i][j];
  }
  return m;
}

struct CommonFit {
  std::string data;
  std::string model = "logistic";
  int k = 0;
  std::string k_grid;
  std::string g;
  std::uint64_t seed = 1;
  int restarts = 5;
  std::size_t phi_points = std::size_t{1} << 14;
  std::size_t sigma_points = std::size_t{1} << 16;
  std::string start;
  std::string out;

  void add(CLI::App* cmd, const std::string& default_model) {
    model = default_model;
    cmd->add_option("--data", data, "CSV file with a header row")->required();
    cmd->add_option("--model", model, "logistic | alog | alog-sym | factor:R")->capture_default_str();
    cmd->add_option("--k", k, "number of upper order statistics");
    cmd->add_option("--k-grid", k_grid, "list '60,90,120' or range 'start:stop:step'");
    cmd->add_option("--g", g, "weight functions, e.g. '1;x1'");
    cmd->add_option("--seed", seed, "seed for restarts and clustering")->capture_default_str();
    cmd->add_option("--restarts", restarts, "optimizer starts")->capture_default_str();
    cmd->add_option("--phi-points", phi_points, "QMC points for phi")->capture_default_str();
    cmd->add_option("--sigma-points", sigma_points, "QMC points for Sigma")->capture_default_str();
    cmd->add_option("--start", start, "starting parameter vector");
    cmd->add_option("--out", out, "output JSON file (default stdout)");
  }

  std::vector<int> ks() const {
    if (!k_grid.empty() && k > 0) throw DataError("give either --k or --k-grid, not both");
    if (!k_grid.empty()) return parse_k_grid(k_grid);
    if (k > 0) return {k};
    throw DataError("--k or --k-grid is required");
  }

  InferenceConfig inference() const {
    InferenceConfig c;
    c.phi_spec = CubatureSpec::fixed(phi_points);
    c.sigma_spec = CubatureSpec::fixed(sigma_points);
    return c;
  }

  EstimationConfig estimation(int kk, const WeightSpec& w) const {
    EstimationConfig c;
    c.k = kk;
    c.g = w;
    c.phi_spec = CubatureSpec::fixed(phi_points);
    c.optimizer.restarts = restarts;
    c.optimizer.seed = seed;
    if (!start.empty()) c.start = parse_list(start);
    return c;
  }

  json echo(const std::string& command, const Sample& s, const RankMatrix& r, const WeightSpec& w,
            const std::vector<int>& grid) const {
    json j = {{"command", command},
              {"data", {{"path", data}, {"n", s.n()}, {"d", s.d()}, {"columns", s.column_names()},
                        {"ties", r.tie_count}}},
              {"model", model},
              {"k_grid", grid},
              {"g", w.to_string()},
              {"seed", seed},
              {"restarts", restarts},
              {"phi_points", phi_points},
              {"sigma_points", sigma_points}};
    if (!start.empty()) j["start"] = parse_list(start);
    return j;
  }
};

struct Loaded {
  Sample sample;
  RankMatrix ranks;
  FamilyPtr family;
  WeightSpec g;
};

Loaded load(const CommonFit& opt) {
  Sample s = read_csv(opt.data);
  RankMatrix r = compute_ranks(s);
  FamilyPtr fam = make_family(opt.model, s.d());
  WeightSpec w = opt.g.empty() ? fam->default_weights() : WeightSpec::parse(opt.g, s.d());
  return {std::move(s), std::move(r), std::move(fam), std::move(w)};
}

int cmd_estimate(const CommonFit& opt, bool no_se, std::ostream& out, std::ostream& err) {
  std::optional<Loaded> in;
  std::vector<int> grid;
  try {
    grid = opt.ks();
    in.emplace(load(opt));
  } catch (const Error& e) {
    return fail(err, {kDataError, "data", e.what()});
  }
  json results = json::array();
  int code = kOk;
  for (int k : grid) {
    json row = {{"k", k}};
    EstimateResult res;
    try {
      res = estimate(in->family, in->ranks, opt.estimation(k, in->g));
    } catch (const DataError& e) {
      return fail(err, {kDataError, "data", e.what()});
    } catch (const ParameterDomainError& e) {
      return fail(err, {kDataError, "data", e.what()});
    } catch (const Error& e) {
      row["error"] = {{"kind", "fit"}, {"message", e.what()}};
      fail(err, {kFitFailure, "fit", "k=" + std::to_string(k) + ": " + e.what()});
      if (code == kOk) code = kFitFailure;
      results.push_back(row);
      continue;
    }
    if (!no_se) {
      try {
        attach_covariance(res, in->family, in->g, opt.inference());
      } catch (const Error& e) {
        row["inference_error"] = e.what();
        fail(err, {kInferenceFailure, "inference", "k=" + std::to_string(k) + ": " + e.what()});
        if (code == kOk) code = kInferenceFailure;
      }
    }
    row.update(res.to_json(*in->family));
    results.push_back(row);
  }
  json doc = {{"config", opt.echo("estimate", in->sample, in->ranks, in->g, grid)},
              {"results", results}};
  doc["config"]["standard_errors"] = !no_se;
  try {
    emit(opt.out, out, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
  } catch (const Error& e) {
    return fail(err, {kDataError, "data", e.what()});
  }
  return code;
}

int cmd_test_submodel(const CommonFit& opt, const std::string& null_text, double level,
                      std::ostream& out, std::ostream& err) {
  std::optional<Loaded> in;
  std::vector<int> grid;
  std::vector<std::pair<int, double>> hyp;
  try {
    grid = opt.ks();
    in.emplace(load(opt));
    hyp = parse_hypothesis(*in->family, null_text);
  } catch (const Error& e) {
    return fail(err, {kDataError, "data", e.what()});
  }
  const double critical = chi_squared_quantile(level, static_cast<int>(hyp.size()));
  json rows = json::array();
  int code = kOk;
  for (int k : grid) {
    json row = {{"k", k}};
    EstimateResult res;
    try {
      res = estimate(in->family, in->ranks, opt.estimation(k, in->g));
    } catch (const DataError& e) {
      return fail(err, {kDataError, "data", e.what()});
    } catch (const Error& e) {
      row["error"] = {{"kind", "fit"}, {"message", e.what()}};
      fail(err, {kFitFailure, "fit", "k=" + std::to_string(k) + ": " + e.what()});
      if (code == kOk) code = kFitFailure;
      rows.push_back(row);
      continue;
    }
    try {
      const auto t = submodel_test(in->family, res, hyp, in->g, opt.inference());
      row.update(t.to_json());
      row["reject"] = t.statistic > critical;
    } catch (const Error& e) {
      row["error"] = {{"kind", "inference"}, {"message", e.what()}};
      fail(err, {kInferenceFailure, "inference", "k=" + std::to_string(k) + ": " + e.what()});
      if (code == kOk) code = kInferenceFailure;
    }
    row["estimate"] = res.to_json(*in->family);
    rows.push_back(row);
  }
  json doc = {{"config", opt.echo("test-submodel", in->sample, in->ranks, in->g, grid)},
              {"results", rows}};
  doc["config"]["null"] = null_text;
  doc["config"]["level"] = level;
  doc["config"]["critical_value"] = critical;
  try {
    emit(opt.out, out, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
  } catch (const Error& e) {
    return fail(err, {kDataError, "data", e.what()});
  }
  return code;
}

std::vector<std::vector<double>> read_points(const std::string& path, int d) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open points file '" + path + "'");
  std::vector<std::vector<double>> pts;
  std::string line;
  int lineno = 0;
  bool header_checked = false;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    try {
      row = parse_list(line);
    } catch (const DataError&) {
      if (!header_checked) {
        header_checked = true;
        continue;
      }
      throw DataError("points file line " + std::to_string(lineno) + " is not numeric");
    }
    header_checked = true;
    if (static_cast<int>(row.size()) != d) {
      throw DataError("points file line " + std::to_string(lineno) + " has " +
                      std::to_string(row.size()) + " values, expected " + std::to_string(d));
    }
    pts.push_back(std::move(row));
  }
  return pts;
}

int cmd_stdf_eval(const std::string& data, int k, const std::vector<std::string>& at,
                  const std::string& points, const std::string& model, const std::string& theta,
                  const std::string& out_path, std::ostream& out, std::ostream& err) {
  try {
    const Sample s = read_csv(data);
    const EmpiricalStdf est(compute_ranks(s), k);
    std::vector<std::vector<double>> pts;
    if (!points.empty()) pts = read_points(points, s.d());
    for (const auto& a : at) {
      auto p = parse_list(a);
      if (static_cast<int>(p.size()) != s.d()) throw DataError("--at point '" + a + "' has wrong length");
      pts.push_back(std::move(p));
    }
    if (pts.empty()) throw DataError("no evaluation points: use --at or --points");
    for (const auto& p : pts)
      for (double v : p)
        if (!(v >= 0.0)) throw DataError("evaluation points must be nonnegative");
    FamilyPtr fam;
    std::vector<double> th;
    if (!model.empty()) {
      fam = make_family(model, s.d());
      th = parse_list(theta);
      fam->validate(th);
    }
    emit(out_path, out, [&](std::ostream& o) {
      o.precision(17);
      for (int j = 0; j < s.d(); ++j) o << "x" << j + 1 << ',';
      o << "l_hat";
      if (fam) o << ",l_model";
      o << '\n';
      for (const auto& p : pts) {
        for (double v : p) o << v << ',';
        o << est(p);
        if (fam) o << ',' << fam->stdf(th, p);
        o << '\n';
      }
    });
  } catch (const Error& e) {
    return fail(err, {kDataError, "data", e.what()});
  }
  return kOk;
}

struct SimulateOpts {
  std::string model = "logistic";
  std::string theta;
  std::string loadings;
  int d = 2;
  int n = 1000;
  std::uint64_t seed = 1;
  std::string form = "max";
  double nu = 1.0;
  double noise = 0.0;
  std::string out;
};

int cmd_simulate(const SimulateOpts& o, std::ostream& out, std::ostream& err) {
  try {
    std::optional<Sample> s;
    json echo = {{"command", "simulate"}, {"model", o.model}, {"n", o.n}, {"seed", o.seed}};
    if (o.form != "max" && o.form != "sum") throw DataError("--form must be max or sum");
    if (!o.loadings.empty()) {
      const Eigen::MatrixXd a = parse_matrix(o.loadings);
      s.emplace(sample_factor(a, o.nu, o.n, o.seed,
                              o.form == "max" ? FactorForm::Max : FactorForm::Sum, o.noise));
      echo["loadings"] = o.loadings;
      echo["nu"] = o.nu;
      echo["form"] = o.form;
      echo["noise"] = o.noise;
      echo["d"] = a.rows();
    } else {
      const FamilyPtr fam = make_family(o.model, o.d);
      const auto th = parse_list(o.theta);
      if (static_cast<int>(th.size()) != fam->num_params()) {
        throw DataError("--theta needs " + std::to_string(fam->num_params()) + " values for " +
                        o.model);
      }
      if (const auto* f = dynamic_cast<const FactorFamily*>(fam.get()); f && (o.form == "sum" || o.nu != 1.0)) {
        s.emplace(sample_factor(f->loadings(th), o.nu, o.n, o.seed,
                                o.form == "max" ? FactorForm::Max : FactorForm::Sum, o.noise));
        echo["nu"] = o.nu;
        echo["form"] = o.form;
        echo["noise"] = o.noise;
      } else {
        s.emplace(sample_family(*fam, th, o.n, o.seed));
      }
      echo["d"] = fam->dimension();
      echo["theta"] = th;
      echo["params"] = fam->to_json(th);
    }
    emit(o.out, out, [&](std::ostream& os) { write_csv(os, *s); });
    err << echo.dump() << '\n';
  } catch (const Error& e) {
    return fail(err, {kDataError, "data", e.what()});
  }
  return kOk;
}

int cmd_study(const std::string& config_path, const std::string& csv_path,
              const std::string& out_path, int workers, int reps, std::ostream& out,
              std::ostream& err) {
  StudyConfig cfg;
  try {
    std::ifstream f(config_path);
    if (!f) throw DataError("cannot open study config '" + config_path + "'");
    json j;
    try {
      f >> j;
    } catch (const json::exception& e) {
      throw DataError(std::string("study config is not valid JSON: ") + e.what());
    }
    cfg = StudyConfig::from_json(j);
    if (workers >= 0) cfg.workers = workers;
    if (reps > 0) cfg.reps = reps;
  } catch (const Error& e) {
    return fail(err, {kDataError, "data", e.what()});
  }
  try {
    std::ostringstream csv;
    json summary = run_configured_study(cfg, csv);
    const bool csv_to_stdout = csv_path.empty();
    emit(csv_path, out, [&](std::ostream& o) { o << csv.str(); });
    if (!out_path.empty() || !csv_to_stdout) {
      emit(out_path, out, [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
    }
  } catch (const DataError& e) {
    return fail(err, {kDataError, "data", e.what()});
  } catch (const ParameterDomainError& e) {
    return fail(err, {kDataError, "data", e.what()});
  } catch (const Error& e) {
    return fail(err, {kFitFailure, "study", e.what()});
  }
  return kOk;
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  for (const auto& part : split(text, ',')) out.push_back(parse_double(part));
  return out;
}

std::vector<int> parse_k_grid(const std::string& text) {
  std::vector<int> ks;
  auto to_int = [](const std::string& s) {
    const double v = parse_double(s);
    if (v != static_cast<int>(v)) throw DataError("k value '" + s + "' is not an integer");
    return static_cast<int>(v);
  };
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw DataError("k range must be start:stop:step");
    const int a = to_int(parts[0]);
    const int b = to_int(parts[1]);
    const int step = to_int(parts[2]);
    if (step <= 0 || b < a) throw DataError("bad k range '" + text + "'");
    for (int k = a; k <= b; k += step) ks.push_back(k);
  } else {
    for (const auto& p : split(text, ',')) ks.push_back(to_int(p));
  }
  if (ks.empty()) throw DataError("empty k grid");
  return ks;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"M-estimation of parametric stable tail dependence functions", "stdfm"};
  app.require_subcommand(1);

  CommonFit est_opt;
  bool no_se = false;
  auto* est = app.add_subcommand("estimate", "fit a parametric model by minimizing the criterion");
  est_opt.add(est, "logistic");
  est->add_flag("--no-se", no_se, "skip standard errors");

  CommonFit test_opt;
  std::string null_text = "eta2=0";
  double level = 0.95;
  auto* test = app.add_subcommand("test-submodel", "test that a parameter sub-vector takes given values");
  test_opt.add(test, "alog");
  test->add_option("--null", null_text, "hypothesis, e.g. 'eta2=0'")->capture_default_str();
  test->add_option("--level", level, "confidence level of the critical value")->capture_default_str();

  std::string ev_data, ev_points, ev_model, ev_theta, ev_out;
  int ev_k = 0;
  std::vector<std::string> ev_at;
  auto* ev = app.add_subcommand("stdf-eval", "evaluate the empirical stdf");
  ev->add_option("--data", ev_data, "CSV file with a header row")->required();
  ev->add_option("--k", ev_k, "number of upper order statistics")->required();
  ev->add_option("--at", ev_at, "point 'x1,x2,...' (repeatable)");
  ev->add_option("--points", ev_points, "CSV of evaluation points");
  ev->add_option("--model", ev_model, "also evaluate this model");
  ev->add_option("--theta", ev_theta, "model parameters");
  ev->add_option("--out", ev_out, "output CSV file (default stdout)");

  SimulateOpts sim;
  auto* simc = app.add_subcommand("simulate", "draw a sample from a max-stable model");
  simc->add_option("--model", sim.model, "logistic | alog | alog-sym | factor:R")->capture_default_str();
  simc->add_option("--theta", sim.theta, "parameter vector");
  simc->add_option("--loadings", sim.loadings, "factor loadings 'a11,a12;a21,a22' (rows = coordinates)");
  simc->add_option("--d", sim.d, "dimension")->capture_default_str();
  simc->add_option("--n", sim.n, "sample size")->capture_default_str();
  simc->add_option("--seed", sim.seed, "random seed")->capture_default_str();
  simc->add_option("--form", sim.form, "factor model form: max | sum")->capture_default_str();
  simc->add_option("--nu", sim.nu, "factor tail index")->capture_default_str();
  simc->add_option("--noise", sim.noise, "noise scale for the sum form")->capture_default_str();
  simc->add_option("--out", sim.out, "output CSV file (default stdout)");

  std::string st_config, st_csv, st_out;
  int st_workers = -1, st_reps = 0;
  auto* st = app.add_subcommand("study", "run a replication study from a JSON config");
  st->add_option("--config", st_config, "study config (JSON)")->required();
  st->add_option("--csv", st_csv, "tidy CSV report (default stdout)");
  st->add_option("--out", st_out, "JSON summary");
  st->add_option("--workers", st_workers, "worker threads (0 = all cores)");
  st->add_option("--reps", st_reps, "override the replication count");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return fail(err, {kUsage, "usage", e.what()});
  }

  if (est->parsed()) return cmd_estimate(est_opt, no_se, out, err);
  if (test->parsed()) return cmd_test_submodel(test_opt, null_text, level, out, err);
  if (ev->parsed()) return cmd_stdf_eval(ev_data, ev_k, ev_at, ev_points, ev_model, ev_theta, ev_out, out, err);
  if (simc->parsed()) return cmd_simulate(sim, out, err);
  if (st->parsed()) return cmd_study(st_config, st_csv, st_out, st_workers, st_reps, out, err);
  return fail(err, {kUsage, "usage", "no subcommand"});
}

}  // namespace stdfm::cli
