#include "stdfm/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "stdfm/error.hpp"
#include "stdfm/factor.hpp"
#include "stdfm/rng.hpp"

namespace stdfm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct NelderMeadOutcome {
  std::vector<double> u;
  double f = kInf;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(const std::vector<double>&)>;
using Mapping = std::function<std::vector<double>(const std::vector<double>&)>;

double spread(const std::vector<std::vector<double>>& thetas, std::size_t best) {
  double s = 0.0;
  for (const auto& t : thetas)
    for (std::size_t i = 0; i < t.size(); ++i) s = std::max(s, std::abs(t[i] - thetas[best][i]));
  return s;
}

NelderMeadOutcome nelder_mead(const Objective& f, const Mapping& to_theta, std::vector<double> u0,
                              const OptimizerOptions& opt) {
  const std::size_t p = u0.size();
  std::vector<std::vector<double>> v(p + 1, u0);
  for (std::size_t i = 0; i < p; ++i) v[i + 1][i] += opt.initial_step;
  std::vector<double> fv(p + 1);
  for (std::size_t i = 0; i <= p; ++i) fv[i] = f(v[i]);

  std::vector<std::size_t> order(p + 1);
  NelderMeadOutcome out;
  auto combine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> r(p);
    for (std::size_t i = 0; i < p; ++i) r[i] = a[i] + t * (b[i] - a[i]);
    return r;
  };

  for (int it = 0;; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[p - 1];

    std::vector<std::vector<double>> thetas;
    thetas.reserve(p + 1);
    for (const auto& x : v) thetas.push_back(to_theta(x));
    const bool x_done = spread(thetas, best) < opt.x_tol;
    const bool f_done = std::isfinite(fv[worst]) && fv[worst] - fv[best] < opt.f_tol;
    if (x_done || f_done || it >= opt.max_iterations) {
      out.u = v[best];
      out.f = fv[best];
      out.iterations = it;
      out.converged = (x_done || f_done) && std::isfinite(fv[best]);
      return out;
    }

    std::vector<double> c(p, 0.0);
    for (std::size_t i = 0; i <= p; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < p; ++j) c[j] += v[i][j] / static_cast<double>(p);
    }
    const auto xr = combine(c, v[worst], -1.0);
    const double fr = f(xr);
    if (fr < fv[best]) {
      const auto xe = combine(c, v[worst], -2.0);
      const double fe = f(xe);
      if (fe < fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      v[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    if (fr < fv[worst]) {
      const auto xc = combine(c, xr, 0.5);
      const double fc = f(xc);
      if (fc <= fr) {
        v[worst] = xc;
        fv[worst] = fc;
        continue;
      }
    } else {
      const auto xc = combine(c, v[worst], 0.5);
      const double fc = f(xc);
      if (fc < fv[worst]) {
        v[worst] = xc;
        fv[worst] = fc;
        continue;
      }
    }
    for (std::size_t i = 0; i <= p; ++i) {
      if (i == best) continue;
      v[i] = combine(v[best], v[i], 0.5);
      fv[i] = f(v[i]);
    }
  }
}

std::vector<double> jittered_start(const Family& family, const std::vector<double>& start,
                                   const OptimizerOptions& opt, int restart) {
  if (restart == 0 || opt.jitter <= 0.0) return start;
  const auto space = family.parameter_space();
  Rng rng(substream_seed(opt.seed, static_cast<std::uint64_t>(restart)));
  std::vector<double> offset(start.size());
  for (std::size_t i = 0; i < start.size(); ++i) {
    const auto& box = space.boxes()[i];
    const double width =
        std::isfinite(box.lo) && std::isfinite(box.hi) ? box.hi - box.lo : std::abs(start[i]) + 1.0;
    offset[i] = opt.jitter * width * (2.0 * rng.uniform() - 1.0);
  }
  for (int attempt = 0; attempt < 30; ++attempt) {
    std::vector<double> t(start.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = start[i] + offset[i];
    if (space.contains(t) && space.boundary_distance(t) > 0.0) return t;
    for (auto& o : offset) o *= 0.5;
  }
  return start;
}

std::string describe(const OptimizerTrace& trace) {
  std::ostringstream os;
  os << "no start converged:";
  for (std::size_t i = 0; i < trace.restarts.size(); ++i) {
    const auto& r = trace.restarts[i];
    os << " [start " << i << ": Q=" << r.q << ", iterations=" << r.iterations << "]";
  }
  return os.str();
}

}  // namespace

Criterion::Criterion(FamilyPtr family, WeightSpec g, std::vector<double> empirical_moments, int k,
                     int n, CubatureSpec phi_spec)
    : family_(std::move(family)),
      g_(std::move(g)),
      moments_(std::move(empirical_moments)),
      k_(k),
      n_(n),
      phi_spec_(phi_spec) {
  if (!family_) throw Error("criterion needs a family");
  if (g_.d() != family_->dimension()) {
    throw DataError("weight functions have d=" + std::to_string(g_.d()) + " but the model has d=" +
                    std::to_string(family_->dimension()));
  }
  if (static_cast<int>(moments_.size()) != g_.q()) {
    throw DataError("expected " + std::to_string(g_.q()) + " empirical moments");
  }
}

Criterion Criterion::from_empirical(FamilyPtr family, WeightSpec g, const EmpiricalStdf& est,
                                    CubatureSpec phi_spec) {
  auto moments = integral_g_empirical(est, g);
  return Criterion(std::move(family), std::move(g), std::move(moments), est.k(), est.n(),
                   phi_spec);
}

double Criterion::operator()(std::span<const double> theta) const {
  if (!family_->parameter_space().contains(theta)) return kInf;
  std::vector<double> phi;
  try {
    phi = family_->phi(theta, g_, phi_spec_);
  } catch (const ParameterDomainError&) {
    return kInf;
  }
  double q = 0.0;
  for (std::size_t m = 0; m < phi.size(); ++m) {
    const double r = phi[m] - moments_[m];
    q += r * r;
  }
  return std::isfinite(q) ? q : kInf;
}

int OptimizerTrace::total_iterations() const {
  int total = 0;
  for (const auto& r : restarts) total += r.iterations;
  return total;
}

bool OptimizerTrace::converged() const {
  return best >= 0 && restarts[static_cast<std::size_t>(best)].converged;
}

nlohmann::json EstimateResult::to_json(const Family& fam) const {
  nlohmann::json params = nlohmann::json::object();
  for (std::size_t i = 0; i < param_names.size() && i < theta.size(); ++i) {
    params[param_names[i]] = theta[i];
  }
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : trace.restarts) {
    records.push_back({{"start", r.start},
                       {"theta", r.theta},
                       {"Q", r.q},
                       {"iterations", r.iterations},
                       {"converged", r.converged}});
  }
  nlohmann::json out = {{"model", fam.to_json(theta)},
                        {"family", family},
                        {"theta", theta},
                        {"params", params},
                        {"Q", q},
                        {"k", k},
                        {"n", n},
                        {"g", g},
                        {"near_boundary", near_boundary},
                        {"optimizer",
                         {{"iterations", trace.total_iterations()},
                          {"restarts", trace.restarts.size()},
                          {"best", trace.best},
                          {"converged", trace.converged()},
                          {"trace", records}}},
                        {"warnings", warnings}};
  if (covariance.size() > 0) {
    nlohmann::json cov = nlohmann::json::array();
    for (Eigen::Index i = 0; i < covariance.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < covariance.cols(); ++j) row.push_back(covariance(i, j));
      cov.push_back(row);
    }
    out["covariance"] = cov;
    out["std_errors"] = std_errors;
  }
  return out;
}

EstimateResult minimize(const Criterion& criterion, std::span<const double> start,
                        const OptimizerOptions& options) {
  const Family& family = criterion.family();
  const int p = family.num_params();
  if (static_cast<int>(start.size()) != p) {
    throw ParameterDomainError("start has " + std::to_string(start.size()) + " entries, expected " +
                               std::to_string(p));
  }
  family.validate(start);
  const auto space = family.parameter_space();

  EstimateResult result;
  result.family = family.name();
  result.param_names = family.param_names();
  result.k = criterion.k();
  result.n = criterion.n();
  result.g = criterion.g().to_string();

  const std::vector<double> base = family.canonicalize(start);
  if (p == 0) {
    result.q = criterion(base);
    result.trace.restarts.push_back({base, base, result.q, 0, std::isfinite(result.q)});
    result.trace.best = 0;
    if (!std::isfinite(result.q)) throw FitError(describe(result.trace));
    return result;
  }

  const Mapping to_theta = [&](const std::vector<double>& u) { return family.from_unconstrained(u); };
  const Objective objective = [&](const std::vector<double>& u) {
    return criterion(family.from_unconstrained(u));
  };

  const int starts = std::max(1, options.restarts);
  for (int r = 0; r < starts; ++r) {
    const auto s = jittered_start(family, base, options, r);
    const auto nm = nelder_mead(objective, to_theta, family.to_unconstrained(s), options);
    RestartRecord rec;
    rec.start = s;
    rec.theta = family.canonicalize(family.from_unconstrained(nm.u));
    rec.q = nm.f;
    rec.iterations = nm.iterations;
    rec.converged = nm.converged;
    result.trace.restarts.push_back(std::move(rec));
  }

  int best = -1;
  for (int r = 0; r < starts; ++r) {
    const auto& rec = result.trace.restarts[static_cast<std::size_t>(r)];
    if (!rec.converged) continue;
    if (best < 0 || rec.q < result.trace.restarts[static_cast<std::size_t>(best)].q) best = r;
  }
  if (best < 0) throw FitError(describe(result.trace));
  result.trace.best = best;
  const auto& chosen = result.trace.restarts[static_cast<std::size_t>(best)];
  result.theta = chosen.theta;
  result.q = chosen.q;
  result.near_boundary = space.boundary_distance(result.theta) < kNearBoundary;
  if (result.near_boundary) {
    result.warnings.push_back("estimate lies within " + std::to_string(kNearBoundary) +
                              " of the parameter-space boundary");
  }
  return result;
}

EstimateResult estimate(FamilyPtr family, const Sample& sample, const EstimationConfig& config) {
  return estimate(std::move(family), compute_ranks(sample), config);
}

EstimateResult estimate(FamilyPtr family, const RankMatrix& ranks, const EstimationConfig& config) {
  if (!family) throw Error("estimate needs a family");
  if (ranks.d() != family->dimension()) {
    throw DataError("data has d=" + std::to_string(ranks.d()) + " columns but the model expects d=" +
                    std::to_string(family->dimension()));
  }
  if (config.k < 1 || config.k >= ranks.n()) {
    throw DataError("k must satisfy 1 <= k < n; got k=" + std::to_string(config.k) +
                    ", n=" + std::to_string(ranks.n()));
  }
  WeightSpec g = config.g ? *config.g : family->default_weights();
  const EmpiricalStdf est(ranks, config.k);
  const Criterion criterion = Criterion::from_empirical(family, std::move(g), est, config.phi_spec);

  std::vector<std::string> warnings;
  std::vector<double> start;
  if (config.start) {
    start = *config.start;
  } else if (const auto* factor = dynamic_cast<const FactorFamily*>(family.get());
             factor && factor->factors() > 1) {
    try {
      start = factor_init_kmeans(ranks, factor->factors(), 75.0, config.optimizer.seed);
      if (!family->parameter_space().contains(start)) throw FitError("k-means start infeasible");
    } catch (const Error& e) {
      warnings.push_back(std::string("k-means start unavailable (") + e.what() +
                         "); using the default start");
      start = family->default_start();
    }
  } else {
    start = family->default_start();
  }
  auto result = minimize(criterion, start, config.optimizer);
  result.warnings.insert(result.warnings.begin(), warnings.begin(), warnings.end());
  if (ranks.tie_count > 0) {
    result.warnings.push_back(std::to_string(ranks.tie_count) +
                              " tied values were ranked by row order");
  }
  return result;
}

}  // namespace stdfm
