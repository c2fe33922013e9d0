#include "stdfm/factor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "stdfm/error.hpp"
#include "stdfm/stdf_bounds.hpp"

namespace stdfm {

namespace {

double sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double logit(double s) {
  s = std::clamp(s, 1e-12, 1.0 - 1e-12);
  return std::log(s / (1.0 - s));
}

// sum_j b_ij * (1/(1+s(1-delta_jk))) * int_0^1 (c_k x ^ 1)^s prod_l (c_l x ^ 1) dx, with
// c_l = b_ij / b_il, for a single factor column.
double column_integral(const Eigen::VectorXd& b, int k, double s) {
  const int d = static_cast<int>(b.size());
  double total = 0.0;
  std::vector<double> c(d);
  std::vector<double> cuts;
  for (int j = 0; j < d; ++j) {
    for (int l = 0; l < d; ++l) c[l] = b(j) / b(l);
    cuts.assign({0.0, 1.0});
    for (int l = 0; l < d; ++l) {
      const double t = 1.0 / c[l];
      if (t > 0.0 && t < 1.0) cuts.push_back(t);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    double inner = 0.0;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
      const double a = cuts[p];
      const double e_hi = cuts[p + 1];
      const double mid = 0.5 * (a + e_hi);
      // on (a, e_hi) factor l is linear (c_l x) when c_l * mid < 1, else constant 1
      double coef = 1.0;
      double power = 0.0;
      for (int l = 0; l < d; ++l) {
        if (c[l] * mid < 1.0) {
          coef *= c[l];
          power += 1.0;
        }
      }
      if (s != 0.0 && c[k] * mid < 1.0) {
        coef *= std::pow(c[k], s);
        power += s;
      }
      inner += coef * (std::pow(e_hi, power + 1.0) - std::pow(a, power + 1.0)) / (power + 1.0);
    }
    const double denom = 1.0 + (j == k ? 0.0 : s);
    total += b(j) / denom * inner;
  }
  return total;
}

}  // namespace

double factor_l(const Eigen::MatrixXd& B, std::span<const double> x) {
  double l = 0.0;
  for (Eigen::Index i = 0; i < B.cols(); ++i) {
    double mx = 0.0;
    for (Eigen::Index j = 0; j < B.rows(); ++j) mx = std::max(mx, B(j, i) * x[j]);
    l += mx;
  }
  debug_check_stdf(l, x);
  return l;
}

void factor_partials(const Eigen::MatrixXd& B, std::span<const double> x, std::span<double> out) {
  const Eigen::Index d = B.rows();
  for (Eigen::Index j = 0; j < d; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < B.cols(); ++i) {
      const double own = B(j, i) * x[j];
      double other = 0.0;
      for (Eigen::Index s = 0; s < d; ++s) {
        if (s != j) other = std::max(other, B(s, i) * x[s]);
      }
      if (own >= other) acc += B(j, i);
    }
    out[j] = acc;
  }
}

std::vector<SpectralAtom> factor_spectral_atoms(const Eigen::MatrixXd& B) {
  validate_loadings(B);
  std::vector<SpectralAtom> atoms;
  for (Eigen::Index i = 0; i < B.cols(); ++i) {
    const double mass = B.col(i).sum();
    SpectralAtom a;
    a.mass = mass;
    for (Eigen::Index j = 0; j < B.rows(); ++j) a.point.push_back(B(j, i) / mass);
    atoms.push_back(std::move(a));
  }
  return atoms;
}

std::optional<double> factor_weighted_integral(const Eigen::MatrixXd& B, int k, double s) {
  if (k < 0 || k >= B.rows()) throw DataError("coordinate index out of range");
  if (!(s >= 0.0)) throw DataError("exponent must be >= 0");
  if ((B.array() <= 0.0).any()) return std::nullopt;
  double total = 0.0;
  for (Eigen::Index i = 0; i < B.cols(); ++i) total += column_integral(B.col(i), k, s);
  return total;
}

void validate_loadings(const Eigen::MatrixXd& B, double tol) {
  if (B.rows() < 1 || B.cols() < 1) throw ParameterDomainError("empty loading matrix");
  if (!B.allFinite()) throw ParameterDomainError("loading matrix has non-finite entries");
  if ((B.array() < -tol).any()) throw ParameterDomainError("loadings must be nonnegative");
  for (Eigen::Index j = 0; j < B.rows(); ++j) {
    const double s = B.row(j).sum();
    if (std::abs(s - 1.0) > tol) {
      throw ParameterDomainError("row " + std::to_string(j + 1) + " of the loadings sums to " +
                                 std::to_string(s) + ", expected 1");
    }
  }
  for (Eigen::Index i = 0; i < B.cols(); ++i) {
    if (!(B.col(i).sum() > 0.0)) {
      throw ParameterDomainError("factor " + std::to_string(i + 1) + " has zero column sum");
    }
  }
}

Eigen::MatrixXd canonicalize_loadings(const Eigen::MatrixXd& B) {
  const Eigen::Index r = B.cols();
  std::vector<Eigen::Index> order(r);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> sums(r);
  for (Eigen::Index i = 0; i < r; ++i) sums[i] = B.col(i).sum();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (sums[a] != sums[b]) return sums[a] > sums[b];
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      if (B(j, a) != B(j, b)) return B(j, a) > B(j, b);
    }
    return false;
  });
  Eigen::MatrixXd out(B.rows(), r);
  for (Eigen::Index i = 0; i < r; ++i) out.col(i) = B.col(order[i]);
  return out;
}

std::vector<double> stack_loadings(const Eigen::MatrixXd& B) {
  const Eigen::MatrixXd C = canonicalize_loadings(B);
  std::vector<double> theta;
  theta.reserve(static_cast<std::size_t>((C.cols() - 1) * C.rows()));
  for (Eigen::Index i = 0; i + 1 < C.cols(); ++i)
    for (Eigen::Index j = 0; j < C.rows(); ++j) theta.push_back(C(j, i));
  return theta;
}

Eigen::MatrixXd loadings_from_theta(std::span<const double> theta, int d, int r) {
  if (static_cast<int>(theta.size()) != (r - 1) * d) {
    throw ParameterDomainError("factor parameter vector has length " +
                               std::to_string(theta.size()) + ", expected " +
                               std::to_string((r - 1) * d));
  }
  Eigen::MatrixXd B(d, r);
  for (int j = 0; j < d; ++j) {
    double rest = 1.0;
    for (int i = 0; i + 1 < r; ++i) {
      B(j, i) = theta[static_cast<std::size_t>(i) * d + j];
      rest -= B(j, i);
    }
    B(j, r - 1) = rest;
  }
  return B;
}

FactorFamily::FactorFamily(int d, int r) : d_(d), r_(r) {
  if (d < 2) throw ParameterDomainError("factor family needs d >= 2");
  if (r < 1) throw ParameterDomainError("factor family needs r >= 1");
}

std::vector<std::string> FactorFamily::param_names() const {
  std::vector<std::string> names;
  for (int i = 0; i + 1 < r_; ++i)
    for (int j = 0; j < d_; ++j)
      names.push_back("b" + std::to_string(j + 1) + "_" + std::to_string(i + 1));
  return names;
}

ParameterSpace FactorFamily::parameter_space() const {
  const int p = num_params();
  std::vector<Interval> boxes(p, Interval{0.0, 1.0});
  std::vector<LinearConstraint> cons;
  if (r_ > 2) {
    for (int j = 0; j < d_; ++j) {
      LinearConstraint c{std::vector<double>(p, 0.0), 1.0};
      for (int i = 0; i + 1 < r_; ++i) c.coefficients[static_cast<std::size_t>(i) * d_ + j] = 1.0;
      cons.push_back(std::move(c));
    }
  }
  return ParameterSpace(std::move(boxes), std::move(cons));
}

std::vector<double> FactorFamily::default_start() const {
  // distinct loadings per factor keep the start away from the symmetric saddle
  Eigen::MatrixXd B(d_, r_);
  for (int j = 0; j < d_; ++j) {
    double total = 0.0;
    for (int i = 0; i < r_; ++i) {
      B(j, i) = 1.0 + 0.5 * std::cos(1.0 + i + 2.0 * j * (i + 1));
      total += B(j, i);
    }
    B.row(j) /= total;
  }
  return stack_loadings(B);
}

void FactorFamily::validate(std::span<const double> theta) const {
  Family::validate(theta);
  const Eigen::MatrixXd B = loadings(theta);
  for (int i = 0; i < r_; ++i) {
    if (!(B.col(i).sum() > 0.0)) {
      throw ParameterDomainError("factor: factor " + std::to_string(i + 1) + " has zero column sum");
    }
  }
}

double FactorFamily::stdf(std::span<const double> theta, std::span<const double> x) const {
  return factor_l(loadings(theta), x);
}

void FactorFamily::partials(std::span<const double> theta, std::span<const double> x,
                            std::span<double> out) const {
  factor_partials(loadings(theta), x, out);
}

std::vector<double> FactorFamily::to_unconstrained(std::span<const double> theta) const {
  const Eigen::MatrixXd B = loadings(theta);
  std::vector<double> u(theta.size());
  for (int j = 0; j < d_; ++j) {
    double rest = 1.0;
    for (int i = 0; i + 1 < r_; ++i) {
      const double frac = rest > 0.0 ? B(j, i) / rest : 0.5;
      u[static_cast<std::size_t>(i) * d_ + j] = logit(frac);
      rest -= B(j, i);
    }
  }
  return u;
}

std::vector<double> FactorFamily::from_unconstrained(std::span<const double> u) const {
  std::vector<double> theta(u.size());
  for (int j = 0; j < d_; ++j) {
    double rest = 1.0;
    for (int i = 0; i + 1 < r_; ++i) {
      const std::size_t idx = static_cast<std::size_t>(i) * d_ + j;
      theta[idx] = rest * sigmoid(u[idx]);
      rest -= theta[idx];
    }
  }
  return theta;
}

std::vector<double> FactorFamily::canonicalize(std::span<const double> theta) const {
  return stack_loadings(loadings(theta));
}

std::vector<double> FactorFamily::phi(std::span<const double> theta, const WeightSpec& g,
                                      const CubatureSpec& spec) const {
  validate(theta);
  const Eigen::MatrixXd B = loadings(theta);
  std::vector<double> out(g.q(), 0.0);
  for (int m = 0; m < g.q(); ++m) {
    for (const auto& term : g[m].terms) {
      const int coord = term.single_coordinate();
      std::optional<double> v;
      if (coord >= -1) {
        const int k = coord < 0 ? 0 : coord;
        v = factor_weighted_integral(B, k, term.exponents[k]);
      }
      if (v) {
        out[m] += term.coefficient * *v;
      } else {
        Monomial unit = term;
        unit.coefficient = 1.0;
        out[m] += term.coefficient *
                  integrate_homogeneous_term(
                      [&](std::span<const double> x) { return factor_l(B, x); }, unit, d_, spec);
      }
    }
  }
  return out;
}

nlohmann::json FactorFamily::to_json(std::span<const double> theta) const {
  const Eigen::MatrixXd B = canonicalize_loadings(loadings(theta));
  nlohmann::json rows = nlohmann::json::array();
  for (int j = 0; j < d_; ++j) {
    nlohmann::json row = nlohmann::json::array();
    for (int i = 0; i < r_; ++i) row.push_back(B(j, i));
    rows.push_back(row);
  }
  nlohmann::json out = Family::to_json(stack_loadings(B));
  out["r"] = r_;
  out["theta"] = stack_loadings(B);
  out["B"] = rows;
  return out;
}

WeightSpec FactorFamily::default_weights() const {
  std::string text;
  for (int s = 1; s < r_; ++s) {
    for (int j = 1; j <= d_; ++j) {
      text += "x" + std::to_string(j);
      if (s > 1) text += "^" + std::to_string(s);
      text += ";";
    }
  }
  text += "1";
  return WeightSpec::parse(text, d_);
}

}  // namespace stdfm
