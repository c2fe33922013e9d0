#include "stdfm/inference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include "stdfm/error.hpp"

namespace stdfm {

double wl_cov(const std::function<double(std::span<const double>)>& l, std::span<const double> x,
              std::span<const double> y) {
  std::vector<double> mx(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) mx[j] = std::max(x[j], y[j]);
  return l(x) + l(y) - l(mx);
}

CovKernel::CovKernel(FamilyPtr family, std::vector<double> theta)
    : family_(std::move(family)), theta_(std::move(theta)) {
  family_->validate(theta_);
}

double CovKernel::wl_cov(std::span<const double> x, std::span<const double> y) const {
  return stdfm::wl_cov([this](std::span<const double> z) { return l(z); }, x, y);
}

double CovKernel::b_cov(std::span<const double> x, std::span<const double> y) const {
  // fixed argument order makes the kernel exactly symmetric in floating point
  if (std::lexicographical_compare(y.begin(), y.end(), x.begin(), x.end())) std::swap(x, y);
  const int d = this->d();
  std::vector<double> lx(d), ly(d), z(d);
  family_->partials(theta_, x, lx);
  family_->partials(theta_, y, ly);
  const double l_x = l(x);
  const double l_y = l(y);

  for (int j = 0; j < d; ++j) z[j] = std::max(x[j], y[j]);
  double total = l_x + l_y - l(z);

  // E[W_l(x) W_l(y_j e_j)] = l(x) + y_j - l(x v y_j e_j)
  for (int j = 0; j < d; ++j) {
    if (ly[j] == 0.0) continue;
    for (int s = 0; s < d; ++s) z[s] = x[s];
    z[j] = std::max(x[j], y[j]);
    total -= ly[j] * (l_x + y[j] - l(z));
  }
  for (int i = 0; i < d; ++i) {
    if (lx[i] == 0.0) continue;
    for (int s = 0; s < d; ++s) z[s] = y[s];
    z[i] = std::max(x[i], y[i]);
    total -= lx[i] * (x[i] + l_y - l(z));
  }
  // E[W_l(x_i e_i) W_l(y_j e_j)] = x_i + y_j - l(x_i e_i + y_j e_j), min(x_i, y_i) when i == j
  std::fill(z.begin(), z.end(), 0.0);
  for (int i = 0; i < d; ++i) {
    if (lx[i] == 0.0) continue;
    for (int j = 0; j < d; ++j) {
      if (ly[j] == 0.0) continue;
      double c;
      if (i == j) {
        c = std::min(x[i], y[i]);
      } else {
        z[i] = x[i];
        z[j] = y[j];
        c = x[i] + y[j] - l(z);
        z[i] = 0.0;
        z[j] = 0.0;
      }
      total += lx[i] * ly[j] * c;
    }
  }
  return total;
}

Eigen::MatrixXd floor_psd(const Eigen::MatrixXd& s) {
  const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
  if (sym.size() == 0) return sym;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd ev = eig.eigenvalues();
  if (ev.minCoeff() < -kPsdTolerance) {
    std::ostringstream os;
    os << "covariance matrix is indefinite: smallest eigenvalue " << ev.minCoeff();
    throw NumericalError(os.str());
  }
  if (ev.minCoeff() >= 0.0) return sym;
  const Eigen::MatrixXd v = eig.eigenvectors();
  const Eigen::MatrixXd out = v * ev.cwiseMax(0.0).asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd sigma_matrix(const CovKernel& kernel, const WeightSpec& g,
                             const CubatureSpec& spec) {
  const int d = kernel.d();
  const int q = g.q();
  if (g.d() != d) throw DataError("weight functions and kernel disagree on d");
  const int comps = q * (q + 1) / 2;
  std::vector<double> gx(q), gy(q);
  auto res = integrate_cube(
      [&](std::span<const double> u, std::span<double> out) {
        const auto x = u.subspan(0, d);
        const auto y = u.subspan(d, d);
        g.eval(x, gx);
        g.eval(y, gy);
        const double b = kernel.b_cov(x, y);
        int c = 0;
        for (int m = 0; m < q; ++m)
          for (int mm = m; mm < q; ++mm) out[c++] = 0.5 * b * (gx[m] * gy[mm] + gx[mm] * gy[m]);
      },
      2 * d, comps, spec);
  Eigen::MatrixXd s(q, q);
  int c = 0;
  for (int m = 0; m < q; ++m)
    for (int mm = m; mm < q; ++mm) {
      s(m, mm) = res.value[c];
      s(mm, m) = res.value[c];
      ++c;
    }
  return floor_psd(s);
}

Eigen::MatrixXd MMatrix::lower_block(int r) const {
  if (r < 0 || r > m.rows()) throw Error("block size out of range");
  return m.bottomRightCorner(r, r);
}

Eigen::MatrixXd MMatrix::block(const std::vector<int>& indices) const {
  const auto r = static_cast<Eigen::Index>(indices.size());
  Eigen::MatrixXd out(r, r);
  for (Eigen::Index a = 0; a < r; ++a)
    for (Eigen::Index b = 0; b < r; ++b) out(a, b) = m(indices[a], indices[b]);
  return out;
}

Eigen::MatrixXd m_from_parts(const Eigen::MatrixXd& jacobian, const Eigen::MatrixXd& sigma) {
  const auto q = jacobian.rows();
  const auto p = jacobian.cols();
  if (sigma.rows() != q || sigma.cols() != q) throw Error("Sigma and the Jacobian disagree on q");
  if (p == 0) return Eigen::MatrixXd(0, 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smallest = p > q ? 0.0 : sv(p - 1);
  if (!(smallest > 1e-10)) {
    const Eigen::VectorXd nv = svd.matrixV().col(p - 1);
    std::ostringstream os;
    os << "the derivative of phi is rank deficient (smallest singular value " << smallest
       << "); null direction (";
    for (Eigen::Index i = 0; i < p; ++i) os << (i ? ", " : "") << nv(i);
    os << ")";
    throw IdentifiabilityError(os.str(), std::vector<double>(nv.data(), nv.data() + p));
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(jacobian);
  const Eigen::MatrixXd q1 = qr.householderQ() * Eigen::MatrixXd::Identity(q, p);
  const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd a = r.triangularView<Eigen::Upper>().solve(q1.transpose());
  const Eigen::MatrixXd m = a * sigma * a.transpose();
  return 0.5 * (m + m.transpose());
}

MMatrix m_matrix(const FamilyPtr& family, std::span<const double> theta, const WeightSpec& g,
                 const InferenceConfig& config) {
  MMatrix out;
  out.jacobian = family->phi_jacobian(theta, g, config.phi_spec);
  out.sigma = sigma_matrix(CovKernel(family, {theta.begin(), theta.end()}), g, config.sigma_spec);
  out.m = m_from_parts(out.jacobian, out.sigma);
  return out;
}

void attach_covariance(EstimateResult& result, const FamilyPtr& family, const WeightSpec& g,
                       const InferenceConfig& config) {
  const auto mm = m_matrix(family, result.theta, g, config);
  result.covariance = mm.m / static_cast<double>(result.k);
  result.std_errors.clear();
  for (Eigen::Index i = 0; i < result.covariance.rows(); ++i) {
    result.std_errors.push_back(std::sqrt(std::max(0.0, result.covariance(i, i))));
  }
}

namespace {

double quadratic_form_inverse(const Eigen::MatrixXd& m, const Eigen::VectorXd& v) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (m + m.transpose()));
  const Eigen::VectorXd ev = eig.eigenvalues();
  const double top = ev.cwiseAbs().maxCoeff();
  if (!(ev.minCoeff() > 1e-14 * top) || !(top > 0.0)) {
    throw NumericalError("covariance matrix is singular; the quadratic form is undefined");
  }
  const Eigen::VectorXd w = eig.eigenvectors().transpose() * v;
  return w.cwiseQuotient(ev).dot(w);
}

}  // namespace

double confidence_statistic(std::span<const double> theta_hat, const Eigen::MatrixXd& m, int k,
                            std::span<const double> theta0) {
  const auto p = static_cast<Eigen::Index>(theta_hat.size());
  if (static_cast<Eigen::Index>(theta0.size()) != p || m.rows() != p) {
    throw Error("parameter vectors and M disagree in dimension");
  }
  Eigen::VectorXd diff(p);
  for (Eigen::Index i = 0; i < p; ++i) diff(i) = theta_hat[i] - theta0[i];
  if (diff.isZero(0.0)) return 0.0;
  return std::max(0.0, static_cast<double>(k) * quadratic_form_inverse(m, diff));
}

double confidence_statistic(const EstimateResult& result, std::span<const double> theta0) {
  if (result.covariance.size() == 0) throw Error("estimate has no covariance attached");
  return confidence_statistic(result.theta, result.covariance * static_cast<double>(result.k),
                              result.k, theta0);
}

double chi_squared_quantile(double level, int dof) {
  if (level >= 1.0) return std::numeric_limits<double>::infinity();
  if (level <= 0.0) return 0.0;
  return boost::math::quantile(boost::math::chi_squared(dof), level);
}

double chi_squared_sf(double x, int dof) {
  if (!(x > 0.0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), x));
}

nlohmann::json TestResult::to_json() const {
  return {{"statistic", statistic}, {"dof", dof},   {"p_value", p_value},      {"k", k},
          {"model", model},         {"hypothesis", hypothesis}, {"theta_hat", theta_hat}};
}

std::vector<std::pair<int, double>> parse_hypothesis(const Family& family, std::string_view text) {
  const auto names = family.param_names();
  std::vector<std::pair<int, double>> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find(',', pos), text.size());
    auto item = text.substr(pos, end - pos);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw DataError("hypothesis '" + std::string(item) + "' must have the form name=value");
    }
    auto trim = [](std::string_view s) {
      while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
      while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
      return s;
    };
    const auto name = trim(item.substr(0, eq));
    const auto value = trim(item.substr(eq + 1));
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
      throw DataError("unknown parameter '" + std::string(name) + "' for model " + family.name());
    }
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
      throw DataError("bad value '" + std::string(value) + "' in hypothesis");
    }
    const int idx = static_cast<int>(it - names.begin());
    for (const auto& [i, _] : out) {
      if (i == idx) throw DataError("parameter '" + std::string(name) + "' appears twice");
    }
    out.emplace_back(idx, v);
    pos = end + 1;
  }
  return out;
}

TestResult submodel_test(const FamilyPtr& family, const EstimateResult& fit,
                         const std::vector<std::pair<int, double>>& hypothesis, const WeightSpec& g,
                         const InferenceConfig& config) {
  if (hypothesis.empty()) throw DataError("empty hypothesis");
  std::vector<double> hybrid = fit.theta;
  std::vector<int> idx;
  Eigen::VectorXd diff(static_cast<Eigen::Index>(hypothesis.size()));
  std::ostringstream desc;
  const auto names = family->param_names();
  for (std::size_t a = 0; a < hypothesis.size(); ++a) {
    const auto [i, v] = hypothesis[a];
    idx.push_back(i);
    diff(static_cast<Eigen::Index>(a)) = fit.theta[i] - v;
    hybrid[i] = v;
    desc << (a ? "," : "") << names[i] << "=" << v;
  }
  family->validate(hybrid);
  const auto mm = m_matrix(family, hybrid, g, config);
  const Eigen::MatrixXd m2 = mm.block(idx);

  TestResult out;
  out.dof = static_cast<int>(idx.size());
  out.k = fit.k;
  out.model = family->name();
  out.hypothesis = desc.str();
  out.theta_hat = fit.theta;
  out.statistic = diff.isZero(0.0)
                      ? 0.0
                      : std::max(0.0, static_cast<double>(fit.k) * quadratic_form_inverse(m2, diff));
  out.p_value = chi_squared_sf(out.statistic, out.dof);
  return out;
}

}  // namespace stdfm
