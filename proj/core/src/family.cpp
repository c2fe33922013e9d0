#include "stdfm/family.hpp"

#include <charconv>
#include <cmath>

#include "stdfm/asym_logistic.hpp"
#include "stdfm/error.hpp"
#include "stdfm/factor.hpp"
#include "stdfm/logistic.hpp"

namespace stdfm {

void Family::validate(std::span<const double> theta) const {
  const auto reason = parameter_space().violation(theta);
  if (!reason.empty()) throw ParameterDomainError(name() + ": " + reason);
}

void Family::theta_gradient(std::span<const double>, std::span<const double>,
                            std::span<double>) const {
  throw Error(name() + " has no closed-form parameter gradient");
}

std::vector<double> Family::to_unconstrained(std::span<const double> theta) const {
  const auto space = parameter_space();
  std::vector<double> u(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) u[i] = unsquash(theta[i], space.boxes()[i]);
  return u;
}

std::vector<double> Family::from_unconstrained(std::span<const double> u) const {
  const auto space = parameter_space();
  std::vector<double> theta(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) theta[i] = squash(u[i], space.boxes()[i]);
  return theta;
}

std::vector<double> Family::canonicalize(std::span<const double> theta) const {
  return {theta.begin(), theta.end()};
}

std::vector<double> Family::phi(std::span<const double> theta, const WeightSpec& g,
                                const CubatureSpec& spec) const {
  validate(theta);
  const std::vector<double> th(theta.begin(), theta.end());
  auto m = integrate_homogeneous(
      [&](std::span<const double> x, std::span<double> out) { out[0] = stdf(th, x); }, 1, g,
      spec);
  return {m.data(), m.data() + m.size()};
}

Eigen::MatrixXd Family::phi_jacobian(std::span<const double> theta, const WeightSpec& g,
                                     const CubatureSpec& spec) const {
  validate(theta);
  const int p = num_params();
  const std::vector<double> th(theta.begin(), theta.end());
  if (has_theta_gradient()) {
    return integrate_homogeneous(
        [&](std::span<const double> x, std::span<double> out) { theta_gradient(th, x, out); }, p,
        g, spec);
  }
  const auto space = parameter_space();
  Eigen::MatrixXd jac(g.q(), p);
  const double h = kPhiJacobianStep;
  for (int i = 0; i < p; ++i) {
    auto plus = th;
    auto minus = th;
    plus[i] += h;
    minus[i] -= h;
    const bool up = space.contains(plus);
    const bool down = space.contains(minus);
    std::vector<double> fp, fm;
    double width = 0.0;
    if (up && down) {
      fp = phi(plus, g, spec);
      fm = phi(minus, g, spec);
      width = 2.0 * h;
    } else if (up) {
      fp = phi(plus, g, spec);
      fm = phi(th, g, spec);
      width = h;
    } else if (down) {
      fp = phi(th, g, spec);
      fm = phi(minus, g, spec);
      width = h;
    } else {
      throw ParameterDomainError(name() + ": no room for a finite difference in parameter " +
                                 std::to_string(i));
    }
    for (int m = 0; m < g.q(); ++m) jac(m, i) = (fp[m] - fm[m]) / width;
  }
  return jac;
}

nlohmann::json Family::to_json(std::span<const double> theta) const {
  nlohmann::json params = nlohmann::json::object();
  const auto names = param_names();
  for (std::size_t i = 0; i < names.size(); ++i) params[names[i]] = theta[i];
  return {{"family", name()}, {"d", dimension()}, {"params", params}};
}

Eigen::MatrixXd integrate_homogeneous(
    const std::function<void(std::span<const double>, std::span<double>)>& h, int components,
    const WeightSpec& g, const CubatureSpec& spec) {
  const int d = g.d();
  const int q = g.q();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(q, components);
  if (d == 2) {
    std::vector<double> hx(components);
    for (int m = 0; m < q; ++m) {
      for (const auto& term : g[m].terms) {
        const double scale = term.coefficient / (term.degree() + d + 1.0);
        for (int c = 0; c < components; ++c) {
          for (int face = 0; face < d; ++face) {
            auto f = [&](double t) {
              const double x[2] = {face == 0 ? 1.0 : t, face == 0 ? t : 1.0};
              h(x, hx);
              return term(x) * hx[c];
            };
            out(m, c) += scale * integrate_interval(f, 0.0, 1.0).value;
          }
        }
      }
    }
    return out;
  }
  std::vector<double> hx(components);
  std::vector<double> gx(q);
  auto res = integrate_cube(
      [&](std::span<const double> x, std::span<double> val) {
        h(x, hx);
        g.eval(x, gx);
        for (int m = 0; m < q; ++m)
          for (int c = 0; c < components; ++c) val[m * components + c] = gx[m] * hx[c];
      },
      d, q * components, spec);
  for (int m = 0; m < q; ++m)
    for (int c = 0; c < components; ++c) out(m, c) = res.value[m * components + c];
  return out;
}

double integrate_homogeneous_term(const std::function<double(std::span<const double>)>& h,
                                  const Monomial& term, int d, const CubatureSpec& spec) {
  WeightSpec single({WeightFunction{{term}}}, d);
  auto m = integrate_homogeneous(
      [&](std::span<const double> x, std::span<double> out) { out[0] = h(x); }, 1, single, spec);
  return m(0, 0);
}

FamilyPtr make_family(std::string_view spec, int d) {
  if (spec == "logistic") return std::make_shared<LogisticFamily>(d);
  if (spec == "alog" || spec == "alog-sym") {
    if (d != 2) throw DataError("the asymmetric logistic family is bivariate; data has d=" +
                                std::to_string(d));
    return std::make_shared<AsymLogisticFamily>(spec == "alog-sym");
  }
  if (spec.starts_with("factor:")) {
    auto digits = spec.substr(7);
    int r = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), r);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || r < 1) {
      throw DataError("bad factor model spec '" + std::string(spec) + "'");
    }
    return std::make_shared<FactorFamily>(d, r);
  }
  throw DataError("unknown model '" + std::string(spec) + "' (expected logistic, alog, alog-sym, factor:R)");
}

}  // namespace stdfm
