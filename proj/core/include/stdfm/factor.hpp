#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "stdfm/family.hpp"

namespace stdfm {

/// Max-linear factor models are described by a d x r loading matrix B: row j is a
/// coordinate, column i a factor. Valid matrices have b_ij >= 0, unit row sums and
/// positive column sums.

/// l(x) = sum_i max_j b_ij x_j.
double factor_l(const Eigen::MatrixXd& B, std::span<const double> x);

/// Right-hand partials: sum_i b_ij 1{ b_ij x_j >= max_{s != j} b_is x_s }.
void factor_partials(const Eigen::MatrixXd& B, std::span<const double> x, std::span<double> out);

struct SpectralAtom {
  std::vector<double> point;  // on the unit simplex
  double mass = 0.0;
};

/// Factor i gives the atom b_i / sum_j b_ij with mass sum_j b_ij.
std::vector<SpectralAtom> factor_spectral_atoms(const Eigen::MatrixXd& B);

/// int_{[0,1]^d} x_k^s l(x) dx by the one-dimensional reduction for all-positive loadings.
/// Each inner integrand is C x^e on every piece between the breakpoints b_il/b_ij, so the
/// pieces are integrated in closed form. Returns nullopt when some b_ij == 0.
std::optional<double> factor_weighted_integral(const Eigen::MatrixXd& B, int k, double s);

/// Throws ParameterDomainError describing the first violated condition.
void validate_loadings(const Eigen::MatrixXd& B, double tol = 1e-9);

/// Columns sorted by decreasing column sum; equal sums ordered lexicographically decreasing.
Eigen::MatrixXd canonicalize_loadings(const Eigen::MatrixXd& B);

/// Canonical theta: the first r-1 canonical columns stacked.
std::vector<double> stack_loadings(const Eigen::MatrixXd& B);

/// Inverse of stacking: the last column is 1 minus the row sums of the others.
Eigen::MatrixXd loadings_from_theta(std::span<const double> theta, int d, int r);

class FactorFamily final : public Family {
 public:
  FactorFamily(int d, int r);

  int factors() const { return r_; }
  Eigen::MatrixXd loadings(std::span<const double> theta) const {
    return loadings_from_theta(theta, d_, r_);
  }

  std::string name() const override { return "factor"; }
  int dimension() const override { return d_; }
  int num_params() const override { return (r_ - 1) * d_; }
  std::vector<std::string> param_names() const override;
  ParameterSpace parameter_space() const override;
  std::vector<double> default_start() const override;
  /// Also rejects factors with zero column sum.
  void validate(std::span<const double> theta) const override;

  double stdf(std::span<const double> theta, std::span<const double> x) const override;
  void partials(std::span<const double> theta, std::span<const double> x,
                std::span<double> out) const override;

  /// Stick-breaking per row: b_1j = s_1, b_2j = (1-s_1) s_2, ..., s_i = sigmoid(u).
  std::vector<double> to_unconstrained(std::span<const double> theta) const override;
  std::vector<double> from_unconstrained(std::span<const double> u) const override;
  std::vector<double> canonicalize(std::span<const double> theta) const override;

  /// Single-coordinate monomial terms go through factor_weighted_integral; everything
  /// else falls back to the generic integration path.
  std::vector<double> phi(std::span<const double> theta, const WeightSpec& g,
                          const CubatureSpec& spec) const override;

  nlohmann::json to_json(std::span<const double> theta) const override;
  /// x_j^s for s = 1..r-1 and j = 1..d, then the constant 1: q = (r-1) d + 1.
  WeightSpec default_weights() const override;

 private:
  int d_;
  int r_;
};

}  // namespace stdfm
