#pragma once

#include <cstdint>
#include <span>

#include <Eigen/Core>

#include "stdfm/family.hpp"
#include "stdfm/sample.hpp"

namespace stdfm {

class Rng;

/// Positive stable variate with Laplace transform exp(-s^alpha), alpha in (0, 1), by the
/// Kanter / Chambers-Mallows-Stuck transform of a uniform angle and an exponential.
double positive_stable(double alpha, Rng& rng);

/// Logistic max-stable law with unit Frechet margins: X_j = (S / E_j)^theta with S positive
/// stable of index theta and E_j iid unit exponential. theta == 1 gives independent margins.
Sample sample_logistic(double theta, int d, int n, std::uint64_t seed);

/// Asymmetric logistic pairs: X = max((1-psi1) Z1, psi1 V1), Y = max((1-psi2) Z2, psi2 V2)
/// with Z1, Z2 unit Frechet and (V1, V2) logistic(theta), all independent.
Sample sample_alog(double theta, double psi1, double psi2, int n, std::uint64_t seed);

enum class FactorForm { Max, Sum };

/// Factor model with d x r loadings `a` (row j = coordinate, column i = factor) and
/// Frechet(nu) factors Z_i: X_j = max_i a_ij Z_i, or sum_i a_ij Z_i + noise * N(0,1).
Sample sample_factor(const Eigen::MatrixXd& a, double nu, int n, std::uint64_t seed,
                     FactorForm form = FactorForm::Max, double noise = 0.0);

/// Draws from the max-stable law of `family` at theta. Factor models use a = B and nu = 1.
Sample sample_family(const Family& family, std::span<const double> theta, int n,
                     std::uint64_t seed);

}  // namespace stdfm
