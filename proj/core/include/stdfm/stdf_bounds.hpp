#pragma once

#include <span>

namespace stdfm {

/// True iff max_j x_j <= l <= sum_j x_j, each side with absolute slack `tol`.
bool stdf_bounds_check(double l_value, std::span<const double> x, double tol = 1e-12);

/// Throws std::logic_error when the bounds fail. Compiled to a no-op under NDEBUG;
/// study runs use release builds.
void debug_check_stdf(double l_value, std::span<const double> x);

}  // namespace stdfm
