#include "stdfm/stdf_bounds.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace stdfm {

bool stdf_bounds_check(double l_value, std::span<const double> x, double tol) {
  double mx = 0.0;
  double sum = 0.0;
  for (double v : x) {
    mx = std::max(mx, v);
    sum += v;
  }
  // relative slack keeps the check meaningful for large arguments
  const double slack = tol * std::max(1.0, sum);
  return l_value >= mx - slack && l_value <= sum + slack;
}

void debug_check_stdf([[maybe_unused]] double l_value, [[maybe_unused]] std::span<const double> x) {
#ifndef NDEBUG
  if (!stdf_bounds_check(l_value, x, 1e-9)) {
    std::ostringstream os;
    os << "stdf value " << l_value << " violates max/sum bounds at x = (";
    for (std::size_t j = 0; j < x.size(); ++j) os << (j ? ", " : "") << x[j];
    os << ")";
    throw std::logic_error(os.str());
  }
#endif
}

}  // namespace stdfm
