#include "stdfm/quadrature.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/random/sobol.hpp>

#include "stdfm/error.hpp"
#include "stdfm/rng.hpp"

namespace stdfm {

namespace {

constexpr int kRandomizations = 2;

std::size_t floor_pow2(std::size_t v) { return v == 0 ? 0 : std::bit_floor(v); }

inline std::uint32_t reverse_bits(std::uint32_t x) {
  x = ((x >> 1) & 0x55555555U) | ((x & 0x55555555U) << 1);
  x = ((x >> 2) & 0x33333333U) | ((x & 0x33333333U) << 2);
  x = ((x >> 4) & 0x0f0f0f0fU) | ((x & 0x0f0f0f0fU) << 4);
  x = ((x >> 8) & 0x00ff00ffU) | ((x & 0x00ff00ffU) << 8);
  return (x >> 16) | (x << 16);
}

// Sobol points in blocks, shared by both randomizations.
class SobolStream {
 public:
  explicit SobolStream(int dim) : dim_(dim), engine_(static_cast<unsigned>(dim)) {}

  // Fills `out` with the next `count` points (dim words each). The engine starts at index 1,
  // so the origin is emitted first to keep every power-of-two prefix a digital net.
  void next(std::size_t count, std::vector<std::uint64_t>& out) {
    out.resize(count * dim_);
    auto begin = out.begin();
    if (!origin_done_ && count > 0) {
      std::fill(begin, begin + dim_, std::uint64_t{0});
      begin += dim_;
      origin_done_ = true;
    }
    engine_.generate(begin, out.end());
  }

 private:
  int dim_;
  bool origin_done_ = false;
  boost::random::sobol engine_;
};

// Hash-based approximation of Owen's nested uniform scramble on the leading 32 digits.
inline std::uint32_t owen_scramble(std::uint32_t x, std::uint32_t seed) {
  x = reverse_bits(x);
  x ^= x * 0x3d20adeaU;
  x += seed;
  x *= (seed >> 16) | 1U;
  x ^= x * 0x05526c56U;
  x ^= x * 0x53a22864U;
  return reverse_bits(x);
}

inline double to_unit(std::uint64_t v, std::uint32_t seed) {
  const std::uint32_t s = owen_scramble(static_cast<std::uint32_t>(v >> 32), seed);
  // midpoint of the 2^-32 cell keeps points strictly inside (0,1)
  return (static_cast<double>(s) + 0.5) * 0x1.0p-32;
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 32) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

VectorCubatureResult integrate_cube(const VectorIntegrand& f, int dimension, int components,
                                    const CubatureSpec& spec) {
  if (dimension < 1) throw QuadratureError("cubature dimension must be >= 1");
  if (components < 1) throw QuadratureError("cubature needs at least one component");
  const std::size_t max_n = floor_pow2(spec.max_points);
  std::size_t start_n = floor_pow2(std::max<std::size_t>(spec.min_points, 1));
  if (max_n == 0) throw QuadratureError("cubature budget must be positive");
  start_n = std::min(start_n, max_n);

  std::uint64_t state = spec.seed;
  std::vector<std::uint64_t> masks(static_cast<std::size_t>(kRandomizations) * dimension);
  for (auto& m : masks) m = splitmix64(state);

  SobolStream sobol(dimension);
  std::vector<std::uint64_t> raw;
  std::vector<double> point(dimension);
  std::vector<double> fx(components);
  // sums[r][c]
  std::vector<double> sums(static_cast<std::size_t>(kRandomizations) * components, 0.0);
  std::vector<double> chunk;

  VectorCubatureResult res;
  res.value.assign(components, 0.0);
  res.error.assign(components, 0.0);

  std::size_t done = 0;
  std::size_t target = start_n;
  while (true) {
    const std::size_t count = target - done;
    sobol.next(count, raw);
    chunk.assign(static_cast<std::size_t>(kRandomizations) * components * count, 0.0);
    for (int r = 0; r < kRandomizations; ++r) {
      const std::uint64_t* mask = masks.data() + static_cast<std::size_t>(r) * dimension;
      for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t* v = raw.data() + i * dimension;
        for (int j = 0; j < dimension; ++j) point[j] = to_unit(v[j], static_cast<std::uint32_t>(mask[j]));
        f(point, fx);
        for (int c = 0; c < components; ++c) {
          chunk[(static_cast<std::size_t>(r) * components + c) * count + i] = fx[c];
        }
      }
    }
    for (int r = 0; r < kRandomizations; ++r) {
      for (int c = 0; c < components; ++c) {
        const std::size_t off = (static_cast<std::size_t>(r) * components + c) * count;
        sums[static_cast<std::size_t>(r) * components + c] +=
            pairwise_sum(std::span<const double>(chunk.data() + off, count));
      }
    }
    done = target;

    double scale = 0.0;
    for (int c = 0; c < components; ++c) {
      const double a = sums[c] / static_cast<double>(done);
      const double b = sums[static_cast<std::size_t>(components) + c] / static_cast<double>(done);
      res.value[c] = 0.5 * (a + b);
      res.error[c] = 0.5 * std::abs(a - b);
      scale = std::max(scale, std::abs(res.value[c]));
    }
    res.points = done;
    res.tolerance_met = true;
    for (int c = 0; c < components; ++c) {
      if (res.error[c] > spec.rel_tol * scale) res.tolerance_met = false;
    }
    if (res.tolerance_met || done >= max_n) break;
    target = done * 2;
  }
  return res;
}

CubatureResult integrate_cube(const ScalarIntegrand& f, int dimension, const CubatureSpec& spec) {
  auto vec = integrate_cube(
      [&](std::span<const double> x, std::span<double> out) { out[0] = f(x); }, dimension, 1, spec);
  return {vec.value[0], vec.error[0], vec.points, vec.tolerance_met};
}

IntervalResult integrate_interval(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol) {
  double err = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, rel_tol, &err);
  return {v, err};
}

}  // namespace stdfm
