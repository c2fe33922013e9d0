#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace stdfm {

/// One step of the splitmix64 generator; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of substream `stream` under `master`: splitmix64 applied to master ^ mix(stream).
/// Replication r of a study always uses substream_seed(seed, r), so results do not depend
/// on the order in which replications are run.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream);

/// mt19937_64 with hand-written variate transforms, so streams are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next() { return engine_(); }
  /// Uniform on the open interval (0, 1).
  double uniform();
  double exponential();
  double normal();
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace stdfm
