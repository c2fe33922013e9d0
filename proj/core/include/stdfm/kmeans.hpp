#pragma once

#include <cstdint>
#include <vector>

namespace stdfm {

struct KMeansResult {
  std::vector<std::vector<double>> centers;
  std::vector<int> assignment;
  double within_ss = 0.0;
};

/// Lloyd iterations from k-means++ seeds, best of `restarts` by within-cluster sum of
/// squares (ties go to the earlier restart).
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int clusters,
                    int restarts = 20, std::uint64_t seed = 1, int max_iterations = 200);

}  // namespace stdfm
