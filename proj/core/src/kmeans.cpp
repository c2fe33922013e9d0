#include "stdfm/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "stdfm/error.hpp"
#include "stdfm/estimator.hpp"
#include "stdfm/factor.hpp"
#include "stdfm/rng.hpp"

namespace stdfm {

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

KMeansResult lloyd(const std::vector<std::vector<double>>& pts, int clusters, Rng& rng,
                   int max_iterations) {
  const std::size_t n = pts.size();
  const std::size_t dim = pts.front().size();
  KMeansResult res;

  // k-means++ seeding
  res.centers.push_back(pts[rng.below(n)]);
  std::vector<double> dist(n);
  while (static_cast<int>(res.centers.size()) < clusters) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : res.centers) best = std::min(best, sq_dist(pts[i], c));
      dist[i] = best;
      total += best;
    }
    std::size_t pick = rng.below(n);
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        u -= dist[i];
        if (u <= 0.0) {
          pick = i;
          break;
        }
      }
    }
    res.centers.push_back(pts[pick]);
  }

  res.assignment.assign(n, -1);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int arg = 0;
      double best = std::numeric_limits<double>::infinity();
      for (int c = 0; c < clusters; ++c) {
        const double dd = sq_dist(pts[i], res.centers[c]);
        if (dd < best) {
          best = dd;
          arg = c;
        }
      }
      if (res.assignment[i] != arg) {
        res.assignment[i] = arg;
        changed = true;
      }
    }
    std::vector<std::vector<double>> sums(clusters, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(clusters, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[res.assignment[i]];
      for (std::size_t j = 0; j < dim; ++j) sums[res.assignment[i]][j] += pts[i][j];
    }
    for (int c = 0; c < clusters; ++c) {
      if (counts[c] == 0) {
        // reseed an empty cluster at the point farthest from its center
        std::size_t far = 0;
        double fd = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double dd = sq_dist(pts[i], res.centers[res.assignment[i]]);
          if (dd > fd) {
            fd = dd;
            far = i;
          }
        }
        res.centers[c] = pts[far];
        res.assignment[far] = c;
        changed = true;
        continue;
      }
      for (std::size_t j = 0; j < dim; ++j) res.centers[c][j] = sums[c][j] / counts[c];
    }
    if (!changed) break;
  }
  res.within_ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) res.within_ss += sq_dist(pts[i], res.centers[res.assignment[i]]);
  return res;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int clusters, int restarts,
                    std::uint64_t seed, int max_iterations) {
  if (clusters < 1) throw DataError("number of clusters must be positive");
  if (static_cast<int>(points.size()) < clusters) {
    throw DataError("k-means needs at least " + std::to_string(clusters) + " points, got " +
                    std::to_string(points.size()));
  }
  KMeansResult best;
  bool have = false;
  for (int r = 0; r < std::max(1, restarts); ++r) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(r)));
    auto res = lloyd(points, clusters, rng, max_iterations);
    if (!have || res.within_ss < best.within_ss) {
      best = std::move(res);
      have = true;
    }
  }
  return best;
}

Eigen::MatrixXd loadings_from_centers(const std::vector<std::vector<double>>& centers, double eps) {
  const int r = static_cast<int>(centers.size());
  if (r < 1) throw DataError("no cluster centers");
  if (r > 20) throw DataError("too many factors for the mass solver");
  const int d = static_cast<int>(centers.front().size());
  Eigen::MatrixXd W(d, r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < d; ++j) W(j, i) = centers[i][j];
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);

  // Exhaustive active-set search: the constrained optimum is the best feasible candidate.
  Eigen::VectorXd best_m;
  double best_res = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << r); ++mask) {
    std::vector<int> free;
    for (int i = 0; i < r; ++i)
      if (mask & (1u << i)) free.push_back(i);
    Eigen::VectorXd rhs = ones;
    for (int i = 0; i < r; ++i)
      if (!(mask & (1u << i))) rhs -= eps * W.col(i);
    Eigen::MatrixXd A(d, static_cast<Eigen::Index>(free.size()));
    for (std::size_t c = 0; c < free.size(); ++c) A.col(static_cast<Eigen::Index>(c)) = W.col(free[c]);
    const Eigen::VectorXd sol = A.completeOrthogonalDecomposition().solve(rhs);
    if ((sol.array() < eps).any()) continue;
    Eigen::VectorXd m = Eigen::VectorXd::Constant(r, eps);
    for (std::size_t c = 0; c < free.size(); ++c) m(free[c]) = sol(static_cast<Eigen::Index>(c));
    const double res = (W * m - ones).squaredNorm();
    if (res < best_res) {
      best_res = res;
      best_m = m;
    }
  }
  if (best_m.size() == 0) best_m = Eigen::VectorXd::Constant(r, eps);

  Eigen::MatrixXd B(d, r);
  for (int i = 0; i < r; ++i) B.col(i) = best_m(i) * W.col(i);
  for (int j = 0; j < d; ++j) {
    const double s = B.row(j).sum();
    if (s > 0.0) {
      B.row(j) /= s;
    } else {
      B.row(j).setConstant(1.0 / r);
    }
  }
  return canonicalize_loadings(B);
}

std::vector<double> factor_init_kmeans(const Sample& sample, int r, double threshold_divisor,
                                       std::uint64_t seed) {
  return factor_init_kmeans(compute_ranks(sample), r, threshold_divisor, seed);
}

std::vector<double> factor_init_kmeans(const RankMatrix& ranks, int r, double threshold_divisor,
                                       std::uint64_t seed) {
  if (r < 1) throw DataError("number of factors must be positive");
  if (!(threshold_divisor > 0.0)) throw DataError("threshold divisor must be positive");
  const int n = ranks.n();
  const int d = ranks.d();
  if (r == 1) return {};

  const auto select = [&](double divisor) {
    std::vector<std::vector<double>> pts;
    const double threshold = n / divisor;
    std::vector<double> row(d);
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int j = 0; j < d; ++j) {
        row[j] = static_cast<double>(n) / (n + 1 - ranks.ranks(i, j));
        sum += row[j];
      }
      if (sum > threshold) {
        for (auto& v : row) v /= sum;
        pts.push_back(row);
      }
    }
    return pts;
  };

  auto pts = select(threshold_divisor);
  if (static_cast<int>(pts.size()) < r * d) pts = select(threshold_divisor * 2.0);
  if (static_cast<int>(pts.size()) < r * d) {
    throw FitError("only " + std::to_string(pts.size()) +
                   " pseudo-observations exceed the clustering threshold; need " +
                   std::to_string(r * d));
  }
  const auto km = kmeans(pts, r, 20, seed);
  return stack_loadings(loadings_from_centers(km.centers));
}

}  // namespace stdfm
