#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "protoset/common.hpp"
#include "protoset/rng.hpp"

namespace protoset {

struct KMeansResult {
  std::vector<std::vector<double>> centers;
  std::vector<int> assignment;
  double inertia = 0.0;
  int iterations = 0;
};

namespace detail {

inline double sq_dist(const std::vector<double>& a,
                      const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace detail

// Weighted Lloyd's algorithm with k-means++ seeding. `weights` may be empty
// (uniform). Empty clusters keep their previous center.
inline KMeansResult lloyd_kmeans(const std::vector<std::vector<double>>& points,
                                 const std::vector<double>& weights,
                                 std::size_t k, Rng& rng, int max_iter = 50,
                                 double rel_tol = 1e-6) {
  std::size_t n = points.size();
  check_data(n >= 1, "kmeans requires at least one point");
  check_data(k >= 1 && k <= n, "kmeans requires 1 <= k <= n");
  check_data(weights.empty() || weights.size() == n,
             "kmeans weight count mismatch");
  std::size_t d = points.front().size();
  auto wt = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

  KMeansResult res;
  // k-means++ seeding on the weighted D^2 distribution
  res.centers.reserve(k);
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  {
    double total_w = 0.0;
    for (std::size_t i = 0; i < n; ++i) total_w += wt(i);
    check_data(total_w > 0, "kmeans requires positive total weight");
    double u = rng.uniform() * total_w;
    std::size_t first = 0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += wt(i);
      if (acc >= u) {
        first = i;
        break;
      }
    }
    res.centers.push_back(points[first]);
  }
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist2[i] = std::min(dist2[i], detail::sq_dist(points[i], res.centers.back()));
      total += wt(i) * dist2[i];
    }
    std::size_t chosen = 0;
    if (total > 0) {
      double u = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += wt(i) * dist2[i];
        if (acc >= u) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = rng.index(n);
    }
    res.centers.push_back(points[chosen]);
  }

  res.assignment.assign(n, 0);
  double prev_inertia = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iter; ++iter) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        double dd = detail::sq_dist(points[i], res.centers[c]);
        if (dd < best) {
          best = dd;
          best_c = static_cast<int>(c);
        }
      }
      res.assignment[i] = best_c;
      inertia += wt(i) * best;
    }
    res.inertia = inertia;
    res.iterations = iter + 1;

    std::vector<std::vector<double>> sums(k, std::vector<double>(d, 0.0));
    std::vector<double> mass(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      int c = res.assignment[i];
      mass[c] += wt(i);
      for (std::size_t j = 0; j < d; ++j) sums[c][j] += wt(i) * points[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (mass[c] <= 0) continue;  // empty cluster keeps its center
      for (std::size_t j = 0; j < d; ++j) res.centers[c][j] = sums[c][j] / mass[c];
    }

    if (prev_inertia < std::numeric_limits<double>::infinity()) {
      double improvement =
          (prev_inertia - inertia) / std::max(prev_inertia, 1e-300);
      if (improvement < rel_tol) break;
    }
    prev_inertia = inertia;
  }
  return res;
}

}  // namespace protoset
