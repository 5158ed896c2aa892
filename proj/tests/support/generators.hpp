#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "metriclab/metric_space.hpp"
#include "metriclab/partition.hpp"

namespace metriclab::testing {

using Rng = std::mt19937_64;

// Points uniform in the unit cube of dimension `dim`, Euclidean distance
// scaled by 1/sqrt(dim) so the diameter stays below 1.
inline FiniteMetricSpace random_euclidean(Rng& rng, std::size_t n, std::size_t dim = 2) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (auto& p : pts) {
    for (auto& x : p) x = unit(rng);
  }
  Matrix m(n, std::vector<double>(n, 0.0));
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += (pts[i][k] - pts[j][k]) * (pts[i][k] - pts[j][k]);
      m[i][j] = m[j][i] = std::sqrt(s) * scale;
    }
  }
  return validate(m);
}

// Ultrametric from a random merge order with increasing random heights.
inline FiniteMetricSpace random_ultrametric(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  std::vector<double> heights(n > 0 ? n - 1 : 0);
  for (auto& h : heights) h = unit(rng);
  std::sort(heights.begin(), heights.end());
  std::vector<std::vector<std::size_t>> clusters(n);
  for (std::size_t i = 0; i < n; ++i) clusters[i] = {i};
  Matrix m(n, std::vector<double>(n, 0.0));
  for (double h : heights) {
    std::uniform_int_distribution<std::size_t> pick(0, clusters.size() - 1);
    std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    while (b == a) b = pick(rng);
    for (std::size_t x : clusters[a]) {
      for (std::size_t y : clusters[b]) m[x][y] = m[y][x] = h;
    }
    clusters[a].insert(clusters[a].end(), clusters[b].begin(), clusters[b].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(b));
  }
  return validate(m);
}

inline Partition random_partition(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<std::size_t> blocks(1, n);
  const std::size_t k = blocks(rng);
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  std::vector<std::size_t> labels(n);
  for (auto& l : labels) l = pick(rng);
  return Partition::from_labels(labels);
}

inline FiniteMetricSpace line(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  Matrix m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m[i][j] = std::abs(xs[i] - xs[j]);
  }
  return validate(m);
}

// Random nonempty subset of 0..n-1 in increasing order.
inline std::vector<std::size_t> random_subset(Rng& rng, std::size_t n, std::size_t min_size = 1) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  std::uniform_int_distribution<std::size_t> size(min_size, n);
  idx.resize(size(rng));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace metriclab::testing
