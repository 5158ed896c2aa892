#pragma once

#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "metriclab/metric_space.hpp"

namespace metriclab {

// A partition of {0, ..., n-1}. Blocks are kept canonical: each block sorted,
// blocks ordered by their least element, block ids following that order.
class Partition {
 public:
  Partition() = default;

  // Any labelling; equal labels share a block.
  static Partition from_labels(std::span<const std::size_t> labels);
  // Throws DomainError unless the blocks are nonempty, disjoint and cover 0..n-1.
  static Partition from_blocks(std::vector<std::vector<std::size_t>> blocks, std::size_t n);
  static Partition trivial(std::size_t n);
  static Partition singletons(std::size_t n);

  std::size_t size() const { return block_of_.size(); }
  std::size_t block_count() const { return blocks_.size(); }
  const std::vector<std::vector<std::size_t>>& blocks() const { return blocks_; }
  const std::vector<std::size_t>& block_of() const { return block_of_; }
  std::size_t block_of(std::size_t i) const { return block_of_[i]; }
  bool same_block(std::size_t i, std::size_t j) const { return block_of_[i] == block_of_[j]; }

  // Every block of *this lies inside a block of coarser.
  bool refines(const Partition& coarser) const;

  // Trace on a subset {A ∩ Y ≠ ∅}, reindexed by position in `subset`.
  Partition restrict_to(std::span<const std::size_t> subset) const;

  bool operator==(const Partition& other) const = default;

 private:
  std::vector<std::size_t> block_of_;
  std::vector<std::vector<std::size_t>> blocks_;
};

struct PartitionStats {
  double delta = 0.0;
  double gamma = 0.0;
  double log_delta = -kInfinity;
  double log_gamma = -kInfinity;
  double log_ratio = 0.0;
  std::size_t cardinality = 0;
};

// R from ln δ and ln γ: 0 when δ = 0, +inf when δ >= 1 or γ >= 1, else the quotient.
inline double log_ratio_from_logs(double log_delta, double log_gamma) {
  if (log_delta == -kInfinity) return 0.0;
  if (log_delta >= 0.0 || log_gamma >= 0.0) return kInfinity;
  return log_gamma / log_delta;
}

inline double log_ratio(double delta, double gamma) {
  if (delta == 0.0) return 0.0;
  return log_ratio_from_logs(std::log(delta), std::log(gamma));
}

namespace detail {

inline PartitionStats finish_stats(double delta, double gamma, double log_delta,
                                   double log_gamma, std::size_t cardinality) {
  return {delta, gamma, log_delta, log_gamma, log_ratio_from_logs(log_delta, log_gamma),
          cardinality};
}

}  // namespace detail

template <MetricLike M>
PartitionStats partition_stats(const M& space, const Partition& partition) {
  const std::size_t n = space.size();
  double delta = 0.0;
  double gamma = kInfinity;
  double diameter = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = space.distance(i, j);
      diameter = std::max(diameter, d);
      if (partition.same_block(i, j)) {
        delta = std::max(delta, d);
      } else {
        gamma = std::min(gamma, d);
      }
    }
  }
  if (partition.block_count() <= 1) gamma = diameter;
  return detail::finish_stats(delta, gamma, delta > 0.0 ? std::log(delta) : -kInfinity,
                              gamma > 0.0 ? std::log(gamma) : -kInfinity,
                              partition.block_count());
}

// Works in the log domain for log-backed spaces.
PartitionStats partition_stats(const FiniteMetricSpace& space, const Partition& partition);

// Components of the graph {d(x, y) < t}.
template <MetricLike M>
Partition threshold_partition(const M& space, double t) {
  const std::size_t n = space.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (space.distance(i, j) < t) parent[find(i)] = find(j);
    }
  }
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = find(i);
  return Partition::from_labels(labels);
}

Partition threshold_partition(const FiniteMetricSpace& space, double t);
// Threshold given as ln t; exact on log-backed spaces.
Partition threshold_partition_log(const FiniteMetricSpace& space, double log_t);

// Levels coarse-to-fine. thresholds/log_thresholds are empty or one per level.
struct PartitionChain {
  std::vector<Partition> levels;
  std::vector<PartitionStats> stats;
  std::vector<double> thresholds;
  std::vector<double> log_thresholds;

  std::size_t size() const { return levels.size(); }
  bool has_thresholds() const { return !log_thresholds.empty(); }
};

// Computes stats and checks nesting. Throws NotNested, or DomainError when an
// all-singleton level is followed by another level.
PartitionChain make_chain(const FiniteMetricSpace& space, std::vector<Partition> levels,
                          std::vector<double> log_thresholds = {});

// Full single-linkage chain from {X} down to singletons. Level 0 carries a
// threshold just above the largest merge height; level j the j-th largest
// distinct merge height.
PartitionChain dendrogram_chain(const FiniteMetricSpace& space);

// Closed r_n-balls for each distinct positive distance r_1 > r_2 > ... of an
// ultrametric. Throws NotUltrametric.
PartitionChain ball_chain(const FiniteMetricSpace& space, double tolerance = kDefaultTolerance);

struct AssociatedPair {
  std::size_t i = 0;
  std::size_t j = 0;
  double gap = 0.0;
  double log_gap = -kInfinity;
};

// Pairs (i, j), i < j, lying in different components of {d < d(i, j)}.
std::vector<AssociatedPair> associated_endpoints(const FiniteMetricSpace& space);

// Largest gap Γ of a subset (whole space when empty); 0 below two points.
double largest_gap(const FiniteMetricSpace& space, std::span<const std::size_t> subset = {});
double largest_gap_log(const FiniteMetricSpace& space,
                       std::span<const std::size_t> subset = {});

struct ChainClassReport {
  bool is_refining = true;
  bool delta_monotone = true;
  bool delta_strictly_decreasing = true;
  double p = 2.0;
  // min over consecutive levels with positive δ of δ_{n+1} / δ_n^p.
  double p_witness = kInfinity;
  double log_p_witness = kInfinity;
  std::size_t p_witness_level = 0;
  std::vector<double> R_sequence;
  std::vector<double> R_running_liminf;
  double R_liminf_estimate = 0.0;
  // Per level: +1 when γ > δ, 0 when equal, -1 when γ < δ.
  std::vector<int> dichotomy_flags;
};

ChainClassReport classify_chain(const PartitionChain& chain, double p);

struct PushforwardReport {
  double p_prime = 0.0;
  double a_prime = 0.0;
  double log_a_prime = 0.0;
  double source_witness = 0.0;
  double log_source_witness = 0.0;
  double image_witness = 0.0;
  double log_image_witness = 0.0;
  std::vector<PartitionStats> image_stats;
};

// `image` is the same point set under the second metric; `fit` must satisfy
// c1 d^t <= d' <= c2 d^s on every pair. Throws DistortionBoundsViolated on a
// pair, BoundViolated on a level's gap, VerificationError when the image
// witness falls below a'.
PushforwardReport pushforward_chain(const PartitionChain& chain, const FiniteMetricSpace& source,
                                    const FiniteMetricSpace& image, const HolderFit& fit,
                                    double p, double tolerance = 1e-9);

}  // namespace metriclab
