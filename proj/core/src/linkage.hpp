#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "metriclab/metric_space.hpp"
#include "metriclab/partition.hpp"

namespace metriclab::detail {

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;
  double key = 0.0;
};

// Minimum spanning tree on order keys (Prim, dense). Indices are global; an
// empty subset means the whole space.
std::vector<Edge> minimum_spanning_tree(const FiniteMetricSpace& space,
                                        std::span<const std::size_t> subset = {});

// Single-linkage merge states S_0 (singletons) .. S_k ({X}), where S_m has
// merged every tree edge with key <= weights[m-1]. weights are the distinct
// tree keys, ascending.
struct Linkage {
  std::vector<double> weights;
  std::vector<Partition> states;
  // Largest block diameter of each state, as an order key.
  std::vector<double> delta_keys;
};

Linkage single_linkage(const FiniteMetricSpace& space);

// A single-linkage cluster other than X itself (leaves included), with the
// key at which it is absorbed into a larger cluster. That key is the least
// distance from the cluster to its complement.
struct Cluster {
  std::vector<std::size_t> members;
  double diameter_key = 0.0;
  double exit_key = 0.0;
};

std::vector<Cluster> single_linkage_clusters(const FiniteMetricSpace& space);

PartitionStats stats_from_keys(const FiniteMetricSpace& space, double delta_key,
                               double gamma_key, std::size_t cardinality);

}  // namespace metriclab::detail
