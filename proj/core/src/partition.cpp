#include "metriclab/partition.hpp"

#include <algorithm>
#include <unordered_map>

#include "linkage.hpp"

namespace metriclab {

Partition Partition::from_labels(std::span<const std::size_t> labels) {
  Partition p;
  const std::size_t n = labels.size();
  p.block_of_.assign(n, 0);
  std::unordered_map<std::size_t, std::size_t> ids;
  ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = ids.try_emplace(labels[i], p.blocks_.size());
    if (inserted) p.blocks_.emplace_back();
    p.blocks_[it->second].push_back(i);
    p.block_of_[i] = it->second;
  }
  return p;
}

Partition Partition::from_blocks(std::vector<std::vector<std::size_t>> blocks, std::size_t n) {
  std::vector<std::size_t> labels(n, n);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw DomainError("partition has an empty block");
    for (std::size_t i : blocks[b]) {
      if (i >= n) throw DomainError("partition index " + std::to_string(i) + " out of range");
      if (labels[i] != n) {
        throw DomainError("point " + std::to_string(i) + " lies in two blocks");
      }
      labels[i] = b;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == n) throw DomainError("point " + std::to_string(i) + " is in no block");
  }
  return from_labels(labels);
}

Partition Partition::trivial(std::size_t n) {
  std::vector<std::size_t> labels(n, 0);
  return from_labels(labels);
}

Partition Partition::singletons(std::size_t n) {
  std::vector<std::size_t> labels(n);
  std::iota(labels.begin(), labels.end(), std::size_t{0});
  return from_labels(labels);
}

bool Partition::refines(const Partition& coarser) const {
  if (coarser.size() != size()) return false;
  for (const auto& block : blocks_) {
    const std::size_t target = coarser.block_of(block.front());
    for (std::size_t i : block) {
      if (coarser.block_of(i) != target) return false;
    }
  }
  return true;
}

Partition Partition::restrict_to(std::span<const std::size_t> subset) const {
  std::vector<std::size_t> labels(subset.size());
  for (std::size_t a = 0; a < subset.size(); ++a) labels[a] = block_of_.at(subset[a]);
  return from_labels(labels);
}

namespace detail {

PartitionStats stats_from_keys(const FiniteMetricSpace& space, double delta_key,
                               double gamma_key, std::size_t cardinality) {
  return finish_stats(space.value_of_key(delta_key), space.value_of_key(gamma_key),
                      space.log_of_key(delta_key), space.log_of_key(gamma_key), cardinality);
}

std::vector<Edge> minimum_spanning_tree(const FiniteMetricSpace& space,
                                        std::span<const std::size_t> subset) {
  std::vector<std::size_t> all;
  if (subset.empty()) {
    all.resize(space.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    subset = all;
  }
  const std::size_t m = subset.size();
  std::vector<Edge> edges;
  if (m < 2) return edges;
  edges.reserve(m - 1);
  std::vector<bool> in_tree(m, false);
  std::vector<double> best(m, kInfinity);
  std::vector<std::size_t> from(m, 0);
  std::size_t current = 0;
  in_tree[0] = true;
  for (std::size_t step = 1; step < m; ++step) {
    std::size_t next = m;
    for (std::size_t a = 0; a < m; ++a) {
      if (in_tree[a]) continue;
      const double k = space.order_key(subset[current], subset[a]);
      if (k < best[a]) {
        best[a] = k;
        from[a] = current;
      }
      if (next == m || best[a] < best[next]) next = a;
    }
    in_tree[next] = true;
    edges.push_back({subset[from[next]], subset[next], best[next]});
    current = next;
  }
  return edges;
}

Linkage single_linkage(const FiniteMetricSpace& space) {
  const std::size_t n = space.size();
  auto edges = minimum_spanning_tree(space);
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (a.key != b.key) return a.key < b.key;
    return std::pair(a.u, a.v) < std::pair(b.u, b.v);
  });

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  std::vector<double> diam(n, space.key_of_value(0.0));
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  const auto snapshot = [&] {
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = find(i);
    return Partition::from_labels(labels);
  };

  Linkage out;
  double delta_key = space.key_of_value(0.0);
  out.states.push_back(snapshot());
  out.delta_keys.push_back(delta_key);
  std::size_t e = 0;
  while (e < edges.size()) {
    const double w = edges[e].key;
    for (; e < edges.size() && edges[e].key == w; ++e) {
      std::size_t a = find(edges[e].u);
      std::size_t b = find(edges[e].v);
      if (members[a].size() < members[b].size()) std::swap(a, b);
      double cross = diam[a] > diam[b] ? diam[a] : diam[b];
      for (std::size_t x : members[a]) {
        for (std::size_t y : members[b]) cross = std::max(cross, space.order_key(x, y));
      }
      members[a].insert(members[a].end(), members[b].begin(), members[b].end());
      members[b].clear();
      members[b].shrink_to_fit();
      parent[b] = a;
      diam[a] = cross;
      delta_key = std::max(delta_key, cross);
    }
    out.weights.push_back(w);
    out.states.push_back(snapshot());
    out.delta_keys.push_back(delta_key);
  }
  return out;
}

std::vector<Cluster> single_linkage_clusters(const FiniteMetricSpace& space) {
  const std::size_t n = space.size();
  auto edges = minimum_spanning_tree(space);
  std::sort(edges.begin(), edges.end(),
            [](const Edge& a, const Edge& b) { return a.key < b.key; });
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};
  std::vector<double> diam(n, space.key_of_value(0.0));
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  std::vector<Cluster> out;
  std::size_t e = 0;
  while (e < edges.size()) {
    const double w = edges[e].key;
    std::size_t end = e;
    std::vector<std::size_t> roots;
    for (; end < edges.size() && edges[end].key == w; ++end) {
      roots.push_back(find(edges[end].u));
      roots.push_back(find(edges[end].v));
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    for (std::size_t r : roots) {
      auto sorted = members[r];
      std::sort(sorted.begin(), sorted.end());
      out.push_back({std::move(sorted), diam[r], w});
    }
    for (; e < end; ++e) {
      std::size_t a = find(edges[e].u);
      std::size_t b = find(edges[e].v);
      if (members[a].size() < members[b].size()) std::swap(a, b);
      double cross = std::max(diam[a], diam[b]);
      for (std::size_t x : members[a]) {
        for (std::size_t y : members[b]) cross = std::max(cross, space.order_key(x, y));
      }
      members[a].insert(members[a].end(), members[b].begin(), members[b].end());
      members[b].clear();
      parent[b] = a;
      diam[a] = cross;
    }
  }
  return out;
}

}  // namespace detail

PartitionStats partition_stats(const FiniteMetricSpace& space, const Partition& partition) {
  const std::size_t n = space.size();
  if (partition.size() != n) throw DomainError("partition size does not match the space");
  const double zero = space.key_of_value(0.0);
  double delta = zero;
  double gamma = kInfinity;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = space.order_key(i, j);
      if (partition.same_block(i, j)) {
        delta = std::max(delta, k);
      } else {
        gamma = std::min(gamma, k);
      }
    }
  }
  if (partition.block_count() <= 1) {
    gamma = n > 1 ? space.key_of_log(space.log_diameter()) : zero;
  }
  return detail::stats_from_keys(space, delta, gamma, partition.block_count());
}

namespace {

Partition threshold_by_key(const FiniteMetricSpace& space, double key) {
  const std::size_t n = space.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (space.order_key(i, j) < key) parent[find(i)] = find(j);
    }
  }
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = find(i);
  return Partition::from_labels(labels);
}

}  // namespace

Partition threshold_partition(const FiniteMetricSpace& space, double t) {
  if (!(t > 0.0)) throw ParameterError("threshold must be positive");
  return threshold_by_key(space, space.key_of_value(t));
}

Partition threshold_partition_log(const FiniteMetricSpace& space, double log_t) {
  return threshold_by_key(space, space.key_of_log(log_t));
}

PartitionChain make_chain(const FiniteMetricSpace& space, std::vector<Partition> levels,
                          std::vector<double> log_thresholds) {
  if (levels.empty()) throw DomainError("chain has no levels");
  if (!log_thresholds.empty() && log_thresholds.size() != levels.size()) {
    throw DomainError("chain needs one threshold per level");
  }
  PartitionChain chain;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (levels[l].size() != space.size()) {
      throw DomainError("chain level " + std::to_string(l) + " has the wrong point count");
    }
    if (l > 0 && !levels[l].refines(levels[l - 1])) {
      throw NotNested(l, "a block straddles two blocks of the coarser level");
    }
    chain.stats.push_back(partition_stats(space, levels[l]));
    if (l + 1 < levels.size() && chain.stats.back().log_delta == -kInfinity &&
        space.size() > 1) {
      throw DomainError("all-singleton level " + std::to_string(l) +
                        " must be the last level of a chain");
    }
  }
  chain.levels = std::move(levels);
  chain.thresholds.reserve(log_thresholds.size());
  for (double lt : log_thresholds) chain.thresholds.push_back(std::exp(lt));
  chain.log_thresholds = std::move(log_thresholds);
  return chain;
}

namespace {

void push_level(PartitionChain& chain, const FiniteMetricSpace& space, Partition level,
                PartitionStats stats, double threshold_key) {
  chain.levels.push_back(std::move(level));
  chain.stats.push_back(stats);
  chain.thresholds.push_back(space.value_of_key(threshold_key));
  chain.log_thresholds.push_back(space.log_of_key(threshold_key));
}

double diameter_key(const FiniteMetricSpace& space) {
  return space.size() > 1 ? space.key_of_log(space.log_diameter()) : space.key_of_value(0.0);
}

}  // namespace

PartitionChain dendrogram_chain(const FiniteMetricSpace& space) {
  auto linkage = detail::single_linkage(space);
  const std::size_t k = linkage.weights.size();
  PartitionChain chain;
  if (k == 0) {
    push_level(chain, space, std::move(linkage.states[0]),
               detail::stats_from_keys(space, linkage.delta_keys[0], diameter_key(space), 1),
               space.key_of_value(1.0));
    return chain;
  }
  const double top = std::nextafter(linkage.weights[k - 1], kInfinity);
  for (std::size_t j = 0; j <= k; ++j) {
    const std::size_t m = k - j;
    const double gamma_key = m == k ? diameter_key(space) : linkage.weights[m];
    const double threshold_key = j == 0 ? top : linkage.weights[m];
    auto stats = detail::stats_from_keys(space, linkage.delta_keys[m], gamma_key,
                                         linkage.states[m].block_count());
    push_level(chain, space, std::move(linkage.states[m]), stats, threshold_key);
  }
  return chain;
}

PartitionChain ball_chain(const FiniteMetricSpace& space, double tolerance) {
  const auto check = is_ultrametric(space, tolerance);
  if (!check.ok) {
    throw NotUltrametric("strong triangle inequality fails at (" +
                         std::to_string(check.witness[0]) + ", " +
                         std::to_string(check.witness[1]) + ", " +
                         std::to_string(check.witness[2]) + ")");
  }
  auto linkage = detail::single_linkage(space);
  const std::size_t k = linkage.weights.size();
  PartitionChain chain;
  if (k == 0) {
    push_level(chain, space, std::move(linkage.states[0]),
               detail::stats_from_keys(space, linkage.delta_keys[0], diameter_key(space), 1),
               space.key_of_value(0.0));
    return chain;
  }
  for (std::size_t m = k; m >= 1; --m) {
    const double gamma_key = m == k ? diameter_key(space) : linkage.weights[m];
    auto stats = detail::stats_from_keys(space, linkage.delta_keys[m], gamma_key,
                                         linkage.states[m].block_count());
    push_level(chain, space, std::move(linkage.states[m]), stats, linkage.weights[m - 1]);
  }
  return chain;
}

std::vector<AssociatedPair> associated_endpoints(const FiniteMetricSpace& space) {
  const std::size_t n = space.size();
  const auto edges = detail::minimum_spanning_tree(space);
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency(n);
  for (const auto& e : edges) {
    adjacency[e.u].emplace_back(e.v, e.key);
    adjacency[e.v].emplace_back(e.u, e.key);
  }
  std::vector<AssociatedPair> out;
  std::vector<double> bottleneck(n);
  std::vector<std::size_t> stack;
  std::vector<bool> seen(n);
  for (std::size_t root = 0; root < n; ++root) {
    std::fill(seen.begin(), seen.end(), false);
    bottleneck[root] = -kInfinity;
    seen[root] = true;
    stack.assign(1, root);
    while (!stack.empty()) {
      const std::size_t x = stack.back();
      stack.pop_back();
      for (auto [y, key] : adjacency[x]) {
        if (seen[y]) continue;
        seen[y] = true;
        bottleneck[y] = std::max(bottleneck[x], key);
        stack.push_back(y);
      }
    }
    for (std::size_t j = root + 1; j < n; ++j) {
      const double key = space.order_key(root, j);
      if (bottleneck[j] >= key) {
        out.push_back({root, j, space.value_of_key(key), space.log_of_key(key)});
      }
    }
  }
  return out;
}

double largest_gap_log(const FiniteMetricSpace& space, std::span<const std::size_t> subset) {
  double best = -kInfinity;
  for (const auto& e : detail::minimum_spanning_tree(space, subset)) {
    best = std::max(best, space.log_of_key(e.key));
  }
  return best;
}

double largest_gap(const FiniteMetricSpace& space, std::span<const std::size_t> subset) {
  return std::exp(largest_gap_log(space, subset));
}

namespace {

void check_nested(const PartitionChain& chain) {
  for (std::size_t l = 1; l < chain.levels.size(); ++l) {
    if (!chain.levels[l].refines(chain.levels[l - 1])) {
      throw NotNested(l, "a block straddles two blocks of the coarser level");
    }
  }
}

// min over consecutive levels with positive δ of ln δ_{n+1} - p ln δ_n.
std::pair<double, std::size_t> log_witness(const std::vector<PartitionStats>& stats, double p) {
  double best = kInfinity;
  std::size_t at = 0;
  for (std::size_t l = 0; l + 1 < stats.size(); ++l) {
    if (stats[l].log_delta == -kInfinity || stats[l + 1].log_delta == -kInfinity) continue;
    const double w = stats[l + 1].log_delta - p * stats[l].log_delta;
    if (w < best) {
      best = w;
      at = l;
    }
  }
  return {best, at};
}

}  // namespace

ChainClassReport classify_chain(const PartitionChain& chain, double p) {
  if (!(p > 1.0)) throw ParameterError("classify_chain needs p > 1");
  check_nested(chain);
  ChainClassReport report;
  report.p = p;
  const auto& stats = chain.stats;
  for (std::size_t l = 0; l + 1 < stats.size(); ++l) {
    if (stats[l + 1].log_delta > stats[l].log_delta) report.delta_monotone = false;
    if (stats[l + 1].log_delta >= stats[l].log_delta) report.delta_strictly_decreasing = false;
  }
  const auto [log_a, at] = log_witness(stats, p);
  report.log_p_witness = log_a;
  report.p_witness = std::exp(log_a);
  report.p_witness_level = at;

  const std::size_t L = stats.size();
  report.R_sequence.resize(L);
  report.dichotomy_flags.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    report.R_sequence[l] = stats[l].log_ratio;
    const double diff = stats[l].log_gamma - stats[l].log_delta;
    report.dichotomy_flags[l] = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
  }
  report.R_running_liminf.assign(L, kInfinity);
  double tail = kInfinity;
  bool any = false;
  for (std::size_t l = L; l-- > 0;) {
    const bool informative =
        stats[l].cardinality > 1 && stats[l].log_delta != -kInfinity;
    if (informative) {
      tail = std::min(tail, stats[l].log_ratio);
      if (!any) report.R_liminf_estimate = tail;
      any = true;
    }
    report.R_running_liminf[l] = tail;
  }
  return report;
}

PushforwardReport pushforward_chain(const PartitionChain& chain, const FiniteMetricSpace& source,
                                    const FiniteMetricSpace& image, const HolderFit& fit,
                                    double p, double tolerance) {
  if (source.size() != image.size()) throw DomainError("source and image sizes differ");
  if (!(fit.s > 0.0 && fit.s <= fit.t)) throw ParameterError("need 0 < s <= t");
  if (!(fit.c1 > 0.0 && fit.c2 > 0.0)) throw ParameterError("constants must be positive");
  check_nested(chain);

  const double log_c1 = std::log(fit.c1);
  const double log_c2 = std::log(fit.c2);
  const std::size_t n = source.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double ld = source.log_distance(i, j);
      const double li = image.log_distance(i, j);
      const double below = log_c1 + fit.t * ld - li;
      const double above = li - (log_c2 + fit.s * ld);
      if (below > tolerance) throw DistortionBoundsViolated("lower distortion bound", i, j, below);
      if (above > tolerance) throw DistortionBoundsViolated("upper distortion bound", i, j, above);
    }
  }

  PushforwardReport report;
  report.p_prime = fit.t / fit.s * p;
  report.image_stats.reserve(chain.size());
  for (std::size_t l = 0; l < chain.size(); ++l) {
    const auto& src = chain.stats[l];
    auto img = partition_stats(image, chain.levels[l]);
    if (src.log_gamma != -kInfinity) {
      const double below = log_c1 + fit.t * src.log_gamma - img.log_gamma;
      const double above = img.log_gamma - (log_c2 + fit.s * src.log_gamma);
      if (below > tolerance || above > tolerance) {
        throw BoundViolated("gap distortion bound", 0, 0, l, std::max(below, above));
      }
    }
    report.image_stats.push_back(img);
  }

  const auto [log_a, at] = log_witness(chain.stats, p);
  (void)at;
  report.log_source_witness = log_a;
  report.source_witness = std::exp(log_a);
  report.log_a_prime = log_c1 - report.p_prime * log_c2 + fit.t * log_a;
  report.a_prime = std::exp(report.log_a_prime);
  const auto [log_image, at_image] = log_witness(report.image_stats, report.p_prime);
  report.log_image_witness = log_image;
  report.image_witness = std::exp(log_image);
  if (log_a != kInfinity && log_image < report.log_a_prime - tolerance) {
    throw VerificationError("image chain witness " + std::to_string(log_image) +
                            " (log) falls below a' at level " + std::to_string(at_image));
  }
  return report;
}

}  // namespace metriclab
