#include "metriclab/logratio.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <thread>

#include "linkage.hpp"

namespace metriclab {

namespace {

bool within(double a, double b, double eps) {
  if (a == b) return true;
  return std::abs(a - b) < eps;
}

// Levels × points² above which the gap hypothesis is not evaluated.
constexpr double kGapWorkLimit = 4e9;

void evaluate_gap_hypothesis(const PartitionChain& chain, const FiniteMetricSpace& space,
                             Property6Report& report) {
  const double n = static_cast<double>(space.size());
  if (static_cast<double>(chain.size()) * n * n > kGapWorkLimit) return;
  report.gap_evaluated = true;
  report.log_C = -kInfinity;
  for (std::size_t l = 0; l + 1 < chain.size(); ++l) {
    const auto& stats = chain.stats[l];
    const double log_gamma_next = chain.stats[l + 1].log_gamma;
    if (stats.log_delta == -kInfinity || log_gamma_next == -kInfinity) continue;
    double best = kInfinity;
    for (const auto& block : chain.levels[l].blocks()) {
      if (block.size() < 2) continue;
      double diam = -kInfinity;
      for (std::size_t a = 0; a < block.size(); ++a) {
        for (std::size_t b = a + 1; b < block.size(); ++b) {
          diam = std::max(diam, space.order_key(block[a], block[b]));
        }
      }
      if (space.log_of_key(diam) != stats.log_delta) continue;
      best = std::min(best, largest_gap_log(space, block) - log_gamma_next);
    }
    if (best > report.log_C) {
      report.log_C = best;
      report.worst_level = l;
    }
  }
  if (report.log_C == -kInfinity) report.log_C = 0.0;
  report.C = std::exp(report.log_C);
}

}  // namespace

LogRatioProfile profile_from_stats(std::span<const PartitionStats> stats,
                                   const ProfileOptions& options) {
  LogRatioProfile out;
  out.epsilon = options.epsilon;
  out.exact_limit = options.exact_limit;
  const std::size_t L = stats.size();
  out.levels.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& s = stats[l];
    out.levels[l] = {l, s.delta, s.gamma, s.log_delta, s.log_gamma, s.log_ratio,
                     s.cardinality > 1 && s.log_delta != -kInfinity};
  }

  out.running_liminf.assign(L, kInfinity);
  std::optional<std::size_t> last;
  double tail = kInfinity;
  for (std::size_t l = L; l-- > 0;) {
    if (out.levels[l].informative) {
      if (!last) last = l;
      tail = std::min(tail, out.levels[l].R);
    }
    out.running_liminf[l] = tail;
  }
  if (!last) {
    out.finite_fallback = true;
    out.estimate = 0.0;
  } else {
    out.estimate = out.running_liminf[*last];
    for (std::size_t l = *last + 1; l-- > 0;) {
      if (!out.levels[l].informative) continue;
      if (!within(out.levels[l].R, out.estimate, options.epsilon)) break;
      out.burn_in = l;
    }
  }

  bool strict = true;
  double previous = kInfinity;
  std::size_t positive = 0;
  for (const auto& level : out.levels) {
    if (level.log_delta == -kInfinity) continue;
    if (level.log_delta >= previous) strict = false;
    previous = level.log_delta;
    ++positive;
  }
  out.property6.delta_strictly_decreasing = strict && positive >= 2;
  return out;
}

LogRatioProfile profile(const PartitionChain& chain, const ProfileOptions& options) {
  return profile_from_stats(chain.stats, options);
}

LogRatioProfile profile(const PartitionChain& chain, const FiniteMetricSpace& space,
                        const ProfileOptions& options) {
  auto out = profile_from_stats(chain.stats, options);
  evaluate_gap_hypothesis(chain, space, out.property6);
  return out;
}

NondiscretenessReport nondiscreteness_check(const PartitionChain& chain) {
  NondiscretenessReport report;
  const auto& stats = chain.stats;
  std::size_t end = stats.size();
  if (end > 0 && stats.back().log_delta == -kInfinity && stats.back().cardinality > 1) {
    report.discrete_terminal = true;
    report.terminal_gamma = stats.back().gamma;
    --end;
  }
  double previous = kInfinity;
  for (std::size_t l = 0; l < end; ++l) {
    if (stats[l].cardinality < 2) continue;
    if (stats[l].log_gamma >= previous) {
      report.gamma_strictly_decreasing = false;
      report.first_violation = l;
      break;
    }
    previous = stats[l].log_gamma;
  }
  return report;
}

namespace {

struct KeyPair {
  double delta = 0.0;
  double gamma = 0.0;
};

KeyPair keys_of_labels(const FiniteMetricSpace& space, std::span<const std::size_t> labels,
                       std::size_t blocks) {
  const std::size_t n = space.size();
  KeyPair out{space.key_of_value(0.0), kInfinity};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = space.order_key(i, j);
      if (labels[i] == labels[j]) {
        out.delta = std::max(out.delta, k);
      } else {
        out.gamma = std::min(out.gamma, k);
      }
    }
  }
  if (blocks <= 1) out.gamma = n > 1 ? space.key_of_log(space.log_diameter()) : out.delta;
  return out;
}

KeyPair keys_of(const FiniteMetricSpace& space, const Partition& p) {
  return keys_of_labels(space, p.block_of(), p.block_count());
}

double ratio_or_nan(double log_value, double log_r) {
  if (!(log_r < 0.0) || std::isinf(log_value)) return std::numeric_limits<double>::quiet_NaN();
  return log_value / log_r;
}

}  // namespace

GapBounds gap_bounds_log(const FiniteMetricSpace& space, std::span<const double> log_radii,
                         GapMode mode, std::span<const Partition> extra_candidates) {
  const std::size_t n = space.size();
  if (n == 0) throw DomainError("gap bounds need a nonempty space");
  if (mode == GapMode::kExact && n > kExactPartitionLimit) {
    throw ExactModeSizeExceeded("exact gap bounds points", n, kExactPartitionLimit);
  }
  const bool exact =
      mode == GapMode::kExact || (mode == GapMode::kAuto && n <= kExactPartitionLimit);

  // g is exact from the dendrogram: a threshold partition at γ(α) refines α
  // and has gap at least γ(α).
  const auto dendrogram = dendrogram_chain(space);
  std::vector<KeyPair> levels;
  for (const auto& s : dendrogram.stats) {
    levels.push_back({space.key_of_log(s.log_delta), space.key_of_log(s.log_gamma)});
  }

  std::vector<KeyPair> candidates;
  std::vector<detail::Cluster> clusters;
  if (exact) {
    for_each_set_partition(n, [&](std::span<const std::size_t> labels) {
      const std::size_t blocks = *std::max_element(labels.begin(), labels.end()) + 1;
      candidates.push_back(keys_of_labels(space, labels, blocks));
    });
  } else {
    candidates = levels;
    for (const auto& p : extra_candidates) candidates.push_back(keys_of(space, p));
    clusters = detail::single_linkage_clusters(space);
  }

  // Complement diameters are computed on demand and cached.
  std::vector<double> complement_diam(clusters.size(), std::numeric_limits<double>::quiet_NaN());
  const auto complement_diameter = [&](std::size_t c) {
    if (!std::isnan(complement_diam[c])) return complement_diam[c];
    std::vector<bool> inside(n, false);
    for (std::size_t i : clusters[c].members) inside[i] = true;
    double diam = space.key_of_value(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (inside[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!inside[j]) diam = std::max(diam, space.order_key(i, j));
      }
    }
    return complement_diam[c] = diam;
  };
  std::vector<std::size_t> cluster_order(clusters.size());
  std::iota(cluster_order.begin(), cluster_order.end(), std::size_t{0});
  std::sort(cluster_order.begin(), cluster_order.end(), [&](std::size_t a, std::size_t b) {
    return clusters[a].exit_key < clusters[b].exit_key;
  });

  GapBounds out;
  out.G_upper_bound_only = !exact;
  for (double log_r : log_radii) {
    const double key = space.key_of_log(log_r);
    GapBoundRow row;
    row.r = std::exp(log_r);
    row.log_r = log_r;
    double g_key = -kInfinity;
    for (const auto& level : levels) {
      if (level.delta <= key) g_key = std::max(g_key, level.gamma);
    }
    double G_key = kInfinity;
    for (const auto& c : candidates) {
      if (c.delta >= key) G_key = std::min(G_key, c.gamma);
    }
    for (std::size_t c : cluster_order) {
      if (clusters[c].exit_key >= G_key) break;
      if (clusters[c].diameter_key >= key || complement_diameter(c) >= key) {
        G_key = clusters[c].exit_key;
        break;
      }
    }
    row.log_g = space.log_of_key(g_key);
    row.g = std::exp(row.log_g);
    row.log_G = G_key == kInfinity ? kInfinity : space.log_of_key(G_key);
    row.G = std::exp(row.log_G);
    row.lower_ratio = ratio_or_nan(row.log_g, log_r);
    row.upper_ratio = ratio_or_nan(row.log_G, log_r);
    out.rows.push_back(row);
  }

  double smallest = 0.0;
  for (const auto& row : out.rows) {
    const double log_r = row.log_r;
    if (std::isnan(row.lower_ratio) && std::isnan(row.upper_ratio)) continue;
    if (!(log_r < smallest)) continue;
    smallest = log_r;
    out.lower_estimate = row.lower_ratio;
    out.upper_estimate = row.upper_ratio;
  }
  return out;
}

GapBounds gap_bounds(const FiniteMetricSpace& space, std::span<const double> radii,
                     GapMode mode) {
  std::vector<double> logs;
  logs.reserve(radii.size());
  for (double r : radii) {
    if (!(r > 0.0)) throw ParameterError("gap bound radii must be positive");
    logs.push_back(std::log(r));
  }
  return gap_bounds_log(space, logs, mode);
}

SandwichCheck sandwich_at_chain(const FiniteMetricSpace& space, const PartitionChain& chain,
                                GapMode mode, double tolerance) {
  std::vector<double> log_radii;
  std::vector<std::size_t> at;
  for (std::size_t l = 0; l < chain.size(); ++l) {
    const auto& s = chain.stats[l];
    if (s.cardinality < 2 || s.log_delta == -kInfinity || !(s.log_delta < 0.0)) continue;
    log_radii.push_back(s.log_delta);
    at.push_back(l);
  }
  const auto bounds = gap_bounds_log(space, log_radii, mode, chain.levels);
  SandwichCheck check;
  for (std::size_t k = 0; k < at.size(); ++k) {
    const double R = chain.stats[at[k]].log_ratio;
    if (std::isinf(R)) continue;
    const auto& row = bounds.rows[k];
    const double slack = tolerance * (1.0 + std::abs(R));
    const bool low_ok = std::isnan(row.lower_ratio) || row.lower_ratio <= R + slack;
    const bool high_ok = std::isnan(row.upper_ratio) || R <= row.upper_ratio + slack;
    if (!low_ok || !high_ok) {
      check.holds = false;
      check.failures.push_back(at[k]);
    }
  }
  return check;
}

BruteForceResult brute_force_min_R(const FiniteMetricSpace& space, double r,
                                   std::size_t threads) {
  const std::size_t n = space.size();
  if (n > kExactPartitionLimit) {
    throw ExactModeSizeExceeded("brute-force partition points", n, kExactPartitionLimit);
  }
  if (!(r > 0.0)) throw ParameterError("radius must be positive");
  if (threads < 1) throw ParameterError("threads must be at least 1");
  const double key = space.key_of_value(r);

  struct Local {
    BruteForceResult result;
    std::size_t witness_index = 0;
  };
  // Worker w takes the partitions whose enumeration index is w mod threads.
  const auto work = [&](std::size_t w, Local& local) {
    std::size_t index = 0;
    for_each_set_partition(n, [&](std::span<const std::size_t> labels) {
      const std::size_t k = index++;
      if (k % threads != w) return;
      ++local.result.partitions_seen;
      const auto p = Partition::from_labels(labels);
      const auto keys = keys_of(space, p);
      if (!(keys.delta < key)) return;
      ++local.result.partitions_qualifying;
      const auto stats = partition_stats(space, p);
      if (stats.log_ratio < local.result.min_R) {
        local.result.min_R = stats.log_ratio;
        local.result.witness = p;
        local.result.witness_stats = stats;
        local.witness_index = k;
      }
    });
  };
  std::vector<Local> locals(threads);
  if (threads == 1) {
    work(0, locals[0]);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w, std::ref(locals[w]));
  }

  // Earliest partition in enumeration order wins ties, as in a serial scan.
  BruteForceResult out;
  std::size_t best_index = 0;
  for (const auto& local : locals) {
    out.partitions_seen += local.result.partitions_seen;
    out.partitions_qualifying += local.result.partitions_qualifying;
    const auto& cand = local.result;
    if (cand.min_R < out.min_R ||
        (cand.min_R == out.min_R && cand.min_R < kInfinity && local.witness_index < best_index)) {
      out.min_R = cand.min_R;
      out.witness = cand.witness;
      out.witness_stats = cand.witness_stats;
      best_index = local.witness_index;
    }
  }
  return out;
}

}  // namespace metriclab
