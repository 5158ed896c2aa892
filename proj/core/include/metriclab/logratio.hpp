#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "metriclab/metric_space.hpp"
#include "metriclab/partition.hpp"

namespace metriclab {

inline constexpr double kDefaultBurnInEpsilon = 0.05;
inline constexpr std::size_t kExactPartitionLimit = 8;

struct ProfileLevel {
  std::size_t n = 0;
  double delta = 0.0;
  double gamma = 0.0;
  double log_delta = -kInfinity;
  double log_gamma = -kInfinity;
  double R = 0.0;
  // Levels with at least two blocks and δ > 0 take part in the estimate.
  bool informative = false;
};

// Hypotheses (a) and (b) of the gap-condition rule for R(X, d) as a liminf.
struct Property6Report {
  bool delta_strictly_decreasing = false;
  // (b) was evaluated; needs the underlying space.
  bool gap_evaluated = false;
  // Smallest C with Γ(A) <= C γ(α_{n+1}) for some A ∈ α_n with diam(A) = δ(α_n),
  // maximized over n. +inf when some level has no such block.
  double C = kInfinity;
  double log_C = kInfinity;
  std::size_t worst_level = 0;
  bool holds() const { return delta_strictly_decreasing && gap_evaluated && C < kInfinity; }
};

struct ProfileOptions {
  double epsilon = kDefaultBurnInEpsilon;
  std::optional<double> exact_limit;
};

struct LogRatioProfile {
  std::vector<ProfileLevel> levels;
  // Per level: inf of R over informative levels at or after it (+inf if none).
  std::vector<double> running_liminf;
  double estimate = 0.0;
  // No informative level; the estimate falls back to the finite-space value 0.
  bool finite_fallback = false;
  std::optional<std::size_t> burn_in;
  double epsilon = kDefaultBurnInEpsilon;
  std::optional<double> exact_limit;
  Property6Report property6;
};

LogRatioProfile profile_from_stats(std::span<const PartitionStats> stats,
                                   const ProfileOptions& options = {});
LogRatioProfile profile(const PartitionChain& chain, const ProfileOptions& options = {});
// Also evaluates the gap hypothesis against the space.
LogRatioProfile profile(const PartitionChain& chain, const FiniteMetricSpace& space,
                        const ProfileOptions& options = {});

struct NondiscretenessReport {
  // γ strictly decreases across the multi-block levels before any terminal
  // all-singleton level.
  bool gamma_strictly_decreasing = true;
  std::optional<std::size_t> first_violation;
  // The chain ends in all singletons, whose γ is the least pairwise distance.
  bool discrete_terminal = false;
  double terminal_gamma = 0.0;
  bool ok() const { return gamma_strictly_decreasing; }
};

NondiscretenessReport nondiscreteness_check(const PartitionChain& chain);

// Calls f(labels) for every set partition of {0..n-1} as a restricted growth
// string, in lexicographic order.
template <class F>
void for_each_set_partition(std::size_t n, F&& f) {
  if (n == 0) return;
  std::vector<std::size_t> a(n, 0);
  std::vector<std::size_t> maxima(n, 0);
  while (true) {
    f(std::span<const std::size_t>(a));
    std::size_t i = n - 1;
    while (i > 0 && a[i] == maxima[i - 1] + 1) --i;
    if (i == 0) return;
    ++a[i];
    maxima[i] = std::max(maxima[i - 1], a[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 0;
      maxima[j] = maxima[i];
    }
  }
}

enum class GapMode { kAuto, kExact, kHeuristic };

struct GapBoundRow {
  double r = 0.0;
  double log_r = 0.0;
  double g = 0.0;
  double G = kInfinity;
  double log_g = -kInfinity;
  double log_G = kInfinity;
  // ln g(r) / ln r and ln G(r) / ln r; NaN when r >= 1 or G(r) is infinite.
  double lower_ratio = 0.0;
  double upper_ratio = 0.0;
};

struct GapBounds {
  std::vector<GapBoundRow> rows;
  // G came from candidate two-block partitions: an upper bound for the infimum.
  bool G_upper_bound_only = false;
  // Values at the smallest radius in (0, 1).
  double lower_estimate = std::numeric_limits<double>::quiet_NaN();
  double upper_estimate = std::numeric_limits<double>::quiet_NaN();
};

// Radii are given as ln r, which reaches below the smallest double on
// log-backed spaces. Outside exact mode G is minimized over {X}, the dendrogram
// levels, the splits {B, X \ B} of every single-linkage cluster B and any
// extra candidates.
GapBounds gap_bounds_log(const FiniteMetricSpace& space, std::span<const double> log_radii,
                         GapMode mode = GapMode::kAuto,
                         std::span<const Partition> extra_candidates = {});
GapBounds gap_bounds(const FiniteMetricSpace& space, std::span<const double> radii,
                     GapMode mode = GapMode::kAuto);

struct SandwichCheck {
  bool holds = true;
  // Informative levels where ln g(δ_n)/ln δ_n <= R_n <= ln G(δ_n)/ln δ_n fails.
  std::vector<std::size_t> failures;
};

// Evaluates the gap bounds at every informative chain radius δ_n and checks the
// per-level sandwich.
SandwichCheck sandwich_at_chain(const FiniteMetricSpace& space, const PartitionChain& chain,
                                GapMode mode = GapMode::kAuto, double tolerance = 1e-12);

struct BruteForceResult {
  double min_R = kInfinity;
  Partition witness;
  PartitionStats witness_stats;
  std::size_t partitions_seen = 0;
  std::size_t partitions_qualifying = 0;
};

// Minimum of R(α) over all partitions with δ(α) < r. Throws ExactModeSizeExceeded
// above kExactPartitionLimit points. The result does not depend on `threads`.
BruteForceResult brute_force_min_R(const FiniteMetricSpace& space, double r,
                                   std::size_t threads = 1);

}  // namespace metriclab
