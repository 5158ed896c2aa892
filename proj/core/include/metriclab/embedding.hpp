#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metriclab/metric_space.hpp"
#include "metriclab/partition.hpp"

namespace metriclab {

inline constexpr std::size_t kExactSeparatedLimit = 20;

namespace detail {

// Largest subset of `ball` with pairwise distance >= r2 (branch and bound).
template <MetricLike M>
std::size_t max_separated(const M& space, std::span<const std::size_t> ball, double r2) {
  const std::size_t m = ball.size();
  std::vector<std::uint32_t> conflict(m, 0);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      if (space.distance(ball[a], ball[b]) < r2) {
        conflict[a] |= 1u << b;
        conflict[b] |= 1u << a;
      }
    }
  }
  std::size_t best = 0;
  const auto search = [&](auto&& self, std::uint32_t candidates, std::size_t size) -> void {
    if (candidates == 0) {
      best = std::max(best, size);
      return;
    }
    if (size + static_cast<std::size_t>(std::popcount(candidates)) <= best) return;
    const int v = std::countr_zero(candidates);
    const std::uint32_t bit = 1u << v;
    self(self, candidates & ~bit & ~conflict[v], size + 1);
    self(self, candidates & ~bit, size);
  };
  const std::uint32_t all = m == 32 ? ~0u : ((1u << m) - 1u);
  search(search, all, 0);
  return best;
}

}  // namespace detail

// Points within r1 of the centre (closed ball), in index order.
template <MetricLike M>
std::vector<std::size_t> closed_ball(const M& space, std::size_t centre, double r) {
  std::vector<std::size_t> ball;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (space.distance(centre, i) <= r) ball.push_back(i);
  }
  return ball;
}

// J for an explicit ball: a maximal subset with pairwise distance >= r2, built
// greedily in the given order, or a maximum one when the ball is small.
template <MetricLike M>
std::size_t separated_count_in(const M& space, std::span<const std::size_t> ball, double r2) {
  if (ball.size() <= kExactSeparatedLimit) return detail::max_separated(space, ball, r2);
  std::vector<std::size_t> picked;
  for (std::size_t x : ball) {
    bool ok = true;
    for (auto it = picked.rbegin(); it != picked.rend(); ++it) {
      if (space.distance(x, *it) < r2) {
        ok = false;
        break;
      }
    }
    if (ok) picked.push_back(x);
  }
  return picked.size();
}

template <MetricLike M>
std::size_t separated_count(const M& space, std::size_t centre, double r1, double r2) {
  if (!(r2 > 0.0 && r2 < r1)) throw ParameterError("separated_count needs 0 < r2 < r1");
  const auto ball = closed_ball(space, centre, r1);
  return separated_count_in(space, ball, r2);
}

// On the line a sweep over sorted coordinates gives the exact maximum.
std::size_t separated_count(const LineSpace& space, std::size_t centre, double r1, double r2);

struct DimensionSample {
  double r1 = 0.0;
  double r2 = 0.0;
  std::size_t J = 0;
  std::size_t centre = 0;
  // ln J / ln(r1 / r2).
  double value = 0.0;
};

struct DimensionWindow {
  double r = 1.0;
  double t = 1.0;
};

struct DimensionEstimate {
  DimensionWindow window;
  std::vector<DimensionSample> samples;
  double estimate = 0.0;
};

struct DimensionOptions {
  // Empty means every point, thinned to max_centres by even striding.
  std::vector<std::size_t> centres;
  std::size_t max_centres = 64;
};

std::vector<std::size_t> dimension_centres(std::size_t n, const DimensionOptions& options);

inline double dimension_value(std::size_t J, double r1, double r2) {
  return std::log(static_cast<double>(J)) / std::log(r1 / r2);
}

// Sup of ln J / ln(r1/r2) over grid pairs with 0 < r2 < r1 < r and r1/r2 > t,
// maximized over the centres. Throws EmptyWindow when no grid pair qualifies.
template <MetricLike M>
DimensionEstimate estimate_metric_dimension(const M& space, DimensionWindow window,
                                            std::span<const std::pair<double, double>> grid,
                                            const DimensionOptions& options = {}) {
  DimensionEstimate out;
  out.window = window;
  const auto centres = dimension_centres(space.size(), options);
  bool any = false;
  for (auto [r1, r2] : grid) {
    if (!(r2 > 0.0 && r2 < r1 && r1 < window.r && r1 / r2 > window.t)) continue;
    any = true;
    DimensionSample best{r1, r2, 0, 0, -kInfinity};
    for (std::size_t c : centres) {
      const std::size_t J = separated_count(space, c, r1, r2);
      if (J > best.J) {
        best.J = J;
        best.centre = c;
      }
    }
    if (best.J == 0) continue;
    best.value = dimension_value(best.J, r1, r2);
    out.samples.push_back(best);
    out.estimate = std::max(out.estimate, best.value);
  }
  if (!any) throw EmptyWindow("no grid pair lies inside the window");
  return out;
}

struct DimensionTrend {
  std::vector<DimensionEstimate> estimates;
  bool nondecreasing = true;
  bool nonincreasing = true;
};

// Estimates over a sequence of windows, in the given order.
template <MetricLike M>
DimensionTrend dimension_trend(const M& space, std::span<const DimensionWindow> windows,
                               std::span<const std::pair<double, double>> grid,
                               const DimensionOptions& options = {}) {
  DimensionTrend trend;
  for (const auto& w : windows) {
    trend.estimates.push_back(estimate_metric_dimension(space, w, grid, options));
    if (trend.estimates.size() > 1) {
      const double prev = trend.estimates[trend.estimates.size() - 2].estimate;
      const double cur = trend.estimates.back().estimate;
      if (cur < prev) trend.nondecreasing = false;
      if (cur > prev) trend.nonincreasing = false;
    }
  }
  return trend;
}

// (D + R - 1)[(1 + s)(2R - 1) - 1] / s. Throws ParameterError unless
// D >= 0, 1 < R < inf and s > 0.
double embedding_dimension_bound(double D, double R, double s);
// Smallest integer strictly above the bound.
std::size_t min_embedding_dimension(double D, double R, double s);

struct EmbeddingOptions {
  std::size_t N = 1;
  double p = 2.0;
  // Defaults to min{1, R - 1} / 2 when R > 1, else 0.1 with a warning.
  std::optional<double> epsilon;
  std::optional<double> R_override;
};

struct Box {
  std::vector<double> centre;
  double radius = 0.0;
  // Box index at the previous level; the root points at itself.
  std::size_t parent = 0;
};

// Boxes of radius r that fit per axis in a box of radius R with gap gamma:
// floor((R + gamma/2) / (r + gamma/2)).
std::size_t boxes_per_axis(double parent_radius, double child_radius, double gamma);
double packing_capacity(double parent_radius, double child_radius, double gamma, std::size_t N);

// `count` boxes of radius child_radius on a grid of pitch 2 child_radius + gamma
// centred in the parent, cells in lexicographic order. The grid side is the
// smallest q with q^N >= count, capped at `max_side`. Throws PackingInfeasible
// when count exceeds max_side^N.
std::vector<Box> pack_boxes(const Box& parent, std::size_t parent_index, double child_radius,
                            double gamma, std::size_t count, std::size_t max_side);

// Transition from rooted level `level` to level + 1.
struct LevelAudit {
  std::size_t level = 0;
  std::size_t required = 0;
  // Boxes per axis that fit, and how many the grid used.
  std::size_t per_axis = 0;
  std::size_t per_axis_used = 0;
  double capacity = 0.0;
  double pitch = 0.0;
  double parent_radius = 0.0;
  double child_radius = 0.0;
  double gamma_next = 0.0;
  double realized_gap = kInfinity;
  bool nested = true;
  bool commutes = true;
  // The parent is a virtual root added in front of the chain; no capacity applies.
  bool free_placement = false;
  bool passes() const {
    return (free_placement || static_cast<double>(required) <= capacity) &&
           realized_gap >= gamma_next * (1.0 - 1e-12) - 1e-12 && nested && commutes;
  }
};

struct EmbeddingResult {
  std::size_t N = 0;
  std::vector<std::vector<double>> coords;
  std::vector<LevelAudit> audit;
  // boxes[l][b] is the box of block b of rooted level l.
  std::vector<std::vector<Box>> boxes;
  PartitionChain chain;
  double p = 2.0;
  double R_est = 0.0;
  double epsilon = 0.1;
  double a = 0.0;
  double log_a = 0.0;
  // Pairs split below this rooted level are reported but not asserted.
  std::size_t burn_in = 0;
  // Fitted against box-norm distances divided by `normalization`.
  HolderFit fitted;
  double normalization = 1.0;
  std::vector<std::string> warnings;

  bool audits_pass() const {
    return std::all_of(audit.begin(), audit.end(), [](const LevelAudit& a) { return a.passes(); });
  }
};

struct EmbeddingSubchain {
  PartitionChain chain;
  // Indices of the kept levels in the input chain.
  std::vector<std::size_t> kept;
};

// Subsequence of a chain fit for embed_chain at dimension N. From each kept
// level the next one is the first later level with δ <= δ^{1+s} whose blocks
// fit the grid, i.e. the required count is within capacity. The last level is
// always kept. s <= 0 drops the δ condition.
EmbeddingSubchain embedding_subchain(const FiniteMetricSpace& space, const PartitionChain& chain,
                                     std::size_t N, double s);

// Throws PackingInfeasible, NotSeparating or NotNested.
EmbeddingResult embed_chain(const FiniteMetricSpace& space, const PartitionChain& chain,
                            const EmbeddingOptions& options);

double box_distance(std::span<const double> x, std::span<const double> y);

struct DistortionOptions {
  std::optional<std::size_t> burn_in;
  bool strict = true;
  // Relative slack on each inequality.
  double tolerance = 1e-9;
};

struct DistortionReport {
  std::size_t pairs = 0;
  std::size_t pairs_asserted = 0;
  std::size_t burn_in = 0;
  double target_exponent = 0.0;
  HolderFit fitted;
  bool box_sandwich_ok = true;
  bool lower_ok = true;
  bool upper_ok = true;
  // Worst ln(lhs / rhs) of each inequality over the asserted pairs.
  double worst_lower = -kInfinity;
  double worst_upper = -kInfinity;
  std::array<std::size_t, 2> worst_lower_pair{0, 0};
  std::array<std::size_t, 2> worst_upper_pair{0, 0};
  // Failures among pairs split before burn_in, reported only.
  std::size_t early_failures = 0;
  bool holds() const { return box_sandwich_ok && lower_ok && upper_ok; }
};

// Throws BoundViolated in strict mode.
DistortionReport verify_embedding_distortion(const FiniteMetricSpace& space,
                                             const EmbeddingResult& result,
                                             const DistortionOptions& options = {});

}  // namespace metriclab
