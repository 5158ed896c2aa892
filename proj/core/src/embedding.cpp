#include "metriclab/embedding.hpp"

#include <algorithm>
#include <numeric>

#include "metriclab/logratio.hpp"
#include "metriclab/ultrametric.hpp"

namespace metriclab {

std::size_t separated_count(const LineSpace& space, std::size_t centre, double r1, double r2) {
  if (!(r2 > 0.0 && r2 < r1)) throw ParameterError("separated_count needs 0 < r2 < r1");
  const auto& x = space.coords();
  std::vector<double> ball;
  for (double v : x) {
    if (std::abs(v - x[centre]) <= r1) ball.push_back(v);
  }
  std::sort(ball.begin(), ball.end());
  std::size_t count = 0;
  double last = -kInfinity;
  for (double v : ball) {
    if (count == 0 || v - last >= r2) {
      ++count;
      last = v;
    }
  }
  return count;
}

std::vector<std::size_t> dimension_centres(std::size_t n, const DimensionOptions& options) {
  if (!options.centres.empty()) {
    for (std::size_t c : options.centres) {
      if (c >= n) throw ParameterError("centre index out of range");
    }
    return options.centres;
  }
  std::vector<std::size_t> out;
  const std::size_t limit = std::max<std::size_t>(options.max_centres, 1);
  if (n <= limit) {
    out.resize(n);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  if (limit == 1) return {0};
  for (std::size_t k = 0; k < limit; ++k) out.push_back(k * (n - 1) / (limit - 1));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double embedding_dimension_bound(double D, double R, double s) {
  if (!(D >= 0.0) || !std::isfinite(D)) throw ParameterError("D must be finite and >= 0");
  if (!(R > 1.0) || !std::isfinite(R)) throw ParameterError("need 1 < R < infinity");
  if (!(s > 0.0) || !std::isfinite(s)) throw ParameterError("s must be positive");
  return (D + R - 1.0) * ((1.0 + s) * (2.0 * R - 1.0) - 1.0) / s;
}

std::size_t min_embedding_dimension(double D, double R, double s) {
  const double bound = embedding_dimension_bound(D, R, s);
  return static_cast<std::size_t>(std::floor(bound)) + 1;
}

double box_distance(std::span<const double> x, std::span<const double> y) {
  double best = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) best = std::max(best, std::abs(x[k] - y[k]));
  return best;
}

namespace {

// Smallest q with q^N >= count.
std::size_t grid_side(std::size_t count, std::size_t N) {
  if (count <= 1) return 1;
  auto q = static_cast<std::size_t>(std::ceil(std::pow(static_cast<double>(count), 1.0 / N)));
  while (q > 1 && std::pow(static_cast<double>(q - 1), static_cast<double>(N)) >=
                      static_cast<double>(count)) {
    --q;
  }
  while (std::pow(static_cast<double>(q), static_cast<double>(N)) < static_cast<double>(count)) {
    ++q;
  }
  return q;
}

std::vector<double> cell_offset(std::size_t cell, std::size_t side, std::size_t N, double pitch) {
  std::vector<double> offset(N, 0.0);
  const double middle = (static_cast<double>(side) - 1.0) / 2.0;
  for (std::size_t k = N; k-- > 0;) {
    const std::size_t digit = cell % side;
    cell /= side;
    offset[k] = (static_cast<double>(digit) - middle) * pitch;
  }
  return offset;
}

}  // namespace

std::size_t boxes_per_axis(double parent_radius, double child_radius, double gamma) {
  return static_cast<std::size_t>(
      std::floor((parent_radius + gamma / 2.0) / (child_radius + gamma / 2.0)));
}

double packing_capacity(double parent_radius, double child_radius, double gamma,
                        std::size_t N) {
  return std::pow(static_cast<double>(boxes_per_axis(parent_radius, child_radius, gamma)),
                  static_cast<double>(N));
}

std::vector<Box> pack_boxes(const Box& parent, std::size_t parent_index, double child_radius,
                            double gamma, std::size_t count, std::size_t max_side) {
  const std::size_t N = parent.centre.size();
  const double capacity = std::pow(static_cast<double>(max_side), static_cast<double>(N));
  if (static_cast<double>(count) > capacity) {
    throw PackingInfeasible(0, static_cast<double>(count), capacity);
  }
  const std::size_t side = std::min(max_side, grid_side(count, N));
  const double pitch = 2.0 * child_radius + gamma;
  std::vector<Box> out(count);
  for (std::size_t c = 0; c < count; ++c) {
    out[c].centre = cell_offset(c, side, N, pitch);
    for (std::size_t k = 0; k < N; ++k) out[c].centre[k] += parent.centre[k];
    out[c].radius = child_radius;
    out[c].parent = parent_index;
  }
  return out;
}

namespace {

// Deepest level of a nested chain whose partition joins i and j.
std::size_t joining_level(const PartitionChain& chain, std::size_t i, std::size_t j) {
  std::size_t lo = 0;
  std::size_t hi = chain.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    if (chain.levels[mid].same_block(i, j)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  return lo;
}

}  // namespace

EmbeddingResult embed_chain(const FiniteMetricSpace& space, const PartitionChain& chain,
                            const EmbeddingOptions& options) {
  if (options.N == 0) throw ParameterError("N must be at least 1");
  if (!(options.p > 1.0)) throw ParameterError("p must exceed 1");
  space.require_representable("embedding");
  const std::size_t n = space.size();
  const std::size_t N = options.N;

  EmbeddingResult out;
  out.N = N;
  out.p = options.p;
  out.chain = with_root(space, chain);
  const bool virtual_root = out.chain.size() != chain.size();
  const auto& levels = out.chain.levels;
  const auto& stats = out.chain.stats;
  const std::size_t L = out.chain.size();
  for (std::size_t l = 0; l < L; ++l) {
    if (levels[l].size() != n) throw DomainError("chain does not match the space");
    if (l > 0 && !levels[l].refines(levels[l - 1])) {
      throw NotNested(l, "a block straddles two blocks of the coarser level");
    }
  }
  for (const auto& block : levels.back().blocks()) {
    if (block.size() > 1) throw NotSeparating(block[0], block[1]);
  }

  out.R_est = options.R_override ? *options.R_override : profile(out.chain).estimate;
  const double R = out.R_est;
  if (options.epsilon) {
    out.epsilon = *options.epsilon;
    if (!(out.epsilon > 0.0)) throw ParameterError("epsilon must be positive");
    if (R > 1.0 && !(out.epsilon < std::min(1.0, R - 1.0))) {
      out.warnings.push_back("epsilon lies outside (0, min{1, R-1})");
    }
  } else if (R > 1.0 && std::isfinite(R)) {
    out.epsilon = std::min(1.0, R - 1.0) / 2.0;
  } else {
    out.epsilon = 0.1;
    out.warnings.push_back("R estimate is not in (1, inf); epsilon defaulted to 0.1");
  }
  if (!(R > 1.0)) out.warnings.push_back("R estimate is not above 1");

  const auto report = classify_chain(out.chain, options.p);
  out.log_a = report.log_p_witness;
  out.a = report.p_witness;
  if (const auto m = find_m_index(out.chain, R, out.epsilon)) {
    out.burn_in = *m;
  } else {
    out.burn_in = L - 1;
    out.warnings.push_back("no level satisfies the ratio sandwich; burn-in set to the last level");
  }

  out.boxes.resize(L);
  out.boxes[0].push_back({std::vector<double>(N, 0.0), stats[0].delta, 0});
  for (std::size_t l = 0; l + 1 < L; ++l) {
    const auto& parent_level = levels[l];
    const auto& child_level = levels[l + 1];
    const double parent_radius = stats[l].delta;
    const double child_radius = stats[l + 1].delta;
    const double gamma = stats[l + 1].gamma;

    std::vector<std::vector<std::size_t>> children(parent_level.block_count());
    for (std::size_t b = 0; b < child_level.block_count(); ++b) {
      children[parent_level.block_of(child_level.blocks()[b].front())].push_back(b);
    }
    LevelAudit audit;
    audit.level = l;
    audit.parent_radius = parent_radius;
    audit.child_radius = child_radius;
    audit.gamma_next = gamma;
    audit.pitch = 2.0 * child_radius + gamma;
    for (const auto& c : children) audit.required = std::max(audit.required, c.size());
    audit.free_placement = virtual_root && l == 0;
    if (audit.free_placement) {
      audit.per_axis_used = grid_side(audit.required, N);
      audit.per_axis = audit.per_axis_used;
      audit.capacity = kInfinity;
      const double extent =
          (static_cast<double>(audit.per_axis_used) * audit.pitch - gamma) / 2.0;
      out.boxes[0][0].radius = std::max(parent_radius, extent);
    } else {
      audit.per_axis = boxes_per_axis(parent_radius, child_radius, gamma);
      audit.capacity = std::pow(static_cast<double>(audit.per_axis), static_cast<double>(N));
      if (static_cast<double>(audit.required) > audit.capacity) {
        throw PackingInfeasible(l + 1, static_cast<double>(audit.required), audit.capacity);
      }
    }

    auto& next = out.boxes[l + 1];
    next.resize(child_level.block_count());
    for (std::size_t pb = 0; pb < children.size(); ++pb) {
      auto packed = pack_boxes(out.boxes[l][pb], pb, child_radius, gamma, children[pb].size(),
                               audit.per_axis);
      audit.per_axis_used =
          std::max(audit.per_axis_used, std::min(audit.per_axis, grid_side(packed.size(), N)));
      for (std::size_t c = 0; c < packed.size(); ++c) next[children[pb][c]] = std::move(packed[c]);
    }

    const double slack = 1e-12 * std::max(1.0, out.boxes[l][0].radius);
    for (std::size_t b = 0; b < next.size(); ++b) {
      const auto& box = next[b];
      const std::size_t parent_block = parent_level.block_of(child_level.blocks()[b].front());
      if (box.parent != parent_block) audit.commutes = false;
      const auto& parent_box = out.boxes[l][box.parent];
      if (box_distance(box.centre, parent_box.centre) + box.radius > parent_box.radius + slack) {
        audit.nested = false;
      }
    }
    for (std::size_t a = 0; a < next.size(); ++a) {
      for (std::size_t b = a + 1; b < next.size(); ++b) {
        const double gap =
            box_distance(next[a].centre, next[b].centre) - next[a].radius - next[b].radius;
        audit.realized_gap = std::min(audit.realized_gap, gap);
      }
    }
    out.audit.push_back(audit);
  }

  out.coords.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.coords[i] = out.boxes[L - 1][levels[L - 1].block_of(i)].centre;
  }

  out.normalization = 2.0 * out.boxes[0][0].radius;
  std::vector<double> image(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      image[i * n + j] = image[j * n + i] =
          box_distance(out.coords[i], out.coords[j]) / out.normalization;
    }
  }
  if (n >= 2) {
    out.fitted = fit_holder_exponents(
        space, FiniteMetricSpace::from_trusted(space.labels(), std::move(image)));
  }
  return out;
}

EmbeddingSubchain embedding_subchain(const FiniteMetricSpace& space, const PartitionChain& chain,
                                     std::size_t N, double s) {
  if (N == 0) throw ParameterError("N must be at least 1");
  const auto rooted = with_root(space, chain);
  const std::size_t offset = rooted.size() - chain.size();
  const std::size_t L = rooted.size();
  const auto& levels = rooted.levels;
  const auto& stats = rooted.stats;

  const auto required = [&](std::size_t c, std::size_t l) {
    std::vector<std::size_t> counts(levels[c].block_count(), 0);
    for (const auto& block : levels[l].blocks()) ++counts[levels[c].block_of(block.front())];
    return *std::max_element(counts.begin(), counts.end());
  };
  const auto fits = [&](std::size_t c, std::size_t l) {
    if (c == 0 && offset == 1) return true;
    const double capacity = packing_capacity(stats[c].delta, stats[l].delta, stats[l].gamma, N);
    return static_cast<double>(required(c, l)) <= capacity;
  };
  const auto decays = [&](std::size_t c, std::size_t l) {
    if (!(s > 0.0) || stats[c].log_delta >= 0.0) return true;
    return stats[l].log_delta <= (1.0 + s) * stats[c].log_delta;
  };

  std::vector<std::size_t> kept{0};
  std::size_t c = 0;
  while (c + 1 < L) {
    std::size_t next = L - 1;
    for (std::size_t l = c + 1; l + 1 < L; ++l) {
      if (decays(c, l) && fits(c, l)) {
        next = l;
        break;
      }
    }
    kept.push_back(next);
    c = next;
  }

  EmbeddingSubchain out;
  for (std::size_t k : kept) {
    if (k < offset) continue;
    out.kept.push_back(k - offset);
    out.chain.levels.push_back(levels[k]);
    out.chain.stats.push_back(stats[k]);
    if (rooted.has_thresholds()) {
      out.chain.thresholds.push_back(rooted.thresholds[k]);
      out.chain.log_thresholds.push_back(rooted.log_thresholds[k]);
    }
  }
  return out;
}

DistortionReport verify_embedding_distortion(const FiniteMetricSpace& space,
                                             const EmbeddingResult& result,
                                             const DistortionOptions& options) {
  const auto& chain = result.chain;
  const std::size_t n = space.size();
  if (result.coords.size() != n) throw DomainError("embedding does not match the space");
  DistortionReport report;
  report.burn_in = options.burn_in ? *options.burn_in : result.burn_in;
  report.fitted = result.fitted;
  const double e = result.R_est + result.epsilon;
  const double p = result.p;
  report.target_exponent = 1.0 / (p * e);
  const double tol = options.tolerance;

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      ++report.pairs;
      const std::size_t level = joining_level(chain, i, j);
      const double image = box_distance(result.coords[i], result.coords[j]);
      const double gamma = chain.stats[level + 1].gamma;
      const double outer = 2.0 * chain.stats[level].delta;
      if (image < gamma * (1.0 - tol) || image > outer * (1.0 + tol)) {
        report.box_sandwich_ok = false;
        if (options.strict) {
          throw BoundViolated("box-norm sandwich gamma <= |f(x)-f(y)| <= 2 delta", i, j,
                              level + 1, image < gamma ? gamma - image : image - outer);
        }
      }

      const double ld = space.log_distance(i, j);
      const double li = std::log(image);
      const double lower = e * result.log_a + p * e * ld - li;
      const double upper = li - (std::log(2.0) - result.log_a / p + ld / (p * e));
      const bool fails = lower > tol || upper > tol;
      if (level < report.burn_in) {
        if (fails) ++report.early_failures;
        continue;
      }
      ++report.pairs_asserted;
      if (lower > report.worst_lower) {
        report.worst_lower = lower;
        report.worst_lower_pair = {i, j};
      }
      if (upper > report.worst_upper) {
        report.worst_upper = upper;
        report.worst_upper_pair = {i, j};
      }
      if (lower > tol) {
        report.lower_ok = false;
        if (options.strict) {
          throw BoundViolated("lower distortion bound", i, j, level + 1, lower);
        }
      }
      if (upper > tol) {
        report.upper_ok = false;
        if (options.strict) {
          throw BoundViolated("upper distortion bound", i, j, level + 1, upper);
        }
      }
    }
  }
  return report;
}

}  // namespace metriclab
