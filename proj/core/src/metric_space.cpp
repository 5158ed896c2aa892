#include "metriclab/metric_space.hpp"

#include <cfloat>
#include <charconv>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace metriclab {

namespace {

const double kLogMinNormal = std::log(DBL_MIN);

std::size_t checked_square(std::size_t n, const char* what) {
  const std::size_t cap = max_points();
  if (n > cap) throw CapExceeded(what, n, cap);
  return n;
}

}  // namespace

std::size_t max_points() {
  if (const char* env = std::getenv("METRICLAB_MAX_POINTS")) {
    std::size_t value = 0;
    const char* end = env + std::char_traits<char>::length(env);
    auto [ptr, ec] = std::from_chars(env, end, value);
    if (ec == std::errc() && ptr == end && value > 0) return value;
  }
  return 4096;
}

std::vector<std::string> default_labels(std::size_t n) {
  std::vector<std::string> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = std::to_string(i);
  return labels;
}

FiniteMetricSpace FiniteMetricSpace::from_trusted(std::vector<std::string> labels,
                                                  std::vector<double> row_major) {
  FiniteMetricSpace space;
  space.n_ = labels.size();
  if (row_major.size() != space.n_ * space.n_) {
    throw DomainError("distance matrix size does not match label count");
  }
  space.labels_ = std::move(labels);
  space.dist_ = std::move(row_major);
  space.finish();
  return space;
}

FiniteMetricSpace FiniteMetricSpace::from_trusted_log(std::vector<std::string> labels,
                                                      std::vector<double> log_row_major) {
  FiniteMetricSpace space;
  space.n_ = labels.size();
  if (log_row_major.size() != space.n_ * space.n_) {
    throw DomainError("log-distance matrix size does not match label count");
  }
  space.labels_ = std::move(labels);
  space.log_dist_ = std::move(log_row_major);
  space.log_backed_ = true;
  space.finish();
  return space;
}

void FiniteMetricSpace::finish() {
  const std::size_t n = n_;
  if (log_backed_) {
    dist_.assign(n * n, 0.0);
    log_diameter_ = -kInfinity;
    for (std::size_t i = 0; i < n; ++i) {
      log_dist_[i * n + i] = -kInfinity;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double l = log_dist_[i * n + j];
        dist_[i * n + j] = std::exp(l);
        log_diameter_ = std::max(log_diameter_, l);
        if (l < kLogMinNormal) underflow_ = true;
      }
    }
    diameter_ = std::exp(log_diameter_);
  } else {
    diameter_ = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double d = dist_[i * n + j];
        diameter_ = std::max(diameter_, d);
        if (d < DBL_MIN) underflow_ = true;
      }
    }
    log_diameter_ = diameter_ > 0.0 ? std::log(diameter_) : -kInfinity;
  }
}

void FiniteMetricSpace::require_representable(const char* operation) const {
  if (underflow_) {
    throw DomainError(std::string(operation) +
                      " needs distances representable as doubles; this space has "
                      "entries below the smallest normal double");
  }
}

FiniteMetricSpace FiniteMetricSpace::subspace(std::span<const std::size_t> indices) const {
  const std::size_t m = indices.size();
  std::vector<std::string> labels;
  labels.reserve(m);
  for (std::size_t i : indices) labels.push_back(labels_.at(i));
  std::vector<double> values(m * m);
  const auto& source = log_backed_ ? log_dist_ : dist_;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      values[a * m + b] = source[indices[a] * n_ + indices[b]];
    }
  }
  FiniteMetricSpace sub = log_backed_ ? from_trusted_log(std::move(labels), std::move(values))
                                      : from_trusted(std::move(labels), std::move(values));
  sub.set_rescale_factor(rescale_factor_);
  return sub;
}

bool FiniteMetricSpace::operator==(const FiniteMetricSpace& other) const {
  return n_ == other.n_ && labels_ == other.labels_ && log_backed_ == other.log_backed_ &&
         (log_backed_ ? log_dist_ == other.log_dist_ : dist_ == other.dist_);
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kNotSquare: return "not_square";
    case ViolationKind::kNonFinite: return "non_finite";
    case ViolationKind::kNegative: return "negative";
    case ViolationKind::kNonzeroDiagonal: return "nonzero_diagonal";
    case ViolationKind::kAsymmetric: return "asymmetric";
    case ViolationKind::kDuplicatePoint: return "duplicate_point";
    case ViolationKind::kTriangle: return "triangle";
    case ViolationKind::kDiameterExceedsOne: return "diameter_exceeds_one";
  }
  return "unknown";
}

std::string Violation::describe() const {
  std::ostringstream out;
  out << to_string(kind);
  if (arity > 0) {
    out << " at (";
    for (std::size_t a = 0; a < arity; ++a) out << (a ? ", " : "") << witness[a];
    out << ")";
  }
  if (amount != 0.0) out << " by " << amount;
  return out.str();
}

MetricViolation::MetricViolation(std::vector<Violation> violations)
    : DomainError("metric violation: " +
                  (violations.empty() ? std::string("unknown") : violations.front().describe()) +
                  (violations.size() > 1
                       ? " (+" + std::to_string(violations.size() - 1) + " more)"
                       : std::string())),
      violations_(std::move(violations)) {}

namespace {

// Shared scan for value and log matrices. `log_scale` switches the meaning of
// entries, the diagonal convention and the triangle test.
std::vector<Violation> scan(const Matrix& m, const ValidateOptions& options, bool log_scale) {
  std::vector<Violation> out;
  const auto full = [&] { return out.size() >= options.max_violations; };
  const std::size_t n = m.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (m[i].size() != n) {
      out.push_back({ViolationKind::kNotSquare, {i, 0, 0}, 1, 0.0});
      return out;
    }
  }
  const double zero = log_scale ? -kInfinity : 0.0;
  for (std::size_t i = 0; i < n && !full(); ++i) {
    for (std::size_t j = 0; j < n && !full(); ++j) {
      const double v = m[i][j];
      if (i == j) {
        if (v != zero) out.push_back({ViolationKind::kNonzeroDiagonal, {i, i, 0}, 2, v});
        continue;
      }
      if (std::isnan(v) || (log_scale ? std::isinf(v) && v > 0 : !std::isfinite(v))) {
        out.push_back({ViolationKind::kNonFinite, {i, j, 0}, 2, 0.0});
      } else if (!log_scale && v < 0.0) {
        out.push_back({ViolationKind::kNegative, {i, j, 0}, 2, v});
      } else if (v == zero) {
        if (i < j) out.push_back({ViolationKind::kDuplicatePoint, {i, j, 0}, 2, 0.0});
      } else if (i < j && std::abs(v - m[j][i]) > options.tolerance) {
        out.push_back({ViolationKind::kAsymmetric, {i, j, 0}, 2, v - m[j][i]});
      }
    }
  }
  if (!out.empty()) return out;

  for (std::size_t i = 0; i < n && !full(); ++i) {
    for (std::size_t j = i + 1; j < n && !full(); ++j) {
      const double dij = m[i][j];
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        double excess;
        if (log_scale) {
          // Relative excess: d(i,j) / (d(i,k) + d(k,j)) - 1.
          excess = std::expm1(dij - log_add(m[i][k], m[k][j]));
        } else {
          excess = dij - (m[i][k] + m[k][j]);
        }
        if (excess > options.tolerance) {
          out.push_back({ViolationKind::kTriangle, {i, j, k}, 3, excess});
          break;
        }
      }
    }
  }
  if (!out.empty() || options.rescale) return out;

  double diameter = zero;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) diameter = std::max(diameter, m[i][j]);
  }
  if (diameter > (log_scale ? 0.0 : 1.0)) {
    out.push_back({ViolationKind::kDiameterExceedsOne, {0, 0, 0}, 0,
                   log_scale ? std::exp(diameter) : diameter});
  }
  return out;
}

std::vector<std::string> resolve_labels(std::vector<std::string> labels, std::size_t n) {
  if (labels.empty()) return default_labels(n);
  if (labels.size() != n) {
    throw DomainError("expected " + std::to_string(n) + " labels, got " +
                      std::to_string(labels.size()));
  }
  return labels;
}

}  // namespace

std::vector<Violation> find_violations(const Matrix& matrix, const ValidateOptions& options) {
  return scan(matrix, options, false);
}

FiniteMetricSpace validate(const Matrix& matrix, std::vector<std::string> labels,
                           const ValidateOptions& options) {
  const std::size_t n = checked_square(matrix.size(), "distance matrix rows");
  labels = resolve_labels(std::move(labels), n);
  auto violations = scan(matrix, options, false);
  if (!violations.empty()) throw MetricViolation(std::move(violations));

  // Symmetrize from the upper triangle so storage is exactly symmetric.
  std::vector<double> values(n * n, 0.0);
  double diameter = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      values[i * n + j] = values[j * n + i] = matrix[i][j];
      diameter = std::max(diameter, matrix[i][j]);
    }
  }
  double factor = 1.0;
  if (options.rescale && diameter > 1.0) {
    factor = diameter;
    for (double& v : values) v /= diameter;
  }
  auto space = FiniteMetricSpace::from_trusted(std::move(labels), std::move(values));
  if (factor != 1.0) space.set_rescale_factor(factor);
  return space;
}

FiniteMetricSpace validate_log(const Matrix& log_matrix, std::vector<std::string> labels,
                               const ValidateOptions& options) {
  const std::size_t n = checked_square(log_matrix.size(), "distance matrix rows");
  labels = resolve_labels(std::move(labels), n);
  auto violations = scan(log_matrix, options, true);
  if (!violations.empty()) throw MetricViolation(std::move(violations));

  std::vector<double> values(n * n, -kInfinity);
  double log_diameter = -kInfinity;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      values[i * n + j] = values[j * n + i] = log_matrix[i][j];
      log_diameter = std::max(log_diameter, log_matrix[i][j]);
    }
  }
  double factor = 1.0;
  if (options.rescale && log_diameter > 0.0) {
    factor = std::exp(log_diameter);
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (k / n != k % n) values[k] -= log_diameter;
    }
  }
  auto space = FiniteMetricSpace::from_trusted_log(std::move(labels), std::move(values));
  if (factor != 1.0) space.set_rescale_factor(factor);
  return space;
}

FiniteMetricSpace snowflake(const FiniteMetricSpace& space, double s) {
  if (!(s > 0.0 && s <= 1.0)) {
    throw ParameterError("snowflake exponent must lie in (0, 1], got " + std::to_string(s));
  }
  if (s == 1.0) return space;
  const std::size_t n = space.size();
  std::vector<double> values(n * n);
  FiniteMetricSpace out;
  if (space.log_backed()) {
    for (std::size_t k = 0; k < values.size(); ++k) values[k] = s * space.log_matrix()[k];
    out = FiniteMetricSpace::from_trusted_log(space.labels(), std::move(values));
  } else {
    for (std::size_t k = 0; k < values.size(); ++k) values[k] = std::pow(space.matrix()[k], s);
    out = FiniteMetricSpace::from_trusted(space.labels(), std::move(values));
  }
  out.set_rescale_factor(space.rescale_factor());
  return out;
}

std::vector<std::size_t> product_coordinates(std::span<const FiniteMetricSpace> spaces,
                                             std::size_t index) {
  std::vector<std::size_t> coords(spaces.size());
  for (std::size_t f = spaces.size(); f-- > 0;) {
    coords[f] = index % spaces[f].size();
    index /= spaces[f].size();
  }
  return coords;
}

FiniteMetricSpace sup_product(std::span<const FiniteMetricSpace> spaces,
                              std::size_t max_points) {
  if (spaces.empty()) throw ParameterError("sup_product needs at least one factor");
  std::size_t total = 1;
  bool any_log = false;
  for (const auto& f : spaces) {
    if (f.size() == 0) throw ParameterError("sup_product factor is empty");
    if (total > max_points / f.size()) {
      throw CapExceeded("sup_product cardinality", total * f.size(), max_points);
    }
    total *= f.size();
    any_log = any_log || f.log_backed();
  }

  std::vector<std::vector<std::size_t>> coords(total);
  std::vector<std::string> labels(total);
  for (std::size_t p = 0; p < total; ++p) {
    coords[p] = product_coordinates(spaces, p);
    std::string label = "(";
    for (std::size_t f = 0; f < spaces.size(); ++f) {
      if (f) label += ",";
      label += spaces[f].label(coords[p][f]);
    }
    labels[p] = label + ")";
  }

  std::vector<double> values(total * total, any_log ? -kInfinity : 0.0);
  for (std::size_t p = 0; p < total; ++p) {
    for (std::size_t q = p + 1; q < total; ++q) {
      double best = any_log ? -kInfinity : 0.0;
      for (std::size_t f = 0; f < spaces.size(); ++f) {
        const auto a = coords[p][f];
        const auto b = coords[q][f];
        if (a == b) continue;
        const double v = any_log ? spaces[f].log_distance(a, b) : spaces[f].distance(a, b);
        best = std::max(best, v);
      }
      values[p * total + q] = values[q * total + p] = best;
    }
  }
  return any_log ? FiniteMetricSpace::from_trusted_log(std::move(labels), std::move(values))
                 : FiniteMetricSpace::from_trusted(std::move(labels), std::move(values));
}

UltrametricCheck is_ultrametric(const FiniteMetricSpace& space, double tolerance) {
  UltrametricCheck check;
  const std::size_t n = space.size();
  if (n < 3) return check;
  check.worst_violation = -kInfinity;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dij = space.order_key(i, j);
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        const double excess = dij - std::max(space.order_key(i, k), space.order_key(j, k));
        if (excess > check.worst_violation) {
          check.worst_violation = excess;
          check.witness = {i, j, k};
        }
      }
    }
  }
  check.ok = check.worst_violation <= tolerance;
  return check;
}

namespace {

double hausdorff_key(const FiniteMetricSpace& space, std::span<const std::size_t> a,
                     std::span<const std::size_t> b) {
  const auto directed = [&](std::span<const std::size_t> from, std::span<const std::size_t> to) {
    double sup = -kInfinity;
    for (std::size_t x : from) {
      double inf = kInfinity;
      for (std::size_t y : to) {
        inf = std::min(inf, x == y ? space.key_of_value(0.0) : space.order_key(x, y));
      }
      sup = std::max(sup, inf);
    }
    return sup;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace

double hausdorff_distance(const FiniteMetricSpace& space, std::span<const std::size_t> a,
                          std::span<const std::size_t> b) {
  return space.value_of_key(hausdorff_key(space, a, b));
}

Hyperspace hausdorff_hyperspace(const FiniteMetricSpace& space, std::size_t max_subset_size,
                                std::size_t cap) {
  const std::size_t n = space.size();
  if (max_subset_size == 0) throw ParameterError("max_subset_size must be at least 1");
  max_subset_size = std::min(max_subset_size, n);

  // Count first so the cap fails before any allocation.
  std::size_t count = 0;
  std::size_t binom = 1;
  for (std::size_t k = 1; k <= max_subset_size; ++k) {
    binom = binom * (n - k + 1) / k;
    count += binom;
    if (count > cap) throw CapExceeded("hyperspace subsets", count, cap);
  }

  Hyperspace out;
  out.points.reserve(count);
  for (std::size_t k = 1; k <= max_subset_size; ++k) {
    std::vector<std::size_t> combo(k);
    std::iota(combo.begin(), combo.end(), 0);
    while (true) {
      out.points.push_back({combo});
      std::size_t pos = k;
      while (pos > 0 && combo[pos - 1] == n - k + pos - 1) --pos;
      if (pos == 0) break;
      ++combo[pos - 1];
      for (std::size_t q = pos; q < k; ++q) combo[q] = combo[q - 1] + 1;
    }
  }

  std::vector<std::string> labels(count);
  for (std::size_t p = 0; p < count; ++p) {
    std::string label = "{";
    for (std::size_t a = 0; a < out.points[p].members.size(); ++a) {
      if (a) label += ",";
      label += space.label(out.points[p].members[a]);
    }
    labels[p] = label + "}";
  }

  std::vector<double> keys(count * count, space.key_of_value(0.0));
  for (std::size_t p = 0; p < count; ++p) {
    for (std::size_t q = p + 1; q < count; ++q) {
      keys[p * count + q] = keys[q * count + p] =
          hausdorff_key(space, out.points[p].members, out.points[q].members);
    }
  }
  if (space.log_backed()) {
    for (std::size_t p = 0; p < count; ++p) keys[p * count + p] = -kInfinity;
    out.space = FiniteMetricSpace::from_trusted_log(std::move(labels), std::move(keys));
  } else {
    out.space = FiniteMetricSpace::from_trusted(std::move(labels), std::move(keys));
  }
  return out;
}

}  // namespace metriclab
