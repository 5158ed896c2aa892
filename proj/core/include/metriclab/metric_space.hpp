#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "metriclab/errors.hpp"

namespace metriclab {

inline constexpr double kDefaultTolerance = 1e-12;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// log(exp(a) - exp(b)) for a >= b, accurate when the two are close or far apart.
inline double log_diff(double log_a, double log_b) {
  if (log_b == -kInfinity) return log_a;
  return log_a + std::log1p(-std::exp(log_b - log_a));
}

// log(exp(a) + exp(b)).
inline double log_add(double log_a, double log_b) {
  if (log_a < log_b) std::swap(log_a, log_b);
  if (log_b == -kInfinity) return log_a;
  return log_a + std::log1p(std::exp(log_b - log_a));
}

// Anything with a point count and a pairwise distance.
template <class M>
concept MetricLike = requires(const M& m, std::size_t i) {
  { m.size() } -> std::convertible_to<std::size_t>;
  { m.distance(i, i) } -> std::convertible_to<double>;
};

// Points of the real line under |x - y|. Used for large implicit samples whose
// full matrix would not fit in memory.
class LineSpace {
 public:
  LineSpace() = default;
  explicit LineSpace(std::vector<double> coords) : coords_(std::move(coords)) {}

  std::size_t size() const { return coords_.size(); }
  double distance(std::size_t i, std::size_t j) const {
    return std::abs(coords_[i] - coords_[j]);
  }
  const std::vector<double>& coords() const { return coords_; }

 private:
  std::vector<double> coords_;
};

// A finite metric space with a dense distance matrix, diameter <= 1.
//
// Spaces are either value-backed (the usual case) or log-backed. Log-backed
// spaces keep ln d(i, j) as the authoritative value and carry exp() of it for
// value-based consumers; they exist for closed-form samples whose distances
// fall below the smallest double. Order-based code goes through order_key(),
// which compares consistently for both.
class FiniteMetricSpace {
 public:
  FiniteMetricSpace() = default;

  // No validation; callers guarantee the metric axioms. Used by constructions
  // that are metrics by design (products, hyperspaces, ultrametrics).
  static FiniteMetricSpace from_trusted(std::vector<std::string> labels,
                                        std::vector<double> row_major);
  static FiniteMetricSpace from_trusted_log(std::vector<std::string> labels,
                                            std::vector<double> log_row_major);

  std::size_t size() const { return n_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(std::size_t i) const { return labels_[i]; }

  double distance(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }
  double log_distance(std::size_t i, std::size_t j) const {
    return log_backed_ ? log_dist_[i * n_ + j] : std::log(dist_[i * n_ + j]);
  }
  std::span<const double> row(std::size_t i) const {
    return {dist_.data() + i * n_, n_};
  }
  const std::vector<double>& matrix() const { return dist_; }
  const std::vector<double>& log_matrix() const { return log_dist_; }

  // Monotone surrogate of the distance: ln d for log-backed spaces, d otherwise.
  double order_key(std::size_t i, std::size_t j) const {
    return log_backed_ ? log_dist_[i * n_ + j] : dist_[i * n_ + j];
  }
  double key_of_value(double value) const { return log_backed_ ? std::log(value) : value; }
  double key_of_log(double log_value) const {
    return log_backed_ ? log_value : std::exp(log_value);
  }
  double value_of_key(double key) const { return log_backed_ ? std::exp(key) : key; }
  double log_of_key(double key) const { return log_backed_ ? key : std::log(key); }

  double diameter() const { return diameter_; }
  double log_diameter() const { return log_diameter_; }

  bool log_backed() const { return log_backed_; }
  // Some off-diagonal distance is below the smallest normal double.
  bool has_underflow() const { return underflow_; }
  void require_representable(const char* operation) const;

  bool rescaled() const { return rescale_factor_ != 1.0; }
  double rescale_factor() const { return rescale_factor_; }
  void set_rescale_factor(double factor) { rescale_factor_ = factor; }

  FiniteMetricSpace subspace(std::span<const std::size_t> indices) const;

  bool operator==(const FiniteMetricSpace& other) const;

 private:
  void finish();

  std::size_t n_ = 0;
  std::vector<std::string> labels_;
  std::vector<double> dist_;
  std::vector<double> log_dist_;
  bool log_backed_ = false;
  bool underflow_ = false;
  double diameter_ = 0.0;
  double log_diameter_ = -kInfinity;
  double rescale_factor_ = 1.0;
};

enum class ViolationKind {
  kNotSquare,
  kNonFinite,
  kNegative,
  kNonzeroDiagonal,
  kAsymmetric,
  kDuplicatePoint,
  kTriangle,
  kDiameterExceedsOne,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  // Pair (i, j) or triple (i, j, k) meaning d(i, j) > d(i, k) + d(k, j).
  std::array<std::size_t, 3> witness{0, 0, 0};
  std::size_t arity = 0;
  double amount = 0.0;

  std::string describe() const;
};

class MetricViolation : public DomainError {
 public:
  explicit MetricViolation(std::vector<Violation> violations);

  const std::vector<Violation>& violations() const noexcept { return violations_; }
  const Violation& first() const noexcept { return violations_.front(); }

 private:
  std::vector<Violation> violations_;
};

struct ValidateOptions {
  double tolerance = kDefaultTolerance;
  // Divide by the diameter instead of rejecting diameter > 1.
  bool rescale = false;
  // Stop scanning after this many violations.
  std::size_t max_violations = 16;
};

using Matrix = std::vector<std::vector<double>>;

std::vector<Violation> find_violations(const Matrix& matrix,
                                       const ValidateOptions& options = {});

// Throws MetricViolation listing what failed. Empty labels default to "0", "1", ...
FiniteMetricSpace validate(const Matrix& matrix, std::vector<std::string> labels = {},
                           const ValidateOptions& options = {});

// Same checks for a matrix of natural-log distances (diagonal -inf). The
// triangle inequality is tested scale-free: relative tolerance on each triple.
FiniteMetricSpace validate_log(const Matrix& log_matrix,
                               std::vector<std::string> labels = {},
                               const ValidateOptions& options = {});

std::vector<std::string> default_labels(std::size_t n);

FiniteMetricSpace snowflake(const FiniteMetricSpace& space, double s);

// Cartesian product under the sup metric. Point order is lexicographic in the
// factor indices, last factor fastest.
FiniteMetricSpace sup_product(std::span<const FiniteMetricSpace> spaces,
                              std::size_t max_points = 4096);

// Factor coordinates of a product point index.
std::vector<std::size_t> product_coordinates(std::span<const FiniteMetricSpace> spaces,
                                             std::size_t index);

struct UltrametricCheck {
  bool ok = true;
  // max over triples of d(i, j) - max{d(i, k), d(j, k)} (log scale for
  // log-backed spaces); <= 0 for ultrametrics.
  double worst_violation = 0.0;
  // (i, j, k) realizing the worst violation.
  std::array<std::size_t, 3> witness{0, 0, 0};
};

UltrametricCheck is_ultrametric(const FiniteMetricSpace& space,
                                double tolerance = kDefaultTolerance);

struct HyperspacePoint {
  std::vector<std::size_t> members;
};

struct Hyperspace {
  FiniteMetricSpace space;
  std::vector<HyperspacePoint> points;
};

inline constexpr std::size_t kDefaultHyperspaceCap = 5000;

// All nonempty subsets of size <= max_subset_size under the Hausdorff metric,
// ordered by size then lexicographically.
Hyperspace hausdorff_hyperspace(const FiniteMetricSpace& space, std::size_t max_subset_size,
                                std::size_t cap = kDefaultHyperspaceCap);

double hausdorff_distance(const FiniteMetricSpace& space, std::span<const std::size_t> a,
                          std::span<const std::size_t> b);

// Exponents and constants of c1 d1^t <= d2 <= c2 d1^s over all pairs.
struct HolderFit {
  double s = 1.0;
  double t = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  std::size_t pairs_used = 0;
};

struct LipschitzReport {
  double constant = 0.0;
  std::array<std::size_t, 2> worst_pair{0, 0};
};

// Smallest L with to(i, j) <= L * from(i, j) over all pairs.
template <MetricLike From, MetricLike To>
LipschitzReport lipschitz_constant(const From& from, const To& to) {
  LipschitzReport report;
  const std::size_t n = from.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double ratio = to.distance(i, j) / from.distance(i, j);
      if (ratio > report.constant) {
        report.constant = ratio;
        report.worst_pair = {i, j};
      }
    }
  }
  return report;
}

// Reads METRICLAB_MAX_POINTS; defaults to 4096.
std::size_t max_points();

}  // namespace metriclab
