#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metriclab/metric_space.hpp"
#include "metriclab/partition.hpp"

namespace metriclab {

enum class FamilyKind {
  kSeqFactorial,
  kSeqPowerTower,
  kSeqGeometric,
  kSeqPolynomial,
  kSeqLog,
  kProductGeometric,
  kCantorFactorial,
  kSqrtUltra,
};

const char* to_string(FamilyKind kind);
std::optional<FamilyKind> parse_family_kind(std::string_view name);
std::vector<FamilyKind> all_family_kinds();

// Exact level values of a family chain. n counts from 1.
struct FormulaLevel {
  std::size_t n = 0;
  double delta = 0.0;
  double gamma = 0.0;
  double log_delta = -kInfinity;
  double log_gamma = -kInfinity;
  double R = 0.0;
  std::size_t cardinality = 0;
};

// Sampling above this depth throws DepthOverflow for the factorial kinds.
inline constexpr std::size_t kFactorialSampleDepth = 8;

class AnalyticFamily {
 public:
  FamilyKind kind() const { return kind_; }
  // s for power tower and polynomial, t for product, r for cantor; NaN otherwise.
  double param() const { return param_; }
  // First radius r_1 for product_geometric.
  double base() const { return base_; }
  double exact_R() const { return exact_R_; }
  std::string name() const;

  bool is_sequence() const;
  // r_{n-1} - r_n <= r_n + r_{n+1} for 2 <= n <= checked depth.
  bool standing_hypothesis() const { return standing_hypothesis_; }
  std::optional<std::size_t> standing_hypothesis_failure() const { return hypothesis_failure_; }

  // ln r_n. Throws DepthOverflow when it is not finite in double precision.
  double log_r(std::size_t n) const;
  double r(std::size_t n) const { return std::exp(log_r(n)); }
  // ln(r_{n-1} - r_n), n >= 2.
  double log_step(std::size_t n) const;

  // Chain level n of the infinite space.
  FormulaLevel level(std::size_t n) const;
  // The all-singleton level closing a sample of the given depth.
  FormulaLevel terminal_level(std::size_t depth) const;
  // Levels 1..depth followed by terminal_level(depth).
  std::vector<FormulaLevel> levels(std::size_t depth) const;

  // Points of a sample of this depth.
  std::size_t sample_size(std::size_t depth) const;

 private:
  friend AnalyticFamily make_family(FamilyKind kind, double param, double base);
  void check_standing_hypothesis();

  FamilyKind kind_ = FamilyKind::kSeqGeometric;
  double param_ = 0.0;
  double base_ = 0.5;
  double exact_R_ = 1.0;
  bool standing_hypothesis_ = true;
  std::optional<std::size_t> hypothesis_failure_;
};

inline constexpr std::size_t kStandingHypothesisDepth = 64;

// Throws ParameterError outside s in (0,1) for the power tower, s > 1 for
// the polynomial, t in (0,1) and 0 < base < 1 for the product, r in (0,1)
// for cantor.
AnalyticFamily make_family(FamilyKind kind, double param = 0.0, double base = 0.5);

// A family whose exact R equals s, for s in [0, inf].
AnalyticFamily family_for_R(double s);

struct ZooSample {
  FiniteMetricSpace space;
  PartitionChain chain;
  // The family's formulas for every chain level.
  std::vector<FormulaLevel> formulas;
};

// Sequence families: r_1..r_m then 0, with the chain
// {X \ {r_1..r_{n-1}}, {r_1}, ..., {r_{n-1}}} for n = 1..m and a final
// all-singleton level. sqrt_ultra: 1, 1/2, ..., 1/m then 0 under
// max{sqrt x, sqrt y}, same chain. Product and cantor: binary words under the
// first-difference ultrametric, chain of closed balls then singletons.
// Spaces whose values would underflow are log-backed.
ZooSample sample(const AnalyticFamily& family, std::size_t depth);

// Sequence level n over m + 1 points laid out as in sample().
Partition sequence_partition(std::size_t depth, std::size_t n);

// Coordinates of a sequence or sqrt_ultra sample, for samples too large for a
// dense matrix. Throws DepthOverflow if some r_n underflows.
std::vector<double> sample_coordinates(const AnalyticFamily& family, std::size_t depth);

// {x_1, ..., x_m, 0} with d(x, y) = max{sqrt x, sqrt y} for x != y.
class SqrtUltraSpace {
 public:
  explicit SqrtUltraSpace(std::vector<double> coords);

  std::size_t size() const { return coords_.size(); }
  double distance(std::size_t i, std::size_t j) const {
    return i == j ? 0.0 : std::max(roots_[i], roots_[j]);
  }
  const std::vector<double>& coords() const { return coords_; }

 private:
  std::vector<double> coords_;
  std::vector<double> roots_;
};

}  // namespace metriclab
