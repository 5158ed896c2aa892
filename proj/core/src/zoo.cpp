#include "metriclab/zoo.hpp"

#include <bit>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numbers>

#include "linkage.hpp"

namespace metriclab {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr std::size_t kMaxSequenceSampleDepth = 1024;

struct KindName {
  FamilyKind kind;
  const char* name;
};

constexpr KindName kNames[] = {
    {FamilyKind::kSeqFactorial, "seq_factorial"},
    {FamilyKind::kSeqPowerTower, "seq_power_tower"},
    {FamilyKind::kSeqGeometric, "seq_geometric"},
    {FamilyKind::kSeqPolynomial, "seq_polynomial"},
    {FamilyKind::kSeqLog, "seq_log"},
    {FamilyKind::kProductGeometric, "product_geometric"},
    {FamilyKind::kCantorFactorial, "cantor_factorial"},
    {FamilyKind::kSqrtUltra, "sqrt_ultra"},
};

double factorial(std::size_t n) {
  if (n > 170) throw DepthOverflow("n! overflows a double for n = " + std::to_string(n));
  double f = 1.0;
  for (std::size_t k = 2; k <= n; ++k) f *= static_cast<double>(k);
  return f;
}

double checked(double log_value, std::size_t n) {
  if (!std::isfinite(log_value)) {
    throw DepthOverflow("ln r_" + std::to_string(n) + " is not finite in double precision");
  }
  return log_value;
}

FormulaLevel make_level(std::size_t n, double log_delta, double log_gamma,
                        std::size_t cardinality) {
  FormulaLevel level;
  level.n = n;
  level.log_delta = log_delta;
  level.log_gamma = log_gamma;
  level.delta = std::exp(log_delta);
  level.gamma = std::exp(log_gamma);
  level.R = log_ratio_from_logs(log_delta, log_gamma);
  level.cardinality = cardinality;
  return level;
}

std::size_t pow2(std::size_t k) {
  if (k >= 63) throw DepthOverflow("2^" + std::to_string(k) + " points");
  return std::size_t{1} << k;
}

// Binary words of length k in lexicographic order.
std::vector<std::string> word_labels(std::size_t k) {
  const std::size_t n = pow2(k);
  std::vector<std::string> labels(n, std::string(k, '0'));
  for (std::size_t w = 0; w < n; ++w) {
    for (std::size_t b = 0; b < k; ++b) {
      if ((w >> (k - 1 - b)) & 1u) labels[w][b] = '1';
    }
  }
  return labels;
}

std::size_t common_prefix(std::size_t a, std::size_t b, std::size_t k) {
  return a == b ? k : k - static_cast<std::size_t>(std::bit_width(a ^ b));
}

Partition prefix_partition(std::size_t k, std::size_t prefix) {
  const std::size_t n = pow2(k);
  std::vector<std::size_t> labels(n);
  for (std::size_t w = 0; w < n; ++w) labels[w] = w >> (k - prefix);
  return Partition::from_labels(labels);
}

FiniteMetricSpace from_logs(std::vector<std::string> labels, std::vector<double> logs) {
  const double floor = std::log(DBL_MIN);
  const std::size_t n = labels.size();
  bool tiny = false;
  for (std::size_t i = 0; i < n && !tiny; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (logs[i * n + j] < floor) {
        tiny = true;
        break;
      }
    }
  }
  if (tiny) return FiniteMetricSpace::from_trusted_log(std::move(labels), std::move(logs));
  std::vector<double> values(logs.size());
  for (std::size_t k = 0; k < logs.size(); ++k) values[k] = std::exp(logs[k]);
  return FiniteMetricSpace::from_trusted(std::move(labels), std::move(values));
}

// Chain whose level n (1-based) keeps points n-1.. together and splits off
// points 0..n-2 as singletons, then the all-singleton level. Stats come from
// the matrix in O(m^2) overall.
PartitionChain peel_chain(const FiniteMetricSpace& space, std::size_t depth) {
  const std::size_t n = space.size();
  const double floor_key = space.key_of_value(0.0);
  PartitionChain chain;
  chain.levels.reserve(depth + 1);
  chain.stats.reserve(depth + 1);

  // diam_tail[k] = diameter of points k..n-1.
  std::vector<double> diam_tail(n + 1, floor_key);
  for (std::size_t k = n - 1; k-- > 0;) {
    double d = diam_tail[k + 1];
    for (std::size_t y = k + 1; y < n; ++y) d = std::max(d, space.order_key(k, y));
    diam_tail[k] = d;
  }

  // to_split[y] = min key from y to the points already split off.
  std::vector<double> to_split(n, kInfinity);
  double among_split = kInfinity;
  const double diameter_key = diam_tail[0];
  for (std::size_t level = 1; level <= depth; ++level) {
    const std::size_t split = level - 1;
    if (split > 0) {
      const std::size_t s = split - 1;
      for (std::size_t k = 0; k < s; ++k)
        among_split = std::min(among_split, space.order_key(k, s));
      for (std::size_t y = split; y < n; ++y)
        to_split[y] = std::min(to_split[y], space.order_key(s, y));
    }
    double gamma = among_split;
    for (std::size_t y = split; y < n; ++y) gamma = std::min(gamma, to_split[y]);
    if (split == 0) gamma = diameter_key;
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = i < split ? i + 1 : 0;
    chain.levels.push_back(Partition::from_labels(labels));
    chain.stats.push_back(detail::stats_from_keys(space, diam_tail[split], gamma, split + 1));
  }
  double gamma = kInfinity;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) gamma = std::min(gamma, space.order_key(i, j));
  }
  chain.levels.push_back(Partition::singletons(n));
  chain.stats.push_back(detail::stats_from_keys(space, floor_key, gamma, n));
  return chain;
}

}  // namespace

const char* to_string(FamilyKind kind) {
  for (const auto& entry : kNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

std::optional<FamilyKind> parse_family_kind(std::string_view name) {
  for (const auto& entry : kNames) {
    if (name == entry.name) return entry.kind;
  }
  return std::nullopt;
}

std::vector<FamilyKind> all_family_kinds() {
  std::vector<FamilyKind> kinds;
  for (const auto& entry : kNames) kinds.push_back(entry.kind);
  return kinds;
}

std::string AnalyticFamily::name() const {
  std::string out = to_string(kind_);
  switch (kind_) {
    case FamilyKind::kSeqPowerTower:
    case FamilyKind::kSeqPolynomial:
      out += "(s=" + std::to_string(param_) + ")";
      break;
    case FamilyKind::kProductGeometric:
      out += "(t=" + std::to_string(param_) + ", r1=" + std::to_string(base_) + ")";
      break;
    case FamilyKind::kCantorFactorial:
      out += "(r=" + std::to_string(param_) + ")";
      break;
    default:
      break;
  }
  return out;
}

bool AnalyticFamily::is_sequence() const {
  switch (kind_) {
    case FamilyKind::kSeqFactorial:
    case FamilyKind::kSeqPowerTower:
    case FamilyKind::kSeqGeometric:
    case FamilyKind::kSeqPolynomial:
    case FamilyKind::kSeqLog:
      return true;
    default:
      return false;
  }
}

double AnalyticFamily::log_r(std::size_t n) const {
  const double x = static_cast<double>(n);
  switch (kind_) {
    case FamilyKind::kSeqFactorial:
      if (n == 0) throw ParameterError("sequence radii start at n = 1");
      return checked(-factorial(n) * kLn2, n);
    case FamilyKind::kSeqPowerTower: {
      if (n == 0) throw ParameterError("sequence radii start at n = 1");
      const double s = param_;
      return checked(-(s * s / (1.0 - s)) * kLn2 * std::pow(s, -x), n);
    }
    case FamilyKind::kSeqGeometric:
      if (n == 0) throw ParameterError("sequence radii start at n = 1");
      return -x * kLn2;
    case FamilyKind::kSeqPolynomial:
      if (n == 0) throw ParameterError("sequence radii start at n = 1");
      return std::log(x) / (1.0 - param_);
    case FamilyKind::kSeqLog:
      if (n == 0) throw ParameterError("sequence radii start at n = 1");
      return -std::log(std::log(x + 2.0));
    case FamilyKind::kProductGeometric:
      if (n == 0) throw ParameterError("product radii start at n = 1");
      return checked(std::log(base_) * std::pow(param_, -(x - 1.0)), n);
    case FamilyKind::kCantorFactorial:
      return checked(factorial(n) * std::log(param_), n);
    case FamilyKind::kSqrtUltra:
      if (n == 0) throw ParameterError("sequence points start at n = 1");
      return -std::log(x);
  }
  return 0.0;
}

double AnalyticFamily::log_step(std::size_t n) const {
  if (n < 2) throw ParameterError("r_{n-1} - r_n needs n >= 2");
  switch (kind_) {
    case FamilyKind::kSeqGeometric:
      return -static_cast<double>(n) * kLn2;
    case FamilyKind::kSeqLog: {
      const double a = static_cast<double>(n) + 1.0;
      return std::log(std::log1p(1.0 / a)) - std::log(std::log(a)) - std::log(std::log(a + 1.0));
    }
    default:
      return log_diff(log_r(n - 1), log_r(n));
  }
}

FormulaLevel AnalyticFamily::level(std::size_t n) const {
  if (n == 0) throw ParameterError("chain levels start at n = 1");
  switch (kind_) {
    case FamilyKind::kSqrtUltra:
      if (n == 1) return make_level(1, 0.0, 0.0, 1);
      return make_level(n, 0.5 * log_r(n), 0.5 * log_r(n - 1), n);
    case FamilyKind::kProductGeometric:
      if (n == 1) return make_level(1, log_r(1), log_r(1), 1);
      return make_level(n, log_r(n), log_r(n - 1), pow2(n - 1));
    case FamilyKind::kCantorFactorial:
      return make_level(n, log_r(n), log_r(n - 1), pow2(n));
    default:
      if (n == 1) return make_level(1, log_r(1), log_r(1), 1);
      return make_level(n, log_r(n), log_step(n), n);
  }
}

FormulaLevel AnalyticFamily::terminal_level(std::size_t depth) const {
  if (depth == 0) throw ParameterError("depth must be at least 1");
  const std::size_t n = depth + 1;
  const std::size_t points = sample_size(depth);
  switch (kind_) {
    case FamilyKind::kSqrtUltra:
      return make_level(n, -kInfinity, 0.5 * log_r(depth), points);
    case FamilyKind::kProductGeometric:
    case FamilyKind::kCantorFactorial:
      return make_level(n, -kInfinity, log_r(depth), points);
    default: {
      double log_gamma = log_r(depth);
      if (depth >= 2) log_gamma = std::min(log_gamma, log_step(depth));
      return make_level(n, -kInfinity, log_gamma, points);
    }
  }
}

std::vector<FormulaLevel> AnalyticFamily::levels(std::size_t depth) const {
  std::vector<FormulaLevel> out;
  out.reserve(depth + 1);
  for (std::size_t n = 1; n <= depth; ++n) out.push_back(level(n));
  out.push_back(terminal_level(depth));
  return out;
}

std::size_t AnalyticFamily::sample_size(std::size_t depth) const {
  switch (kind_) {
    case FamilyKind::kProductGeometric:
      return pow2(depth);
    case FamilyKind::kCantorFactorial:
      return pow2(depth + 1);
    default:
      return depth + 1;
  }
}

void AnalyticFamily::check_standing_hypothesis() {
  standing_hypothesis_ = true;
  hypothesis_failure_.reset();
  if (!is_sequence()) return;
  for (std::size_t n = 2; n <= kStandingHypothesisDepth; ++n) {
    double lhs = 0.0;
    double rhs = 0.0;
    try {
      lhs = log_step(n);
      rhs = log_add(log_r(n), log_r(n + 1));
    } catch (const DepthOverflow&) {
      break;
    }
    if (lhs > rhs + 1e-12) {
      standing_hypothesis_ = false;
      hypothesis_failure_ = n;
      return;
    }
  }
}

AnalyticFamily make_family(FamilyKind kind, double param, double base) {
  AnalyticFamily f;
  f.kind_ = kind;
  f.param_ = std::numeric_limits<double>::quiet_NaN();
  switch (kind) {
    case FamilyKind::kSeqFactorial:
      f.exact_R_ = 0.0;
      break;
    case FamilyKind::kSeqPowerTower:
      if (!(param > 0.0 && param < 1.0)) throw ParameterError("seq_power_tower needs s in (0, 1)");
      f.param_ = param;
      f.exact_R_ = param;
      break;
    case FamilyKind::kSeqGeometric:
      f.exact_R_ = 1.0;
      break;
    case FamilyKind::kSeqPolynomial:
      if (!(param > 1.0 && std::isfinite(param))) {
        throw ParameterError("seq_polynomial needs finite s > 1");
      }
      f.param_ = param;
      f.exact_R_ = param;
      break;
    case FamilyKind::kSeqLog:
      f.exact_R_ = kInfinity;
      break;
    case FamilyKind::kProductGeometric:
      if (!(param > 0.0 && param < 1.0))
        throw ParameterError("product_geometric needs t in (0, 1)");
      if (!(base > 0.0 && base < 1.0)) throw ParameterError("product_geometric needs r1 in (0, 1)");
      f.param_ = param;
      f.base_ = base;
      f.exact_R_ = param;
      break;
    case FamilyKind::kCantorFactorial:
      if (!(param > 0.0 && param < 1.0)) throw ParameterError("cantor_factorial needs r in (0, 1)");
      f.param_ = param;
      f.exact_R_ = 0.0;
      break;
    case FamilyKind::kSqrtUltra:
      f.exact_R_ = 1.0;
      break;
  }
  f.check_standing_hypothesis();
  return f;
}

AnalyticFamily family_for_R(double s) {
  if (std::isnan(s) || s < 0.0) throw ParameterError("R must lie in [0, inf]");
  if (s == 0.0) return make_family(FamilyKind::kSeqFactorial);
  if (s < 1.0) return make_family(FamilyKind::kSeqPowerTower, s);
  if (s == 1.0) return make_family(FamilyKind::kSeqGeometric);
  if (std::isfinite(s)) return make_family(FamilyKind::kSeqPolynomial, s);
  return make_family(FamilyKind::kSeqLog);
}

Partition sequence_partition(std::size_t depth, std::size_t n) {
  if (n == 0 || n > depth + 1) throw ParameterError("sequence level out of range");
  std::vector<std::size_t> labels(depth + 1);
  for (std::size_t i = 0; i <= depth; ++i) labels[i] = i + 1 < n ? i + 1 : 0;
  if (n == depth + 1) return Partition::singletons(depth + 1);
  return Partition::from_labels(labels);
}

std::vector<double> sample_coordinates(const AnalyticFamily& family, std::size_t depth) {
  if (!family.is_sequence() && family.kind() != FamilyKind::kSqrtUltra) {
    throw ParameterError(std::string(to_string(family.kind())) + " has no line coordinates");
  }
  if (depth == 0) throw ParameterError("depth must be at least 1");
  std::vector<double> coords(depth + 1, 0.0);
  for (std::size_t n = 1; n <= depth; ++n) {
    const double x = static_cast<double>(n);
    switch (family.kind()) {
      case FamilyKind::kSeqGeometric:
        coords[n - 1] = std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(n, 2000)));
        break;
      case FamilyKind::kSeqPolynomial:
        coords[n - 1] = std::pow(x, 1.0 / (1.0 - family.param()));
        break;
      case FamilyKind::kSeqLog:
        coords[n - 1] = 1.0 / std::log(x + 2.0);
        break;
      case FamilyKind::kSqrtUltra:
        coords[n - 1] = 1.0 / x;
        break;
      default:
        coords[n - 1] = std::exp(family.log_r(n));
        break;
    }
    if (!(coords[n - 1] >= DBL_MIN)) {
      throw DepthOverflow("r_" + std::to_string(n) + " underflows; use the formulas instead");
    }
  }
  return coords;
}

SqrtUltraSpace::SqrtUltraSpace(std::vector<double> coords) : coords_(std::move(coords)) {
  roots_.reserve(coords_.size());
  for (double x : coords_) roots_.push_back(std::sqrt(x));
}

ZooSample sample(const AnalyticFamily& family, std::size_t depth) {
  if (depth == 0) throw ParameterError("depth must be at least 1");
  const FamilyKind kind = family.kind();
  if ((kind == FamilyKind::kSeqFactorial || kind == FamilyKind::kCantorFactorial) &&
      depth > kFactorialSampleDepth) {
    throw DepthOverflow("factorial families are sampled up to depth " +
                        std::to_string(kFactorialSampleDepth));
  }
  ZooSample out;
  out.formulas = family.levels(depth);

  if (family.is_sequence() || kind == FamilyKind::kSqrtUltra) {
    if (depth > kMaxSequenceSampleDepth) {
      throw DepthOverflow("dense sequence samples are capped at depth " +
                          std::to_string(kMaxSequenceSampleDepth));
    }
    const std::size_t n = depth + 1;
    if (n > max_points()) throw DepthOverflow("sample exceeds METRICLAB_MAX_POINTS");
    std::vector<std::string> labels(n);
    std::vector<double> log_x(n, -kInfinity);
    for (std::size_t k = 1; k <= depth; ++k) {
      labels[k - 1] = (kind == FamilyKind::kSqrtUltra ? "1/" : "r") + std::to_string(k);
      log_x[k - 1] = family.log_r(k);
    }
    labels[depth] = "0";
    std::vector<double> logs(n * n, -kInfinity);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        // Index order is decreasing in the point value.
        double v = 0.0;
        if (kind == FamilyKind::kSqrtUltra) {
          v = 0.5 * log_x[i];
        } else if (j == i + 1 && j < depth) {
          v = family.log_step(j + 1);
        } else {
          v = log_diff(log_x[i], log_x[j]);
        }
        logs[i * n + j] = logs[j * n + i] = v;
      }
    }
    out.space = from_logs(std::move(labels), std::move(logs));
    if (!out.space.log_backed() && kind != FamilyKind::kSqrtUltra) {
      // Plain differences of the coordinates, as the absolute-value metric.
      const auto coords = sample_coordinates(family, depth);
      std::vector<double> values(n * n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) values[i * n + j] = std::abs(coords[i] - coords[j]);
      }
      out.space = FiniteMetricSpace::from_trusted(out.space.labels(), std::move(values));
    }
    out.chain = peel_chain(out.space, depth);
    return out;
  }

  // Binary words under the first-difference ultrametric.
  const bool cantor = kind == FamilyKind::kCantorFactorial;
  const std::size_t k = cantor ? depth + 1 : depth;
  const std::size_t n = pow2(k);
  if (n > max_points()) throw DepthOverflow("sample exceeds METRICLAB_MAX_POINTS");
  std::vector<double> radii(k + 1, 0.0);
  for (std::size_t p = 0; p < k; ++p) radii[p] = family.log_r(cantor ? p : p + 1);
  std::vector<double> logs(n * n, -kInfinity);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      logs[a * n + b] = logs[b * n + a] = radii[common_prefix(a, b, k)];
    }
  }
  out.space = from_logs(word_labels(k), std::move(logs));
  std::vector<Partition> levels;
  for (std::size_t level = 1; level <= depth; ++level) {
    levels.push_back(prefix_partition(k, cantor ? level : level - 1));
  }
  levels.push_back(Partition::singletons(n));
  out.chain = make_chain(out.space, std::move(levels));
  return out;
}

}  // namespace metriclab
