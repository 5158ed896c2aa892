#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "metriclab/metric_space.hpp"
#include "metriclab/partition.hpp"

namespace metriclab {

inline constexpr double kDefaultCertificateEpsilon = 0.1;

// The chain with {X} in front unless its first level already is {X}.
PartitionChain with_root(const FiniteMetricSpace& space, const PartitionChain& chain);

// ρ(x, y) = δ(α_n) for the deepest level α_n joining x and y, after
// prepending {X}. Log-backed when the space is. Throws NotNested or
// NotSeparating.
FiniteMetricSpace ultrametric_from_chain(const FiniteMetricSpace& space,
                                         const PartitionChain& chain);

// Smallest level m >= 1 of the rooted chain such that level m and every later
// level with 0 < δ < 1 have δ^{R+ε} < γ, and also γ < δ^{R-ε} unless R <= ε.
// Empty when no level with 0 < δ < 1 is in that tail.
std::optional<std::size_t> find_m_index(const PartitionChain& rooted, double R, double epsilon);

struct CertificateOptions {
  double p = 2.0;
  double epsilon = kDefaultCertificateEpsilon;
  // Throw CertificateViolated when an inequality fails.
  bool strict = true;
  // Allowed slack on each inequality, in natural-log units.
  double tolerance = 1e-12;
  // Use this R instead of the chain's profile estimate.
  std::optional<double> R_override;
};

struct UltrametricCertificate {
  FiniteMetricSpace rho;
  double p = 2.0;
  double epsilon = kDefaultCertificateEpsilon;
  double R_est = 0.0;
  // Index into the rooted chain.
  std::size_t m_index = 1;
  bool root_prepended = false;
  // R_est <= ε, so only δ^{R+ε} < γ was required of later levels.
  bool upper_sandwich_skipped = false;
  double a = 0.0;
  double log_a = 0.0;
  double K = 0.0;
  double log_K = 0.0;
  double exponent = 0.0;
  // min over pairs of d / ρ^exponent, and where.
  double lower_residual = kInfinity;
  double log_lower_residual = kInfinity;
  std::array<std::size_t, 2> lower_worst{0, 0};
  // max over pairs of d / ρ, and where.
  double upper_residual = 0.0;
  double log_upper_residual = -kInfinity;
  std::array<std::size_t, 2> upper_worst{0, 0};
  bool lower_holds = true;
  bool upper_holds = true;
  bool holds() const { return lower_holds && upper_holds; }
};

// Throws DomainError when no m index or positive witness exists, and
// CertificateViolated in strict mode when a pair fails.
UltrametricCertificate certificate(const FiniteMetricSpace& space, const PartitionChain& chain,
                                   const CertificateOptions& options = {});

// s = min and t = max of ln d2 / ln d1 over pairs with d1 < 1, then the
// tightest c1 = min d2 / d1^t and c2 = max d2 / d1^s over all pairs.
HolderFit fit_holder_exponents(const FiniteMetricSpace& d1, const FiniteMetricSpace& d2);

}  // namespace metriclab
