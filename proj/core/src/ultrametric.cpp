#include "metriclab/ultrametric.hpp"

#include <algorithm>

#include "metriclab/logratio.hpp"

namespace metriclab {

PartitionChain with_root(const FiniteMetricSpace& space, const PartitionChain& chain) {
  if (chain.size() == 0) throw DomainError("chain has no levels");
  if (chain.levels.front().block_count() == 1) return chain;
  PartitionChain rooted;
  rooted.levels.reserve(chain.size() + 1);
  rooted.levels.push_back(Partition::trivial(space.size()));
  rooted.stats.push_back(partition_stats(space, rooted.levels.front()));
  rooted.levels.insert(rooted.levels.end(), chain.levels.begin(), chain.levels.end());
  rooted.stats.insert(rooted.stats.end(), chain.stats.begin(), chain.stats.end());
  if (chain.has_thresholds()) {
    rooted.log_thresholds.push_back(std::nextafter(space.log_diameter(), kInfinity));
    rooted.thresholds.push_back(std::exp(rooted.log_thresholds.front()));
    rooted.log_thresholds.insert(rooted.log_thresholds.end(), chain.log_thresholds.begin(),
                                 chain.log_thresholds.end());
    rooted.thresholds.insert(rooted.thresholds.end(), chain.thresholds.begin(),
                             chain.thresholds.end());
  }
  return rooted;
}

FiniteMetricSpace ultrametric_from_chain(const FiniteMetricSpace& space,
                                         const PartitionChain& chain) {
  const auto rooted = with_root(space, chain);
  const std::size_t n = space.size();
  const std::size_t L = rooted.size();
  for (std::size_t l = 0; l < L; ++l) {
    if (rooted.levels[l].size() != n) throw DomainError("chain does not match the space");
    if (l > 0 && !rooted.levels[l].refines(rooted.levels[l - 1])) {
      throw NotNested(l, "a block straddles two blocks of the coarser level");
    }
  }
  const auto& deepest = rooted.levels.back();
  for (const auto& block : deepest.blocks()) {
    if (block.size() > 1) throw NotSeparating(block[0], block[1]);
  }

  const bool log_backed = space.log_backed();
  std::vector<double> values(n * n, log_backed ? -kInfinity : 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Nested levels: "joined" is true on a prefix, so binary search.
      std::size_t lo = 0;
      std::size_t hi = L - 1;
      while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (rooted.levels[mid].same_block(i, j)) {
          lo = mid;
        } else {
          hi = mid - 1;
        }
      }
      const auto& s = rooted.stats[lo];
      values[i * n + j] = values[j * n + i] = log_backed ? s.log_delta : s.delta;
    }
  }
  return log_backed ? FiniteMetricSpace::from_trusted_log(space.labels(), std::move(values))
                    : FiniteMetricSpace::from_trusted(space.labels(), std::move(values));
}

std::optional<std::size_t> find_m_index(const PartitionChain& rooted, double R,
                                        double epsilon) {
  const bool check_upper = R > epsilon;
  const auto good = [&](const PartitionStats& s) {
    if (!(s.log_delta < 0.0) || s.log_delta == -kInfinity) return true;
    if (!(s.log_gamma > (R + epsilon) * s.log_delta)) return false;
    return !check_upper || s.log_gamma < (R - epsilon) * s.log_delta;
  };
  const std::size_t L = rooted.size();
  if (L < 2) return std::nullopt;
  // Walk back from the deepest level while levels stay good; m is where the
  // good tail starts, and the tail must hold an informative level.
  std::size_t m = L;
  bool informative = false;
  while (m > 1 && good(rooted.stats[m - 1])) {
    --m;
    const auto& s = rooted.stats[m];
    informative = informative || (s.log_delta < 0.0 && s.log_delta != -kInfinity);
  }
  if (m >= L || !informative) return std::nullopt;
  return m;
}

UltrametricCertificate certificate(const FiniteMetricSpace& space, const PartitionChain& chain,
                                   const CertificateOptions& options) {
  if (!(options.epsilon > 0.0)) throw ParameterError("epsilon must be positive");
  if (!(options.p > 1.0)) throw ParameterError("p must exceed 1");
  const auto rooted = with_root(space, chain);

  UltrametricCertificate cert;
  cert.p = options.p;
  cert.epsilon = options.epsilon;
  cert.root_prepended = rooted.size() != chain.size();
  cert.R_est = options.R_override ? *options.R_override : profile(rooted).estimate;
  if (!std::isfinite(cert.R_est)) {
    throw DomainError("certificate refused: the ratio estimate is not finite");
  }
  cert.upper_sandwich_skipped = cert.R_est <= cert.epsilon;

  // With one level of positive diameter ({X} then singletons) the witness and
  // sandwich conditions are empty; a = 1 and m = 1 give K = min{1, γ_1 δ_0^-exponent}.
  std::size_t positive = 0;
  for (const auto& s : rooted.stats) positive += s.log_delta != -kInfinity ? 1 : 0;
  const bool vacuous = positive <= 1 && rooted.size() >= 2;

  const auto report = classify_chain(rooted, options.p);
  if (vacuous) {
    cert.log_a = 0.0;
    cert.a = 1.0;
  } else if (!std::isfinite(report.log_p_witness)) {
    throw DomainError("certificate refused: the chain has no positive p-witness");
  } else {
    cert.log_a = report.log_p_witness;
    cert.a = report.p_witness;
  }

  const auto m = vacuous ? std::optional<std::size_t>{1}
                         : find_m_index(rooted, cert.R_est, cert.epsilon);
  if (!m) {
    throw DomainError("certificate refused: no level m from which delta^(R+eps) < gamma" +
                      std::string(cert.upper_sandwich_skipped ? "" : " < delta^(R-eps)") +
                      " holds on the computed levels");
  }
  cert.m_index = *m;

  const double e = cert.R_est + cert.epsilon;
  cert.exponent = options.p * e;
  const double log_delta0 = rooted.stats.front().log_delta;
  cert.log_K = std::min(e * cert.log_a,
                        rooted.stats[cert.m_index].log_gamma - cert.exponent * log_delta0);
  cert.K = std::exp(cert.log_K);

  cert.rho = ultrametric_from_chain(space, rooted);
  const std::size_t n = space.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double ld = space.log_distance(i, j);
      const double lr = cert.rho.log_distance(i, j);
      const double lower = ld - cert.exponent * lr;
      const double upper = ld - lr;
      if (lower < cert.log_lower_residual) {
        cert.log_lower_residual = lower;
        cert.lower_worst = {i, j};
      }
      if (upper > cert.log_upper_residual) {
        cert.log_upper_residual = upper;
        cert.upper_worst = {i, j};
      }
    }
  }
  cert.lower_residual = std::exp(cert.log_lower_residual);
  cert.upper_residual = std::exp(cert.log_upper_residual);
  if (n >= 2) {
    cert.lower_holds = cert.log_lower_residual >= cert.log_K - options.tolerance;
    cert.upper_holds = cert.log_upper_residual <= options.tolerance;
  }
  if (options.strict) {
    if (!cert.lower_holds) {
      throw CertificateViolated("lower inequality K rho^exponent <= d", cert.lower_worst[0],
                                cert.lower_worst[1], cert.log_lower_residual - cert.log_K);
    }
    if (!cert.upper_holds) {
      throw CertificateViolated("upper inequality d <= rho", cert.upper_worst[0],
                                cert.upper_worst[1], cert.log_upper_residual);
    }
  }
  return cert;
}

HolderFit fit_holder_exponents(const FiniteMetricSpace& d1, const FiniteMetricSpace& d2) {
  if (d1.size() != d2.size()) throw DomainError("metrics are on different point sets");
  const std::size_t n = d1.size();
  HolderFit fit;
  double s = kInfinity;
  double t = -kInfinity;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double l1 = d1.log_distance(i, j);
      if (!(l1 < 0.0)) continue;
      const double slope = d2.log_distance(i, j) / l1;
      s = std::min(s, slope);
      t = std::max(t, slope);
      ++fit.pairs_used;
    }
  }
  if (fit.pairs_used > 0) {
    fit.s = s;
    fit.t = t;
  }
  double log_c1 = kInfinity;
  double log_c2 = -kInfinity;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double l1 = d1.log_distance(i, j);
      const double l2 = d2.log_distance(i, j);
      log_c1 = std::min(log_c1, l2 - fit.t * l1);
      log_c2 = std::max(log_c2, l2 - fit.s * l1);
    }
  }
  if (n >= 2) {
    fit.c1 = std::exp(log_c1);
    fit.c2 = std::exp(log_c2);
  }
  return fit;
}

}  // namespace metriclab
