// Runs the acceptance criteria and prints one PASS/FAIL line for each.
//
//   metriclab_acceptance [--only K]... [--allow-fail K]...
//
// Exit status is 0 when every failing criterion was named with --allow-fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "metriclab/embedding.hpp"
#include "metriclab/logratio.hpp"
#include "metriclab/ultrametric.hpp"
#include "metriclab/zoo.hpp"
#include "support/generators.hpp"

namespace metriclab {
namespace {

// Collects failed expectations and a few notes for the summary line.
class Tally {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) messages_.push_back(what);
  }
  void note(const std::string& text) { notes_.push_back(text); }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::ostringstream os;
    os << checks_ << " checks";
    for (const auto& n : notes_) os << "; " << n;
    if (failures_ > 0) {
      os << "; " << failures_ << " failed";
      for (const auto& m : messages_) os << "; " << m;
    }
    return os.str();
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> messages_;
  std::vector<std::string> notes_;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool close(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

// Index of the level with sequence index n in a zoo chain.
std::size_t level_index(const ZooSample& zs, std::size_t n) {
  for (std::size_t l = 0; l < zs.formulas.size(); ++l) {
    if (zs.formulas[l].n == n && zs.chain.stats[l].log_delta > -kInfinity) return l;
  }
  throw DomainError("no level " + std::to_string(n));
}

void case_formulas(Tally& t) {
  const auto geometric = sample(make_family(FamilyKind::kSeqGeometric), 20);
  double worst = 0.0;
  for (std::size_t n = 2; n <= 20; ++n) {
    const double R = geometric.chain.stats[level_index(geometric, n)].log_ratio;
    worst = std::max(worst, std::abs(R - 1.0));
    t.expect(std::abs(R - 1.0) <= 1e-12, "geometric R_" + std::to_string(n) + " = " + fmt(R));
  }
  t.note("geometric max |R_n - 1| = " + fmt(worst));

  // {1/k : k <= 10^4} on the line; R_n = ln(1/(n(n-1))) / ln(1/n).
  const std::size_t n = 10000;
  const auto polynomial = make_family(FamilyKind::kSeqPolynomial, 2.0);
  const LineSpace line(sample_coordinates(polynomial, n));
  const auto st = partition_stats(line, sequence_partition(n, n));
  const double nn = static_cast<double>(n);
  const double derived = (std::log(nn) + std::log(nn - 1.0)) / std::log(nn);
  t.expect(std::abs(st.log_ratio - 2.0) <= 1e-4, "polynomial R_10^4 = " + fmt(st.log_ratio));
  t.expect(close(st.log_ratio, derived, 1e-9), "polynomial R_10^4 differs from closed form");
  t.note("polynomial R_10^4 = " + fmt(st.log_ratio));

  const auto cantor = sample(make_family(FamilyKind::kCantorFactorial, 0.5), 8);
  for (std::size_t k = 2; k <= 8; ++k) {
    const double R = cantor.chain.stats[level_index(cantor, k)].log_ratio;
    t.expect(std::abs(R - 1.0 / static_cast<double>(k)) <= 1e-12,
             "cantor R_" + std::to_string(k) + " = " + fmt(R));
  }
}

void divergence_and_vanishing(Tally& t) {
  // seq_log: r_n = 1 / ln(n + 2).
  const std::size_t depth = 1000;
  const LineSpace line(sample_coordinates(make_family(FamilyKind::kSeqLog), depth));
  const auto r = [](double n) { return 1.0 / std::log(n + 2.0); };
  double previous = -kInfinity;
  for (std::size_t n : {100u, 1000u}) {
    const double R = partition_stats(line, sequence_partition(depth, n)).log_ratio;
    const double nd = static_cast<double>(n);
    const double derived = std::log(r(nd - 1.0) - r(nd)) / std::log(r(nd));
    t.expect(close(R, derived, 1e-9),
             "seq_log R_" + std::to_string(n) + " differs from closed form");
    t.expect(R > previous, "seq_log R_n not increasing at n = " + std::to_string(n));
    previous = R;
    t.note("seq_log R_" + std::to_string(n) + " = " + fmt(R));
  }
  t.expect(previous > 3.0, "seq_log R_1000 <= 3");

  // seq_factorial: r_n = 2^-n!, so R_n = ln(r_{n-1} - r_n) / ln r_n with the
  // difference taken in the log domain.
  const auto factorial = sample(make_family(FamilyKind::kSeqFactorial), 8);
  const double ln2 = std::log(2.0);
  double fact = 1.0;
  previous = kInfinity;
  for (std::size_t n = 2; n <= 8; ++n) {
    const double prev_fact = fact;
    fact *= static_cast<double>(n);
    const double log_gamma = -prev_fact * ln2 + std::log1p(-std::exp2(-(fact - prev_fact)));
    const double derived = log_gamma / (-fact * ln2);
    const double R = factorial.chain.stats[level_index(factorial, n)].log_ratio;
    t.expect(close(R, derived, 1e-12),
             "factorial R_" + std::to_string(n) + " differs from closed form");
    t.expect(R < previous, "factorial R_n not decreasing at n = " + std::to_string(n));
    previous = R;
  }
  t.expect(previous < 0.15, "factorial R_8 = " + fmt(previous));
  t.note("factorial R_8 = " + fmt(previous));
}

void ultrametrization(Tally& t) {
  struct Case {
    AnalyticFamily family;
    double p;
    double epsilon;
  };
  const std::vector<Case> cases{{make_family(FamilyKind::kSeqPowerTower, 0.5), 3.0, 0.1},
                                {make_family(FamilyKind::kSeqGeometric), 2.0, 0.5}};
  for (const auto& c : cases) {
    const auto zs = sample(c.family, 12);
    CertificateOptions options;
    options.p = c.p;
    options.epsilon = c.epsilon;
    options.strict = false;
    const auto cert = certificate(zs.space, zs.chain, options);
    const std::string name = to_string(c.family.kind());
    t.expect(is_ultrametric(cert.rho).ok, name + ": rho fails the strong triangle inequality");

    // K = min{a^(R+eps), gamma(alpha_m) delta(alpha_0)^-p(R+eps)}, with a the
    // largest constant such that delta_{n+1} >= a delta_n^p.
    const auto rooted = with_root(zs.space, zs.chain);
    double log_a = kInfinity;
    for (std::size_t l = 0; l + 1 < rooted.size(); ++l) {
      const double lo = rooted.stats[l].log_delta;
      const double hi = rooted.stats[l + 1].log_delta;
      if (lo > -kInfinity && hi > -kInfinity) log_a = std::min(log_a, hi - c.p * lo);
    }
    const double e = cert.R_est + c.epsilon;
    const double exponent = c.p * e;
    const double log_K = std::min(e * log_a, rooted.stats[cert.m_index].log_gamma -
                                                 exponent * rooted.stats.front().log_delta);
    t.expect(close(log_K, cert.log_K, 1e-12), name + ": K differs from the formula");

    std::size_t pairs = 0;
    for (std::size_t i = 0; i < zs.space.size(); ++i) {
      for (std::size_t j = i + 1; j < zs.space.size(); ++j) {
        const double ld = zs.space.log_distance(i, j);
        const double lr = cert.rho.log_distance(i, j);
        t.expect(ld <= lr, name + ": d > rho");
        t.expect(log_K + exponent * lr <= ld + 1e-12 * std::abs(ld), name + ": K rho^e > d");
        ++pairs;
      }
    }
    t.note(name + " exponent " + fmt(exponent) + ", ln K " + fmt(log_K) + ", " +
           std::to_string(pairs) + " pairs");
  }
}

void factorial_comparison(Tally& t) {
  const auto family = make_family(FamilyKind::kSeqFactorial);
  const auto zs = sample(family, 8);
  const auto rho = ultrametric_from_chain(zs.space, zs.chain);
  const std::size_t m = zs.space.size() - 1;
  const auto log_point = [&](std::size_t i) { return i == m ? -kInfinity : family.log_r(i + 1); };
  for (std::size_t i = 0; i < m; ++i) {
    t.expect(zs.space.log_distance(i, m) == log_point(i), "sample layout differs");
  }
  const double ln2 = std::log(2.0);
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = i + 1; j <= m; ++j) {
      // The max-ultrametric max{x, y}.
      const double closed_form = std::max(log_point(i), log_point(j));
      const double ld = zs.space.log_distance(i, j);
      const double lr = rho.log_distance(i, j);
      t.expect(lr == closed_form, "rho differs from max{x, y}");
      t.expect(ld <= lr, "|x - y| > rho");
      t.expect(lr <= ld + ln2, "rho > 2|x - y|");
    }
  }
}

void threshold_dominance(Tally& t) {
  testing::Rng rng(20240501);
  std::size_t qualifying = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = testing::random_euclidean(rng, 7);
    std::size_t seen = 0;
    for_each_set_partition(7, [&](std::span<const std::size_t> labels) {
      ++seen;
      const auto alpha = Partition::from_labels(labels);
      const auto s = partition_stats(x, alpha);
      if (!(s.delta > 0.0 && s.delta < 1.0 && s.gamma > 0.0 && s.gamma < 1.0)) return;
      ++qualifying;
      const auto th = partition_stats(x, threshold_partition(x, s.gamma));
      t.expect(th.gamma >= s.gamma, "threshold gamma decreased");
      t.expect(th.delta <= s.delta, "threshold delta increased");
      t.expect(th.log_ratio <= s.log_ratio, "threshold R increased");
    });
    t.expect(seen == 877, "partition count " + std::to_string(seen));
    const auto chain = dendrogram_chain(x);
    for (double r : {0.2, 0.4, 0.7}) {
      double chain_min = kInfinity;
      for (const auto& s : chain.stats) {
        if (s.delta < r) chain_min = std::min(chain_min, s.log_ratio);
      }
      const auto brute = brute_force_min_R(x, r);
      t.expect(brute.partitions_seen == 877, "brute force skipped partitions");
      t.expect(brute.min_R == chain_min, "brute-force minimum differs from the chain minimum");
    }
  }
  t.note(std::to_string(qualifying) + " partitions compared");
}

void product_laws(Tally& t) {
  testing::Rng rng(20240502);
  std::size_t compared = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<FiniteMetricSpace> factors{testing::random_euclidean(rng, 4),
                                                 testing::random_euclidean(rng, 4)};
    const auto product = sup_product(factors);
    std::vector<Partition> parts;
    for_each_set_partition(4, [&](std::span<const std::size_t> labels) {
      parts.push_back(Partition::from_labels(labels));
    });
    for (const auto& a : parts) {
      const auto sa = partition_stats(factors[0], a);
      for (const auto& b : parts) {
        const auto sb = partition_stats(factors[1], b);
        std::vector<std::size_t> labels(product.size());
        for (std::size_t p = 0; p < product.size(); ++p) {
          const auto c = product_coordinates(factors, p);
          labels[p] = a.block_of(c[0]) * 4 + b.block_of(c[1]);
        }
        const auto s = partition_stats(product, Partition::from_labels(labels));
        t.expect(s.delta == std::max(sa.delta, sb.delta), "product delta is not the max");
        // With a single block the gap is the diameter by convention, so the min
        // law is stated for partitions of both factors.
        if (a.block_count() > 1 && b.block_count() > 1) {
          t.expect(s.gamma == std::min(sa.gamma, sb.gamma), "product gamma is not the min");
          ++compared;
        }
      }
    }
  }
  t.note(std::to_string(compared) + " partition pairs");

  // product_geometric t = 1/2 is the sup-product of the two-point spaces r_k {0, 1}.
  const auto family = make_family(FamilyKind::kProductGeometric, 0.5);
  const std::size_t depth = 6;
  std::vector<FiniteMetricSpace> twos;
  double max_factor = -kInfinity;
  for (std::size_t k = 1; k <= depth; ++k) {
    const double r = family.r(k);
    twos.push_back(validate({{0.0, r}, {r, 0.0}}));
    max_factor = std::max(max_factor, profile(dendrogram_chain(twos.back())).estimate);
  }
  const auto product = sup_product(twos);
  const double estimate = profile(dendrogram_chain(product), product).estimate;
  const double zoo_estimate = profile(sample(family, depth).chain).estimate;
  t.expect(estimate >= max_factor, "product estimate below the factor maximum");
  t.expect(close(estimate, zoo_estimate, 1e-12), "product differs from the zoo sample");
  t.note("product estimate " + fmt(estimate) + " vs factor max " + fmt(max_factor));
}

void subspace_monotonicity(Tally& t) {
  testing::Rng rng(20240503);
  std::size_t compared = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<std::size_t> size(4, 12);
    const auto x = testing::random_euclidean(rng, size(rng));
    const auto subset = testing::random_subset(rng, x.size(), 2);
    const auto y = x.subspace(subset);
    const auto chain = dendrogram_chain(x);
    for (std::size_t l = 0; l < chain.size(); ++l) {
      const auto beta = chain.levels[l].restrict_to(subset);
      const auto sb = partition_stats(y, beta);
      const auto& sa = chain.stats[l];
      // Levels of Y with at least two blocks and positive diameter.
      if (beta.block_count() < 2 || !(sb.delta > 0.0)) continue;
      if (!std::isfinite(sa.log_ratio) || !std::isfinite(sb.log_ratio)) continue;
      t.expect(sb.log_ratio <= sa.log_ratio, "R(beta) > R(alpha)");
      ++compared;
    }
  }
  t.note(std::to_string(compared) + " levels compared");
}

void snowflake_invariance(Tally& t) {
  testing::Rng rng(20240504);
  std::uniform_real_distribution<double> exponent(0.05, 1.0);
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    const auto x = testing::random_euclidean(rng, 8);
    const auto alpha = testing::random_partition(rng, 8);
    const double s = exponent(rng);
    const double R = partition_stats(x, alpha).log_ratio;
    const double Rs = partition_stats(snowflake(x, s), alpha).log_ratio;
    if (std::isinf(R)) {
      t.expect(Rs == R, "R changed under snowflake");
    } else {
      worst = std::max(worst, std::abs(Rs - R));
      t.expect(std::abs(Rs - R) <= 1e-12, "R changed under snowflake by " + fmt(Rs - R));
    }
  }
  t.note("max |R(d^s) - R(d)| = " + fmt(worst));

  const std::vector<FiniteMetricSpace> spaces{
      testing::random_euclidean(rng, 30),
      sample(make_family(FamilyKind::kSeqGeometric), 40).space};
  worst = 0.0;
  for (const auto& x : spaces) {
    for (double s : {0.25, 0.5, 0.8}) {
      const auto flake = snowflake(x, s);
      std::vector<std::pair<double, double>> grid;
      std::vector<std::pair<double, double>> grid_s;
      for (int i = 1; i <= 12; ++i) {
        for (int j = i + 1; j <= 12; ++j) {
          const double r1 = std::ldexp(1.0, -i);
          const double r2 = std::ldexp(1.0, -j);
          grid.emplace_back(r1, r2);
          grid_s.emplace_back(std::pow(r1, s), std::pow(r2, s));
        }
      }
      const auto e = estimate_metric_dimension(x, {1.0, 1.0}, grid);
      const auto es = estimate_metric_dimension(flake, {1.0, 1.0}, grid_s);
      t.expect(e.samples.size() == es.samples.size(), "sample counts differ");
      for (std::size_t k = 0; k < std::min(e.samples.size(), es.samples.size()); ++k) {
        const double want = e.samples[k].value / s;
        worst = std::max(worst, std::abs(es.samples[k].value - want));
        t.expect(es.samples[k].J == e.samples[k].J, "J changed under snowflake");
        t.expect(std::abs(es.samples[k].value - want) <= 1e-12, "sample is not scaled by 1/s");
      }
    }
  }
  t.note("max per-sample deviation " + fmt(worst));
}

void embedding(Tally& t) {
  const auto family = make_family(FamilyKind::kSeqPolynomial, 2.0);
  const auto zs = sample(family, 8);
  const double R = family.exact_R();
  const double R_est = profile(zs.chain).estimate;
  const double s = R - 1.0;
  const std::size_t N = min_embedding_dimension(1.0, R, s);
  t.expect(N == 11, "min_embedding_dimension = " + std::to_string(N));
  t.note("R_est " + fmt(R_est) + ", N " + std::to_string(N));

  const auto sub = embedding_subchain(zs.space, zs.chain, N, s);
  EmbeddingOptions options;
  options.N = N;
  options.p = 2.0;
  options.epsilon = 0.5;
  options.R_override = R_est;
  const auto result = embed_chain(zs.space, sub.chain, options);
  t.expect(result.audits_pass(), "a level audit failed");
  for (const auto& a : result.audit) {
    t.expect(a.free_placement || static_cast<double>(a.required) <= a.capacity,
             "level " + std::to_string(a.level) + " over capacity");
    t.expect(a.realized_gap >= a.gamma_next * (1.0 - 1e-12), "realized gap below gamma_{n+1}");
  }

  // gamma_{n+1} <= |f(x) - f(y)|_box <= 2 delta_n at the level n where x, y split.
  const auto& chain = result.chain;
  for (std::size_t i = 0; i < result.coords.size(); ++i) {
    for (std::size_t j = i + 1; j < result.coords.size(); ++j) {
      std::size_t joined = 0;
      for (std::size_t l = 0; l < chain.size(); ++l) {
        if (chain.levels[l].same_block(i, j)) joined = l;
      }
      const double dist = box_distance(result.coords[i], result.coords[j]);
      t.expect(joined + 1 < chain.size(), "pair never separated");
      if (joined + 1 >= chain.size()) continue;
      t.expect(dist >= chain.stats[joined + 1].gamma * (1.0 - 1e-12), "box distance below gamma");
      t.expect(dist <= 2.0 * chain.stats[joined].delta * (1.0 + 1e-12),
               "box distance above 2 delta");
    }
  }

  DistortionOptions dopts;
  dopts.strict = false;
  const auto report = verify_embedding_distortion(zs.space, result, dopts);
  t.expect(report.box_sandwich_ok, "distortion report: sandwich");
  t.expect(report.lower_ok, "distortion report: lower bound");
  t.expect(report.upper_ok, "distortion report: upper bound");
  t.expect(report.pairs_asserted > 0, "no pairs past burn-in");
  t.note(std::to_string(report.pairs_asserted) + " pairs past burn-in");
}

// Largest r2-separated subset of the closed ball on the line, by a sweep.
std::size_t line_oracle(const std::vector<double>& xs, double centre, double r1, double r2) {
  std::vector<double> ball;
  for (double x : xs) {
    if (std::abs(x - centre) <= r1) ball.push_back(x);
  }
  std::sort(ball.begin(), ball.end());
  std::size_t count = 0;
  double last = -kInfinity;
  for (double x : ball) {
    if (count == 0 || x - last >= r2) {
      ++count;
      last = x;
    }
  }
  return count;
}

void dimension_estimator(Tally& t) {
  std::vector<std::pair<double, double>> grid;
  for (int i = 1; i <= 40; ++i) {
    for (int j = i + 1; j <= 40; ++j) grid.emplace_back(std::ldexp(1.0, -i), std::ldexp(1.0, -j));
  }
  std::vector<DimensionWindow> windows;
  for (int k : {4, 8, 12, 16, 20}) windows.push_back({std::ldexp(1.0, -4), std::ldexp(1.0, k)});

  const auto geometric = sample_coordinates(make_family(FamilyKind::kSeqGeometric), 40);
  const auto inverse = sample_coordinates(make_family(FamilyKind::kSeqPolynomial, 2.0), 5000);
  const auto geo = dimension_trend(LineSpace(geometric), windows, grid);
  const auto inv = dimension_trend(LineSpace(inverse), windows, grid);

  const auto check_counts = [&](const std::vector<double>& xs, const DimensionTrend& trend) {
    for (const auto& e : trend.estimates) {
      for (const auto& s : e.samples) {
        t.expect(s.J == line_oracle(xs, xs[s.centre], s.r1, s.r2), "J differs from the oracle");
      }
    }
  };
  check_counts(geometric, geo);
  check_counts(inverse, inv);

  std::string geo_values;
  std::string inv_values;
  for (std::size_t k = 0; k < windows.size(); ++k) {
    geo_values += (k ? " " : "") + fmt(geo.estimates[k].estimate);
    inv_values += (k ? " " : "") + fmt(inv.estimates[k].estimate);
    t.expect(inv.estimates[k].estimate >= 0.5, "{1/n} estimate below 0.5");
  }
  t.expect(geo.estimates.back().estimate <= 0.25, "geometric estimate above 0.25");
  t.expect(inv.nondecreasing, "{1/n} estimate decreases as the window tightens");
  t.note("t = 2^4..2^20, geometric " + geo_values);
  t.note("{1/n} " + inv_values);
}

void sqrt_ultra(Tally& t) {
  const std::size_t n = 10000;
  const auto coords = sample_coordinates(make_family(FamilyKind::kSqrtUltra), n);
  const SqrtUltraSpace ultra(coords);
  const LineSpace line(coords);
  const auto level = sequence_partition(n, n);
  const double R_ultra = partition_stats(ultra, level).log_ratio;
  const double R_line = partition_stats(line, level).log_ratio;
  const double nn = static_cast<double>(n);
  // max{sqrt x, sqrt y}: delta = n^-1/2, gamma = (n-1)^-1/2.
  t.expect(close(R_ultra, std::log(nn - 1.0) / std::log(nn), 1e-12),
           "(X, d) R differs from closed form");
  t.expect(close(R_line, (std::log(nn) + std::log(nn - 1.0)) / std::log(nn), 1e-9),
           "(X, |.|) R differs from closed form");
  t.expect(std::abs(R_ultra - 1.0) <= 1e-3, "(X, d) R_n = " + fmt(R_ultra));
  t.expect(std::abs(R_line - 2.0) <= 1e-3, "(X, |.|) R_n = " + fmt(R_line));
  const auto lip = lipschitz_constant(ultra, line);
  t.expect(lip.constant <= 1.0, "identity Lipschitz constant " + fmt(lip.constant));
  t.note("R(X, d) " + fmt(R_ultra) + ", R(X, |.|) " + fmt(R_line) + ", Lipschitz " +
         fmt(lip.constant));
}

void hyperspace(Tally& t) {
  testing::Rng rng(20240505);
  for (int trial = 0; trial < 3; ++trial) {
    const auto x = testing::random_ultrametric(rng, 8);
    t.expect(is_ultrametric(x).ok, "base space is not ultrametric");
    const auto h = hausdorff_hyperspace(x, 8);
    t.expect(h.space.size() == 255, "hyperspace has " + std::to_string(h.space.size()) + " points");
    const auto check = is_ultrametric(h.space);
    t.expect(check.ok, "hyperspace violates the strong triangle inequality by " +
                           fmt(check.worst_violation));
  }
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<void(Tally&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "case formulas", 3.0, case_formulas},
      {2, "divergence and vanishing", 1.0, divergence_and_vanishing},
      {3, "ultrametrization certificate", 2.0, ultrametrization},
      {4, "factorial comparison ultrametric", 1.0, factorial_comparison},
      {5, "threshold dominance", 60.0, threshold_dominance},
      {6, "product laws", 30.0, product_laws},
      {7, "subspace monotonicity", 10.0, subspace_monotonicity},
      {8, "snowflake invariance", 10.0, snowflake_invariance},
      {9, "embedding", 5.0, embedding},
      {10, "dimension estimator", 30.0, dimension_estimator},
      {11, "sqrt ultrametric comparison", 5.0, sqrt_ultra},
      {12, "hyperspace", 10.0, hyperspace},
  };
  return all;
}

}  // namespace
}  // namespace metriclab

int main(int argc, char** argv) {
  using metriclab::Tally;
  std::set<int> only;
  std::set<int> allowed;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if ((arg == "--only" || arg == "--allow-fail") && i + 1 < argc) {
      (arg == "--only" ? only : allowed).insert(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--only K]... [--allow-fail K]...\n", argv[0]);
      return 2;
    }
  }

  int failed = 0;
  int blocking = 0;
  for (const auto& c : metriclab::criteria()) {
    if (!only.empty() && !only.count(c.id)) continue;
    Tally tally;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(tally);
    } catch (const std::exception& e) {
      tally.expect(false, std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    tally.expect(seconds <= c.budget_seconds,
                 "over the " + metriclab::fmt(c.budget_seconds) + " s budget");
    const bool pass = tally.ok();
    std::printf("%s %2d %-34s %7.3f s  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, seconds,
                tally.summary().c_str());
    std::fflush(stdout);
    if (!pass) {
      ++failed;
      if (!allowed.count(c.id)) ++blocking;
    }
  }
  std::printf("%d failed, %d not allowed to fail\n", failed, blocking);
  return blocking == 0 ? 0 : 1;
}
