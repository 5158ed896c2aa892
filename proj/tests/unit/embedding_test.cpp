#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>

#include "metriclab/embedding.hpp"
#include "metriclab/logratio.hpp"
#include "metriclab/zoo.hpp"
#include "support/generators.hpp"

namespace metriclab {
namespace {

// Largest r2-separated subset of `ball`, by trying every subset.
std::size_t brute_separated(const FiniteMetricSpace& x, const std::vector<std::size_t>& ball,
                            double r2) {
  std::size_t best = 0;
  const std::size_t m = ball.size();
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    bool ok = true;
    for (std::size_t a = 0; a < m && ok; ++a) {
      for (std::size_t b = a + 1; b < m && ok; ++b) {
        if (((mask >> a) & 1u) && ((mask >> b) & 1u) && x.distance(ball[a], ball[b]) < r2)
          ok = false;
      }
    }
    if (ok) best = std::max<std::size_t>(best, static_cast<std::size_t>(std::popcount(mask)));
  }
  return best;
}

TEST(SeparatedCount, SmallExamples) {
  const auto one = validate({{0}});
  EXPECT_EQ(separated_count(one, 0, 1.0, 0.5), 1u);
  const auto x = testing::line({0.0, 0.5, 1.0});
  EXPECT_EQ(separated_count(x, 0, 1.0, 0.4), 3u);
  EXPECT_THROW(separated_count(x, 0, 0.4, 1.0), ParameterError);
}

TEST(SeparatedCount, GeometricSequence) {
  std::vector<double> xs;
  for (int k = 1; k <= 12; ++k) xs.push_back(std::ldexp(1.0, -k));
  xs.push_back(0.0);
  const auto x = testing::line(xs);
  const std::size_t centre = xs.size() - 1;
  const double r1 = std::ldexp(1.0, -3);
  const double r2 = std::ldexp(1.0, -8);
  const auto ball = closed_ball(x, centre, r1);
  EXPECT_EQ(ball.size(), 11u);
  // The closed ball holds the centre 0 as well as 2^-3..2^-8.
  EXPECT_EQ(separated_count(x, centre, r1, r2), brute_separated(x, ball, r2));
  EXPECT_EQ(separated_count(x, centre, r1, r2), 7u);
  EXPECT_EQ(separated_count(LineSpace(xs), centre, r1, r2), 7u);
  const std::vector<std::size_t> explicit_ball{2, 3, 4, 5, 6, 7};
  EXPECT_EQ(separated_count_in(x, explicit_ball, r2), 6u);
}

TEST(SeparatedCount, ExactMatchesBruteForce) {
  testing::Rng rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = testing::random_euclidean(rng, 12);
    const auto ball = closed_ball(x, 0, 0.6);
    EXPECT_EQ(separated_count(x, 0, 0.6, 0.2), brute_separated(x, ball, 0.2));
  }
}

TEST(SeparatedCount, GreedyIsMaximalOnLargeBalls) {
  testing::Rng rng(2);
  const auto x = testing::random_euclidean(rng, 60);
  const auto ball = closed_ball(x, 0, 0.8);
  ASSERT_GT(ball.size(), kExactSeparatedLimit);
  const double r2 = 0.15;
  const std::size_t J = separated_count_in(x, ball, r2);
  // Rebuild the greedy set and check that nothing can be added to it.
  std::vector<std::size_t> picked;
  for (std::size_t p : ball) {
    bool ok = true;
    for (std::size_t q : picked) ok = ok && x.distance(p, q) >= r2;
    if (ok) picked.push_back(p);
  }
  EXPECT_EQ(J, picked.size());
  for (std::size_t p : ball) {
    bool blocked = false;
    for (std::size_t q : picked) blocked = blocked || x.distance(p, q) < r2;
    EXPECT_TRUE(blocked);
  }
}

TEST(SeparatedCount, LineSweepMatchesDense) {
  testing::Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xs(15);
    for (auto& v : xs) v = u(rng);
    const auto dense = testing::line(xs);
    const LineSpace implicit(xs);
    for (std::size_t c = 0; c < xs.size(); c += 4) {
      EXPECT_EQ(separated_count(implicit, c, 0.5, 0.1), separated_count(dense, c, 0.5, 0.1));
    }
  }
}

std::vector<std::pair<double, double>> dyadic_grid(int levels) {
  std::vector<std::pair<double, double>> grid;
  for (int i = 1; i <= levels; ++i) {
    for (int j = i + 1; j <= levels; ++j)
      grid.emplace_back(std::ldexp(1.0, -i), std::ldexp(1.0, -j));
  }
  return grid;
}

TEST(Dimension, SinglePointIsZero) {
  const auto one = validate({{0}});
  const auto grid = dyadic_grid(10);
  const auto est = estimate_metric_dimension(one, {1.0, 4.0}, grid);
  EXPECT_EQ(est.estimate, 0.0);
  EXPECT_THROW(estimate_metric_dimension(one, {1e-9, 4.0}, grid), EmptyWindow);
}

TEST(Dimension, SamplesRespectTheWindow) {
  testing::Rng rng(4);
  const auto x = testing::random_euclidean(rng, 40);
  const auto grid = dyadic_grid(12);
  const auto est = estimate_metric_dimension(x, {0.5, 8.0}, grid);
  ASSERT_FALSE(est.samples.empty());
  double best = 0.0;
  for (const auto& s : est.samples) {
    EXPECT_GE(s.J, 1u);
    EXPECT_LT(s.r1, 0.5);
    EXPECT_GT(s.r1 / s.r2, 8.0);
    EXPECT_NEAR(s.value, std::log(double(s.J)) / std::log(s.r1 / s.r2), 1e-15);
    best = std::max(best, s.value);
  }
  EXPECT_EQ(est.estimate, best);
}

TEST(Dimension, SnowflakeScalesEachSample) {
  testing::Rng rng(5);
  const auto x = testing::random_euclidean(rng, 30);
  const double s = 0.6;
  const auto flake = snowflake(x, s);
  for (const auto& [r1, r2] : dyadic_grid(8)) {
    for (std::size_t c = 0; c < 30; c += 7) {
      const std::size_t J = separated_count(x, c, r1, r2);
      const std::size_t Js = separated_count(flake, c, std::pow(r1, s), std::pow(r2, s));
      EXPECT_EQ(J, Js);
      const double v = dimension_value(J, r1, r2);
      const double vs = dimension_value(Js, std::pow(r1, s), std::pow(r2, s));
      EXPECT_NEAR(vs, v / s, 1e-12);
    }
  }
}

TEST(MinEmbeddingDimension, Examples) {
  EXPECT_DOUBLE_EQ(embedding_dimension_bound(1, 2, 1), 10.0);
  EXPECT_EQ(min_embedding_dimension(1, 2, 1), 11u);
  EXPECT_DOUBLE_EQ(embedding_dimension_bound(0, 2, 1), 5.0);
  EXPECT_EQ(min_embedding_dimension(0, 2, 1), 6u);
  EXPECT_THROW(min_embedding_dimension(1, 1, 1), ParameterError);
  EXPECT_THROW(min_embedding_dimension(1, kInfinity, 1), ParameterError);
  EXPECT_THROW(min_embedding_dimension(-1, 2, 1), ParameterError);
  EXPECT_THROW(min_embedding_dimension(1, 2, 0), ParameterError);
}

TEST(MinEmbeddingDimension, SpecialCaseIdentity) {
  testing::Rng rng(6);
  std::uniform_real_distribution<double> D(0.0, 5.0);
  std::uniform_real_distribution<double> R(1.01, 6.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double d = D(rng);
    const double r = R(rng);
    EXPECT_NEAR(embedding_dimension_bound(d, r, r - 1), (d + r - 1) * (2 * r + 1),
                1e-12 * (d + r) * r);
  }
}

double box_gap(const Box& a, const Box& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.centre.size(); ++k)
    m = std::max(m, std::abs(a.centre[k] - b.centre[k]));
  return m - a.radius - b.radius;
}

TEST(Packing, CapacityExample) {
  EXPECT_EQ(boxes_per_axis(0.5, 0.1, 0.05), 4u);
  EXPECT_DOUBLE_EQ(packing_capacity(0.5, 0.1, 0.05, 2), 16.0);
  const Box parent{{0.0, 0.0}, 0.5, 0};
  const auto boxes = pack_boxes(parent, 0, 0.1, 0.05, 16, 4);
  ASSERT_EQ(boxes.size(), 16u);
  for (std::size_t a = 0; a < boxes.size(); ++a) {
    for (std::size_t k = 0; k < 2; ++k) {
      EXPECT_LE(std::abs(boxes[a].centre[k]) + 0.1, 0.5 + 1e-12);
    }
    for (std::size_t b = a + 1; b < boxes.size(); ++b) {
      EXPECT_GE(box_gap(boxes[a], boxes[b]), 0.05 - 1e-12);
    }
  }
  EXPECT_THROW(pack_boxes(parent, 0, 0.1, 0.05, 17, 4), PackingInfeasible);
}

TEST(Embed, TwoPointsOnALine) {
  const auto x = validate({{0, 0.3}, {0.3, 0}});
  EmbeddingOptions opts;
  opts.N = 1;
  opts.epsilon = 0.1;
  const auto result = embed_chain(x, dendrogram_chain(x), opts);
  EXPECT_TRUE(result.audits_pass());
  EXPECT_GE(box_distance(result.coords[0], result.coords[1]), 0.3 - 1e-12);
}

// γ_{n+1} <= |f(x) - f(y)| <= 2 δ_n for pairs split at rooted level n + 1.
void expect_box_sandwich(const EmbeddingResult& result) {
  const auto& chain = result.chain;
  const std::size_t n_points = result.coords.size();
  for (std::size_t i = 0; i < n_points; ++i) {
    for (std::size_t j = i + 1; j < n_points; ++j) {
      std::size_t joined = 0;
      for (std::size_t l = 0; l < chain.size(); ++l) {
        if (chain.levels[l].same_block(i, j)) joined = l;
      }
      ASSERT_LT(joined + 1, chain.size());
      const double dist = box_distance(result.coords[i], result.coords[j]);
      EXPECT_GE(dist, chain.stats[joined + 1].gamma * (1 - 1e-12));
      EXPECT_LE(dist, 2.0 * chain.stats[joined].delta * (1 + 1e-12));
    }
  }
}

TEST(Embed, PolynomialSubchain) {
  const auto zs = sample(make_family(FamilyKind::kSeqPolynomial, 2.0), 8);
  EXPECT_THROW(
      {
        EmbeddingOptions literal;
        literal.N = 11;
        embed_chain(zs.space, zs.chain, literal);
      },
      PackingInfeasible);
  const auto sub = embedding_subchain(zs.space, zs.chain, 11, 1.0);
  EXPECT_EQ(sub.kept, (std::vector<std::size_t>{0, 2, 8}));
  EmbeddingOptions opts;
  opts.N = 11;
  opts.R_override = profile(zs.chain).estimate;
  const auto result = embed_chain(zs.space, sub.chain, opts);
  EXPECT_TRUE(result.audits_pass());
  for (const auto& a : result.audit) {
    EXPECT_TRUE(a.nested);
    EXPECT_TRUE(a.commutes);
  }
  expect_box_sandwich(result);
  DistortionOptions dopts;
  dopts.strict = false;
  const auto report = verify_embedding_distortion(zs.space, result, dopts);
  EXPECT_TRUE(report.holds());
  EXPECT_GT(report.pairs_asserted, 0u);
}

TEST(Embed, RandomSpacesOnSubchains) {
  testing::Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = testing::random_euclidean(rng, 10);
    const auto chain = dendrogram_chain(x);
    const auto sub = embedding_subchain(x, chain, 3, 0.0);
    EmbeddingOptions opts;
    opts.N = 3;
    opts.epsilon = 0.1;
    const auto result = embed_chain(x, sub.chain, opts);
    EXPECT_TRUE(result.audits_pass());
    expect_box_sandwich(result);
  }
}

TEST(Embed, CapacityIsMonotoneInN) {
  testing::Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = testing::random_ultrametric(rng, 9);
    const auto chain = ball_chain(x);
    std::vector<Partition> levels = chain.levels;
    if (levels.back().block_count() != 9) levels.push_back(Partition::singletons(9));
    const auto full = make_chain(x, levels);
    bool feasible = false;
    for (std::size_t N = 1; N <= 6; ++N) {
      EmbeddingOptions opts;
      opts.N = N;
      opts.epsilon = 0.1;
      bool ok = true;
      try {
        embed_chain(x, full, opts);
      } catch (const PackingInfeasible&) {
        ok = false;
      }
      if (feasible) EXPECT_TRUE(ok) << "N=" << N;
      feasible = feasible || ok;
    }
  }
}

TEST(Embed, Deterministic) {
  const auto zs = sample(make_family(FamilyKind::kSeqGeometric), 6);
  const auto sub = embedding_subchain(zs.space, zs.chain, 4, 0.0);
  EmbeddingOptions opts;
  opts.N = 4;
  opts.epsilon = 0.1;
  const auto a = embed_chain(zs.space, sub.chain, opts);
  const auto b = embed_chain(zs.space, sub.chain, opts);
  EXPECT_EQ(a.coords, b.coords);
}

}  // namespace
}  // namespace metriclab
