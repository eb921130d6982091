#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "netsig/error.hpp"
#include "netsig/stats.hpp"
#include "netsig/util.hpp"
#include "oracles.hpp"

using namespace netsig;
using namespace netsig::stats;

namespace {

std::vector<double> random_series(Rng& rng) {
  const auto n = static_cast<std::size_t>(rng.uniform_int(2, 60));
  std::vector<double> v;
  const bool discrete = rng.bernoulli(0.3);
  for (std::size_t i = 0; i < n; ++i) {
    v.push_back(discrete ? static_cast<double>(rng.uniform_int(0, 4)) : rng.normal() * 10 + 3);
  }
  return v;
}

Matrix blobs(Rng& rng, std::size_t per_blob, const std::vector<std::vector<double>>& centers) {
  Matrix rows;
  for (const auto& c : centers) {
    for (std::size_t i = 0; i < per_blob; ++i) {
      std::vector<double> r;
      for (double x : c) r.push_back(x + rng.normal());
      rows.push_back(r);
    }
  }
  return rows;
}

}  // namespace

TEST(ZScore, ConstantSeries) { EXPECT_EQ(score_zscore(std::vector<double>{5, 5, 5, 5}), std::vector<double>(4, 0.0)); }

TEST(ZScore, HandArithmetic) {
  const auto s = score_zscore(std::vector<double>{0, 0, 0, 0, 10});
  EXPECT_DOUBLE_EQ(s[4], 2.0);
  EXPECT_DOUBLE_EQ(s[0], 0.5);
}

TEST(ZScore, TooShort) {
  try {
    score_zscore(std::vector<double>{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SeriesTooShort);
  }
  EXPECT_THROW(score_modified_zscore(std::vector<double>{}), Error);
}

TEST(ZScore, AffineInvariance) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    auto v = random_series(rng);
    const double a = (rng.bernoulli(0.5) ? 1 : -1) * (0.1 + rng.uniform01() * 5), b = rng.normal() * 100;
    std::vector<double> w;
    for (double x : v) w.push_back(a * x + b);
    const auto s1 = score_zscore(v), s2 = score_zscore(w), ref = oracle::zscore(v);
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_NEAR(s1[i], s2[i], 1e-9 * std::max(1.0, s1[i]));
      EXPECT_NEAR(s1[i], ref[i], 1e-9 * std::max(1.0, s1[i]));
      // Flags at a threshold away from any score are unchanged.
      if (std::fabs(s1[i] - 3.0) > 1e-6) EXPECT_EQ(s1[i] > 3.0, s2[i] > 3.0);
    }
  }
}

TEST(ModifiedZScore, HandArithmetic) {
  const auto s = score_modified_zscore(std::vector<double>{1, 2, 3, 4, 5});
  EXPECT_NEAR(s[0], 1.349, 1e-12);
  EXPECT_NEAR(s[1], 0.6745, 1e-12);
  EXPECT_EQ(s[2], 0.0);
  EXPECT_NEAR(s[4], 1.349, 1e-12);
}

TEST(ModifiedZScore, ConstantAndSentinel) {
  EXPECT_EQ(score_modified_zscore(std::vector<double>{7, 7, 7}), std::vector<double>(3, 0.0));
  const auto s = score_modified_zscore(std::vector<double>{1, 1, 1, 1, 100});
  EXPECT_EQ(s[0], 0.0);
  EXPECT_TRUE(s[4] > 3.5);
  EXPECT_TRUE(std::isinf(s[4]));
}

TEST(ModifiedZScore, MatchesBruteForceOracle) {
  Rng rng(1000);
  for (int t = 0; t < 1000; ++t) {
    const auto v = random_series(rng);
    const auto got = score_modified_zscore(v);
    const auto want = oracle::modified_zscore(v);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (std::isinf(want[i])) {
        ASSERT_TRUE(std::isinf(got[i]));
      } else {
        ASSERT_NEAR(got[i], want[i], 1e-12) << "series " << t;
      }
    }
  }
}

TEST(Percentile, Interpolates) {
  const std::vector<double> v{4, 1, 3, 2};
  EXPECT_EQ(percentile(v, 0), 1.0);
  EXPECT_EQ(percentile(v, 100), 4.0);
  EXPECT_DOUBLE_EQ(percentile(v, 50), 2.5);
  EXPECT_EQ(median(v), 2.5);
}

TEST(Gmm, IdenticalPointsSingleComponent) {
  const Matrix rows(10, std::vector<double>{2.0, -1.0});
  GmmConfig c;
  c.components = 1;
  const auto m = fit_gmm(rows, c);
  ASSERT_EQ(m.components(), 1u);
  EXPECT_EQ(m.weights[0], 1.0);
  EXPECT_NEAR(m.means[0][0], 2.0, 1e-12);
  EXPECT_NEAR(m.means[0][1], -1.0, 1e-12);
}

TEST(Gmm, IdenticalPointsFallBackToOneComponent) {
  const Matrix rows(10, std::vector<double>{1.0});
  GmmConfig c;
  c.components = 3;
  const auto m = fit_gmm(rows, c);
  EXPECT_EQ(m.components(), 1u);
  EXPECT_FALSE(m.warnings.empty());
}

TEST(Gmm, RecoversSeparatedBlobs) {
  Rng rng(42);
  const auto rows = blobs(rng, 2000, {{0, 0}, {12, -8}});
  GmmConfig c;
  c.components = 2;
  c.seed = 7;
  const auto m = fit_gmm(rows, c);
  ASSERT_EQ(m.components(), 2u);
  auto first = m.means[0][0] < m.means[1][0] ? 0 : 1;
  EXPECT_NEAR(m.means[first][0], 0, 0.1);
  EXPECT_NEAR(m.means[first][1], 0, 0.1);
  EXPECT_NEAR(m.means[1 - first][0], 12, 0.1);
  EXPECT_NEAR(m.means[1 - first][1], -8, 0.1);
}

TEST(Gmm, LogLikelihoodMonotoneAndNormalized) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(seed);
    const auto rows = blobs(rng, 40, {{0, 0, 0}, {3, 1, -2}, {-4, 5, 1}});
    GmmConfig c;
    c.components = 3;
    c.seed = seed;
    const auto m = fit_gmm(rows, c);
    for (std::size_t i = 1; i < m.log_likelihood_history.size(); ++i) {
      ASSERT_GE(m.log_likelihood_history[i], m.log_likelihood_history[i - 1] - 1e-9) << "seed " << seed;
    }
    double wsum = 0;
    for (double w : m.weights) wsum += w;
    EXPECT_NEAR(wsum, 1.0, 1e-12);
    for (const auto& r : responsibilities(m, rows)) {
      double s = 0;
      for (double x : r) s += x;
      ASSERT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Gmm, ScoresMatchDirectDensity) {
  GmmModel m;
  m.weights = {0.3, 0.7};
  m.means = {{0, 1}, {4, -2}};
  m.variances = {{1, 0.5}, {2, 3}};
  Rng rng(8);
  Matrix pts;
  for (int i = 0; i < 20; ++i) pts.push_back({rng.normal() * 3, rng.normal() * 3});
  const auto scores = score_gmm(m, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(scores[i], -std::log(oracle::mixture_density(m.weights, m.means, m.variances, pts[i])), 1e-9);
  }
  EXPECT_THROW(score_gmm(m, Matrix{{1.0}}), Error);
}

TEST(Gmm, ComponentMeanScoresLowest) {
  GmmModel m;
  m.weights = {1.0};
  m.means = {{1, 1}};
  m.variances = {{1, 1}};
  const auto s = score_gmm(m, Matrix{{1, 1}, {2, 1}, {1, -3}});
  EXPECT_LT(s[0], s[1]);
  EXPECT_LT(s[0], s[2]);
}

TEST(Gmm, TrainingPercentileFlagsAboutThatFraction) {
  Rng rng(19);
  const auto rows = blobs(rng, 100, {{0, 0}, {6, 6}});
  GmmConfig c;
  c.components = 2;
  const auto m = fit_gmm(rows, c);
  const auto s = score_gmm(m, rows);
  const double cut = percentile(s, 95);
  const auto flagged = std::count_if(s.begin(), s.end(), [&](double x) { return x > cut; });
  EXPECT_NEAR(static_cast<double>(flagged), 0.05 * rows.size(), 1.0);
}
