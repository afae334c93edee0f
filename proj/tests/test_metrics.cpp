#include <gtest/gtest.h>

#include <random>

#include "fleethealth/errors.hpp"
#include "fleethealth/metrics.hpp"
#include "oracles.hpp"

using namespace fleethealth;

namespace {

struct Fixture {
  std::vector<double> s;
  std::vector<int> y;
};

// Random scores on a coarse grid so ties are common; both classes present.
Fixture random_fixture(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> grid(0, 9);
  Fixture f;
  for (std::size_t i = 0; i < n; ++i) {
    f.s.push_back(grid(rng) / 10.0);
    f.y.push_back(static_cast<int>(rng() % 3 == 0));
  }
  f.y[0] = 1;
  f.y[1] = 0;
  return f;
}

}  // namespace

TEST(Roc, HandExamples) {
  EXPECT_EQ(roc_auc(std::vector<double>{0.9, 0.4, 0.6, 0.2}, std::vector<int>{1, 0, 1, 0}).auc, 1.0);
  EXPECT_EQ(roc_auc(std::vector<double>{0.9, 0.6, 0.4, 0.2}, std::vector<int>{1, 0, 1, 0}).auc, 0.75);
  EXPECT_EQ(roc_auc(std::vector<double>{0.3, 0.3, 0.3}, std::vector<int>{1, 0, 0}).auc, 0.5);
}

TEST(Roc, SingleClassIsRejected) {
  EXPECT_THROW(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), Error);
  EXPECT_THROW(gain_curve(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 0}), Error);
}

TEST(Roc, CurveShapeInvariants) {
  std::mt19937_64 rng(1);
  auto f = random_fixture(rng, 150);
  auto c = roc_auc(f.s, f.y);
  EXPECT_EQ(c.points.front().fpr, 0.0);
  EXPECT_EQ(c.points.front().tpr, 0.0);
  EXPECT_EQ(c.points.back().fpr, 1.0);
  EXPECT_EQ(c.points.back().tpr, 1.0);
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    EXPECT_GE(c.points[k].fpr, c.points[k - 1].fpr);
    EXPECT_GE(c.points[k].tpr, c.points[k - 1].tpr);
    EXPECT_LT(c.points[k].threshold, c.points[k - 1].threshold);
  }
}

TEST(Roc, MatchesPairStatisticOnRandomFixtures) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = random_fixture(rng, 2 + rng() % 199);
    EXPECT_NEAR(roc_auc(f.s, f.y).auc, oracle::pair_auc(f.s, f.y), 1e-12) << "trial " << trial;
  }
}

TEST(Roc, InvariantUnderMonotoneTransforms) {
  std::mt19937_64 rng(5);
  auto f = random_fixture(rng, 120);
  const double base = roc_auc(f.s, f.y).auc;
  std::vector<double> ex, affine;
  for (double v : f.s) {
    ex.push_back(std::exp(v));
    affine.push_back(3.0 * v - 7.0);
  }
  EXPECT_NEAR(roc_auc(ex, f.y).auc, base, 1e-12);
  EXPECT_NEAR(roc_auc(affine, f.y).auc, base, 1e-12);
}

TEST(Roc, ReversedScoresComplementTheArea) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = random_fixture(rng, 20 + rng() % 100);
    std::vector<double> neg;
    for (double v : f.s) neg.push_back(-v);
    EXPECT_NEAR(roc_auc(neg, f.y).auc, 1.0 - roc_auc(f.s, f.y).auc, 1e-12);
  }
}

TEST(Threshold, YoudenWithTieRules) {
  auto perfect = roc_auc(std::vector<double>{0.9, 0.4, 0.6, 0.2}, std::vector<int>{1, 0, 1, 0});
  EXPECT_EQ(select_threshold(perfect), 0.6);
  auto flat = roc_auc(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0});
  EXPECT_EQ(select_threshold(flat), 0.5);
  auto mixed = roc_auc(std::vector<double>{0.9, 0.6, 0.4, 0.2}, std::vector<int>{1, 0, 1, 0});
  EXPECT_EQ(select_threshold(mixed), 0.9);
}

TEST(Gain, PerfectAndWorstModels) {
  std::vector<double> s;
  std::vector<int> best, worst;
  for (int i = 0; i < 10; ++i) {
    s.push_back(1.0 - i / 10.0);
    best.push_back(i < 2 ? 1 : 0);
    worst.push_back(i >= 8 ? 1 : 0);
  }
  auto g = gain_curve(s, best);
  EXPECT_EQ(capture_at(g, 0.2), 1.0);
  EXPECT_EQ(capture_at(g, 0.5), 1.0);
  EXPECT_EQ(capture_at(gain_curve(s, worst), 0.5), 0.0);
}

TEST(Gain, EqualScoresFollowInputOrder) {
  std::vector<double> s(6, 0.5);
  std::vector<int> y{0, 1, 1, 0, 0, 1};
  auto g = gain_curve(s, y);
  ASSERT_EQ(g.points.size(), 7u);
  const double expected[] = {0, 0, 1.0 / 3, 2.0 / 3, 2.0 / 3, 2.0 / 3, 1};
  for (std::size_t k = 0; k < 7; ++k) {
    EXPECT_DOUBLE_EQ(g.points[k].fraction, static_cast<double>(k) / 6.0);
    EXPECT_DOUBLE_EQ(g.points[k].gain, expected[k]);
  }
}

TEST(Gain, MonotoneWithExactEndpoints) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = random_fixture(rng, 30 + rng() % 100);
    auto g = gain_curve(f.s, f.y);
    EXPECT_EQ(g.points.front().gain, 0.0);
    EXPECT_EQ(g.points.back().gain, 1.0);
    EXPECT_EQ(capture_at(g, 0.0), 0.0);
    EXPECT_EQ(capture_at(g, 1.0), 1.0);
    for (std::size_t k = 1; k < g.points.size(); ++k) EXPECT_GE(g.points[k].gain, g.points[k - 1].gain);
    double prev = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double v = capture_at(g, i / 100.0);
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Gain, CaptureUsesStepInterpolation) {
  auto g = gain_curve(std::vector<double>{0.9, 0.8, 0.7, 0.1}, std::vector<int>{1, 0, 1, 0});
  EXPECT_EQ(capture_at(g, 0.49), 0.5);
  EXPECT_EQ(capture_at(g, 0.5), 0.5);
  EXPECT_EQ(capture_at(g, 0.75), 1.0);
  EXPECT_THROW(capture_at(g, 1.5), Error);
}

TEST(Tables, CsvColumns) {
  auto c = roc_auc(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0});
  EXPECT_EQ(roc_table(c).header, (std::vector<std::string>{"fpr", "tpr", "threshold"}));
  EXPECT_EQ(roc_table(c).rows.size(), c.points.size());
  auto g = gain_curve(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0});
  EXPECT_EQ(gain_table(g).header, (std::vector<std::string>{"fraction", "gain"}));
}
