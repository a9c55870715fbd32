/*
 * Copyright 2026 The TSL Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tsl/objective.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "oracles.h"
#include "test_util.h"

namespace tsl {
namespace {

using testing::RandomRows;
using testing::RandomSpd;

struct Fixture {
  EmbeddingSet pool;
  MahalanobisMetric metric;
  PairGeometry geometry;

  Fixture(RowMatrix rows, Eigen::MatrixXd cov)
      : pool(EmbeddingSet::Unlabeled(std::move(rows), Role::kUnlabeledMix)),
        metric(MahalanobisMetric::FromCovariance(std::move(cov), 0)),
        geometry(pool, metric) {}
};

Fixture TwoPoints(double ax, double ay, double bx, double by,
                  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2)) {
  RowMatrix rows(2, 2);
  rows << ax, ay, bx, by;
  return Fixture(rows, std::move(cov));
}

const std::vector<IndexPair> kOnePair = {{0, 1}};

Projector Identity(std::size_t d) {
  return InitProjector(d, d, InitScheme::kIdentity, 1);
}

TEST(ObjectiveTest, HandLosses) {
  const Fixture f = TwoPoints(0, 0, 2, 0);
  const Projector p = Identity(2);
  EXPECT_DOUBLE_EQ(LossSkeleton(p, f.geometry, kOnePair, 0.1), 1.8);
  EXPECT_DOUBLE_EQ(LossClose(p, f.geometry, kOnePair, 0.5), 1.0);
  EXPECT_EQ(LossLoose(p, f.geometry, kOnePair, 6.0), 0.0);
  EXPECT_EQ(LossClose(p, f.geometry, {}, 0.5), 0.0);

  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
  cov(0, 0) = 100;  // MD((0,0), (20,0)) = 2
  const Fixture far = TwoPoints(0, 0, 20, 0, cov);
  EXPECT_DOUBLE_EQ(LossLoose(p, far.geometry, kOnePair, 6.0), 8.0);

  const Fixture neg = TwoPoints(0, 0, 0, 1);
  EXPECT_EQ(LossNegative(p, neg.geometry, kOnePair, 3.0), 2.0);
  EXPECT_EQ(LossNegative(p, TwoPoints(0, 0, 0, 5).geometry, kOnePair, 3.0),
            0.0);
}

TEST(ObjectiveTest, HandNegativeGradient) {
  const Fixture f = TwoPoints(0, 1, 0, 0);
  StepBatches batches;
  batches.negative = kOnePair;
  const Eigen::MatrixXd g =
      Gradient(Identity(2), f.geometry, batches, LossWeights{});
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(2, 2);
  expected(1, 1) = -1;
  EXPECT_EQ(g, expected);
}

TEST(ObjectiveTest, InactiveHingesGiveZeroGradient) {
  const Fixture f = TwoPoints(0, 0, 0, 5);
  StepBatches batches;
  batches.negative = kOnePair;
  batches.loose = kOnePair;
  const LossWeights w;
  EXPECT_EQ(EvaluateLoss(Identity(2), f.geometry, batches, w).total, 0.0);
  EXPECT_TRUE(Gradient(Identity(2), f.geometry, batches, w).isZero(0));
}

TEST(ObjectiveTest, ZeroProjectedDifference) {
  const Fixture f = TwoPoints(1, 1, 1, 1);
  StepBatches batches;
  batches.negative = kOnePair;
  const LossWeights w;
  EXPECT_EQ(EvaluateLoss(Identity(2), f.geometry, batches, w).l_f, 3.0);
  EXPECT_TRUE(Gradient(Identity(2), f.geometry, batches, w).isZero(0));
}

TEST(ObjectiveTest, KinkGivesZeroSubgradient) {
  const Fixture f = TwoPoints(0, 0, 0, 3);
  StepBatches batches;
  batches.negative = kOnePair;
  EXPECT_TRUE(
      Gradient(Identity(2), f.geometry, batches, LossWeights{}).isZero(0));
}

TEST(ObjectiveTest, EqualCoefficientsGiveEqualTerms) {
  std::mt19937_64 rng(1);
  const Fixture f(RandomRows(rng, 10, 3), RandomSpd(rng, 3));
  const std::vector<IndexPair> pairs = {{0, 1}, {2, 5}, {3, 9}, {4, 7}};
  const Projector p(RandomRows(rng, 3, 3));
  EXPECT_EQ(LossClose(p, f.geometry, pairs, 0.7),
            LossLoose(p, f.geometry, pairs, 0.7));
  EXPECT_GE(LossClose(p, f.geometry, pairs, 0.5),
            LossLoose(p, f.geometry, pairs, 6.0));
}

std::vector<IndexPair> RandomPairs(std::mt19937_64& rng, std::size_t n,
                                   std::size_t count) {
  std::uniform_int_distribution<PointIndex> pick(
      0, static_cast<PointIndex>(n - 1));
  std::vector<IndexPair> out;
  while (out.size() < count) {
    const PointIndex a = pick(rng), b = pick(rng);
    if (a != b) out.push_back({a, b});
  }
  return out;
}

std::vector<oracle::Pair> AsOracle(const std::vector<IndexPair>& pairs) {
  std::vector<oracle::Pair> out;
  for (const auto& p : pairs) out.emplace_back(p.first, p.second);
  return out;
}

TEST(ObjectiveTest, MatchesScalarOracleAndIsAdditive) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd cov = RandomSpd(rng, 4);
    const RowMatrix rows = RandomRows(rng, 30, 4, 2.0);
    const Fixture f(rows, cov);
    const Projector p(RandomRows(rng, 3, 4));
    const oracle::BruteMetric brute(cov);
    StepBatches b;
    b.labeled = RandomPairs(rng, 30, 8);
    b.close = RandomPairs(rng, 30, 8);
    b.loose = RandomPairs(rng, 30, 8);
    b.negative = RandomPairs(rng, 30, 8);
    const LossWeights w{0.2, 0.6, 1.5, 4.0};
    const LossBreakdown loss = EvaluateLoss(p, f.geometry, b, w);

    const Eigen::MatrixXd pw = p.weights();
    const double expect_a = oracle::ScalarPositiveLoss(
        pw, rows, AsOracle(b.labeled), brute, w.lambda1);
    const double expect_c = oracle::ScalarPositiveLoss(
        pw, rows, AsOracle(b.close), brute, w.lambda2);
    const double expect_l = oracle::ScalarPositiveLoss(
        pw, rows, AsOracle(b.loose), brute, w.lambda3);
    const double expect_f =
        oracle::ScalarNegativeLoss(pw, rows, AsOracle(b.negative), w.margin);
    EXPECT_NEAR(loss.l_a, expect_a, 1e-12 * std::max(1.0, expect_a));
    EXPECT_NEAR(loss.l_c, expect_c, 1e-12 * std::max(1.0, expect_c));
    EXPECT_NEAR(loss.l_l, expect_l, 1e-12 * std::max(1.0, expect_l));
    EXPECT_NEAR(loss.l_f, expect_f, 1e-12 * std::max(1.0, expect_f));
    EXPECT_EQ(loss.total, loss.l_a + loss.l_c + loss.l_l + loss.l_f);
    EXPECT_GE(loss.l_a, 0.0);
    EXPECT_GE(loss.l_f, 0.0);

    Eigen::MatrixXd combined;
    const LossBreakdown again =
        EvaluateLossAndGradient(p, f.geometry, b, w, combined);
    EXPECT_EQ(again.total, loss.total);
    EXPECT_EQ(combined, Gradient(p, f.geometry, b, w));
  }
}

TEST(ObjectiveTest, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(13);
  int checked = 0;
  while (checked < 10) {
    const Eigen::MatrixXd cov = RandomSpd(rng, 3);
    const RowMatrix rows = RandomRows(rng, 12, 3, 2.0);
    const Fixture f(rows, cov);
    const Eigen::MatrixXd pw = RandomRows(rng, 2, 3);
    StepBatches b;
    b.labeled = RandomPairs(rng, 12, 4);
    b.close = RandomPairs(rng, 12, 4);
    b.loose = RandomPairs(rng, 12, 4);
    b.negative = RandomPairs(rng, 12, 4);
    const LossWeights w{0.1, 0.5, 1.2, 3.0};

    // Stay away from kinks.
    bool near_kink = false;
    const Projector p(pw);
    auto check = [&](const std::vector<IndexPair>& pairs, double coef,
                     bool negative) {
      for (const auto& q : pairs) {
        const double norm =
            (pw * (f.geometry.point(q.first) - f.geometry.point(q.second))
                      .transpose())
                .norm();
        const double slack =
            negative ? coef - norm
                     : norm - coef * f.geometry.mahalanobis(q.first, q.second);
        near_kink |= std::abs(slack) <= 1e-3;
      }
    };
    check(b.labeled, w.lambda1, false);
    check(b.close, w.lambda2, false);
    check(b.loose, w.lambda3, false);
    check(b.negative, w.margin, true);
    if (near_kink) continue;

    const Eigen::MatrixXd analytic = Gradient(p, f.geometry, b, w);
    const Eigen::MatrixXd numeric = oracle::CentralDifferences(
        [&](const Eigen::MatrixXd& probe) {
          return EvaluateLoss(Projector(probe), f.geometry, b, w).total;
        },
        pw, 1e-5);
    for (Eigen::Index i = 0; i < analytic.size(); ++i) {
      const double a = analytic.data()[i], n = numeric.data()[i];
      EXPECT_LT(std::abs(a - n) / std::max({1.0, std::abs(a), std::abs(n)}),
                1e-4);
    }
    ++checked;
  }
}

}  // namespace
}  // namespace tsl
