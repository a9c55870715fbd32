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

#include <stdexcept>

namespace tsl {
namespace {

enum class Hinge { kPositive, kNegative };

// Sums one hinge family over `pairs`. When `gradient` is non-null its
// subgradient is accumulated into it.
double AccumulateHinge(const Projector& projector, const PairGeometry& geometry,
                       std::span<const IndexPair> pairs, Hinge kind,
                       double parameter, Eigen::MatrixXd* gradient) {
  if (pairs.empty()) return 0.0;
  if (projector.d_in() != geometry.dim()) {
    throw std::invalid_argument("projector input dim does not match the pool");
  }
  const auto m = static_cast<Eigen::Index>(pairs.size());
  const auto d_in = static_cast<Eigen::Index>(geometry.dim());

  Eigen::MatrixXd diffs(d_in, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const IndexPair& p = pairs[static_cast<std::size_t>(c)];
    diffs.col(c) =
        (geometry.point(p.first) - geometry.point(p.second)).transpose();
  }
  Eigen::MatrixXd projected = projector.weights() * diffs;

  double loss = 0.0;
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(m);
  bool any_active = false;
  for (Eigen::Index c = 0; c < m; ++c) {
    const double norm = projected.col(c).norm();
    double slack;
    if (kind == Hinge::kPositive) {
      const IndexPair& p = pairs[static_cast<std::size_t>(c)];
      slack = norm - parameter * geometry.mahalanobis(p.first, p.second);
    } else {
      slack = parameter - norm;
    }
    if (slack > 0) {
      loss += slack;
      if (norm > 0) {
        scale[c] = (kind == Hinge::kPositive ? 1.0 : -1.0) / norm;
        any_active = true;
      }
    }
  }
  if (gradient && any_active) {
    projected = projected * scale.asDiagonal();
    gradient->noalias() += projected * diffs.transpose();
  }
  return loss;
}

LossBreakdown Accumulate(const Projector& projector,
                         const PairGeometry& geometry,
                         const StepBatches& batches, const LossWeights& weights,
                         Eigen::MatrixXd* gradient) {
  LossBreakdown loss;
  loss.l_a = AccumulateHinge(projector, geometry, batches.labeled,
                             Hinge::kPositive, weights.lambda1, gradient);
  loss.l_c = AccumulateHinge(projector, geometry, batches.close,
                             Hinge::kPositive, weights.lambda2, gradient);
  loss.l_l = AccumulateHinge(projector, geometry, batches.loose,
                             Hinge::kPositive, weights.lambda3, gradient);
  loss.l_f = AccumulateHinge(projector, geometry, batches.negative,
                             Hinge::kNegative, weights.margin, gradient);
  loss.total = loss.l_a + loss.l_c + loss.l_l + loss.l_f;
  return loss;
}

}  // namespace

PairGeometry::PairGeometry(const EmbeddingSet& pool,
                           const MahalanobisMetric& metric)
    : points_(pool.rows()), whitened_(metric.WhitenRows(pool.rows())) {}

LossBreakdown& LossBreakdown::operator+=(const LossBreakdown& other) {
  l_a += other.l_a;
  l_c += other.l_c;
  l_l += other.l_l;
  l_f += other.l_f;
  total = l_a + l_c + l_l + l_f;
  return *this;
}

LossBreakdown LossBreakdown::Scaled(double factor) const {
  LossBreakdown out{l_a * factor, l_c * factor, l_l * factor, l_f * factor, 0};
  out.total = out.l_a + out.l_c + out.l_l + out.l_f;
  return out;
}

double PositiveHingeLoss(const Projector& projector,
                         const PairGeometry& geometry,
                         std::span<const IndexPair> pairs, double coefficient) {
  return AccumulateHinge(projector, geometry, pairs, Hinge::kPositive,
                         coefficient, nullptr);
}

double LossNegative(const Projector& projector, const PairGeometry& geometry,
                    std::span<const IndexPair> pairs, double margin) {
  return AccumulateHinge(projector, geometry, pairs, Hinge::kNegative, margin,
                         nullptr);
}

LossBreakdown EvaluateLoss(const Projector& projector,
                           const PairGeometry& geometry,
                           const StepBatches& batches,
                           const LossWeights& weights) {
  return Accumulate(projector, geometry, batches, weights, nullptr);
}

Eigen::MatrixXd Gradient(const Projector& projector,
                         const PairGeometry& geometry,
                         const StepBatches& batches,
                         const LossWeights& weights) {
  Eigen::MatrixXd gradient = Eigen::MatrixXd::Zero(projector.weights().rows(),
                                                   projector.weights().cols());
  Accumulate(projector, geometry, batches, weights, &gradient);
  return gradient;
}

LossBreakdown EvaluateLossAndGradient(const Projector& projector,
                                      const PairGeometry& geometry,
                                      const StepBatches& batches,
                                      const LossWeights& weights,
                                      Eigen::MatrixXd& gradient) {
  gradient.setZero(projector.weights().rows(), projector.weights().cols());
  return Accumulate(projector, geometry, batches, weights, &gradient);
}

}  // namespace tsl
