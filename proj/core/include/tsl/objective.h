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

#ifndef TSL_OBJECTIVE_H_
#define TSL_OBJECTIVE_H_

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "tsl/embedding.h"
#include "tsl/metric.h"
#include "tsl/mining.h"
#include "tsl/projector.h"

namespace tsl {

// Original-space rows of the mining pool together with their whitened form,
// so Mahalanobis targets of any pair are one Euclidean norm away. Targets are
// fixed for the whole optimization.
class PairGeometry {
 public:
  PairGeometry(const EmbeddingSet& pool, const MahalanobisMetric& metric);

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  const RowMatrix& points() const { return points_; }

  auto point(std::size_t i) const {
    return points_.row(static_cast<Eigen::Index>(i));
  }
  double mahalanobis(std::size_t i, std::size_t j) const {
    return (whitened_.row(static_cast<Eigen::Index>(i)) -
            whitened_.row(static_cast<Eigen::Index>(j)))
        .norm();
  }

 private:
  RowMatrix points_;
  RowMatrix whitened_;
};

struct LossWeights {
  double lambda1 = 0.1;  // labeled intra-class pairs
  double lambda2 = 0.5;  // close (mutual) pairs
  double lambda3 = 6.0;  // loose (one-directional) pairs
  double margin = 3.0;   // negatives
};

struct LossBreakdown {
  double l_a = 0;
  double l_c = 0;
  double l_l = 0;
  double l_f = 0;
  double total = 0;

  LossBreakdown& operator+=(const LossBreakdown& other);
  LossBreakdown Scaled(double factor) const;
};

// Pairs contributing to one optimization step.
struct StepBatches {
  std::vector<IndexPair> labeled;
  std::vector<IndexPair> close;
  std::vector<IndexPair> loose;
  std::vector<IndexPair> negative;
};

// sum max(0, ||P a - P b|| - coefficient * MD(a, b)) over the pairs.
double PositiveHingeLoss(const Projector& projector,
                         const PairGeometry& geometry,
                         std::span<const IndexPair> pairs, double coefficient);

inline double LossSkeleton(const Projector& p, const PairGeometry& g,
                           std::span<const IndexPair> pairs, double lambda1) {
  return PositiveHingeLoss(p, g, pairs, lambda1);
}
inline double LossClose(const Projector& p, const PairGeometry& g,
                        std::span<const IndexPair> pairs, double lambda2) {
  return PositiveHingeLoss(p, g, pairs, lambda2);
}
inline double LossLoose(const Projector& p, const PairGeometry& g,
                        std::span<const IndexPair> pairs, double lambda3) {
  return PositiveHingeLoss(p, g, pairs, lambda3);
}

// sum max(0, margin - ||P a - P b||) over the pairs.
double LossNegative(const Projector& projector, const PairGeometry& geometry,
                    std::span<const IndexPair> pairs, double margin);

// All four terms and their sum on the same batches.
LossBreakdown EvaluateLoss(const Projector& projector,
                           const PairGeometry& geometry,
                           const StepBatches& batches,
                           const LossWeights& weights);

// Subgradient of the total loss with respect to the projector weights.
// Inactive hinges, hinges exactly at the kink, and pairs with zero projected
// difference contribute nothing.
Eigen::MatrixXd Gradient(const Projector& projector,
                         const PairGeometry& geometry,
                         const StepBatches& batches,
                         const LossWeights& weights);

// Loss and gradient in one pass over the batches.
LossBreakdown EvaluateLossAndGradient(const Projector& projector,
                                      const PairGeometry& geometry,
                                      const StepBatches& batches,
                                      const LossWeights& weights,
                                      Eigen::MatrixXd& gradient);

}  // namespace tsl

#endif  // TSL_OBJECTIVE_H_
