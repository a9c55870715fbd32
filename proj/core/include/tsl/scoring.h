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

#ifndef TSL_SCORING_H_
#define TSL_SCORING_H_

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tsl/embedding.h"
#include "tsl/metric.h"
#include "tsl/projector.h"

namespace tsl {

inline constexpr double kDefaultTprTarget = 0.95;

// Negated distance, in the projected space, to the nearest class center.
// Higher means more in-distribution; the maximum is 0.
class MsScorer {
 public:
  MsScorer(const Projector& projector, const ClassCenters& centers);

  double Score(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  std::vector<double> ScoreAll(const EmbeddingSet& set) const;

 private:
  Eigen::MatrixXd weights_;
  Eigen::MatrixXd projected_centers_;  // d_out x k
};

double MsScore(const Projector& projector, const ClassCenters& centers,
               const Eigen::Ref<const Eigen::VectorXd>& x);

// The ceil(tpr_target * n)-th largest ID score: the largest gamma with at
// least that many scores >= gamma.
double ChooseThreshold(std::span<const double> id_scores,
                       double tpr_target = kDefaultTprTarget);

// true = in-distribution; the boundary is inclusive.
inline bool Decide(double score, double threshold) {
  return score >= threshold;
}
std::vector<bool> Decide(std::span<const double> scores, double threshold);

struct ScoreReport {
  std::vector<double> scores;
  double threshold = 0;
  std::vector<bool> decisions;
};

// Mann-Whitney statistic with ID as positives, ties counted one half.
double Auroc(std::span<const double> id_scores,
             std::span<const double> ood_scores);

// Fraction of OOD scores at or above ChooseThreshold(id_scores, tpr_target).
double FprAtTpr(std::span<const double> id_scores,
                std::span<const double> ood_scores,
                double tpr_target = kDefaultTprTarget);

// min over observed thresholds of 0.5 (1 - TPR) + 0.5 FPR.
double DetectionError(std::span<const double> id_scores,
                      std::span<const double> ood_scores);

// Non-interpolated average precision: sum over distinct descending
// thresholds of (recall step) * precision.
double Aupr(std::span<const double> positive_scores,
            std::span<const double> negative_scores);

struct MetricsReport {
  double auroc = 0;
  double fpr95 = 0;
  double detection_error = 0;
  double aupr_in = 0;
  double aupr_out = 0;
  double threshold = 0;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;

  // key=value lines.
  std::string ToText() const;
  std::string ToJson() const;
};

// Threshold defaults to ChooseThreshold(id_scores, tpr_target).
MetricsReport Evaluate(std::span<const double> id_scores,
                       std::span<const double> ood_scores,
                       double tpr_target = kDefaultTprTarget);

}  // namespace tsl

#endif  // TSL_SCORING_H_
