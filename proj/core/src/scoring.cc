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

#include "tsl/scoring.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "text_util.h"

namespace tsl {
namespace {

void RequireNonEmpty(std::span<const double> scores, const char* what) {
  if (scores.empty()) {
    throw std::invalid_argument(std::string(what) + " scores are empty");
  }
}

std::vector<double> SortedAscending(std::span<const double> scores) {
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

// Number of sorted values >= threshold.
std::size_t CountAtLeast(const std::vector<double>& sorted, double threshold) {
  return static_cast<std::size_t>(
      sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), threshold));
}

}  // namespace

MsScorer::MsScorer(const Projector& projector, const ClassCenters& centers)
    : weights_(projector.weights()) {
  if (centers.size() == 0) throw std::invalid_argument("no class centers");
  if (centers.dim() != projector.d_in()) {
    throw std::invalid_argument("class centers and projector dims differ");
  }
  projected_centers_.resize(weights_.rows(),
                            static_cast<Eigen::Index>(centers.size()));
  for (std::size_t c = 0; c < centers.size(); ++c) {
    // Same product shape as Score(), so a point equal to a center scores 0.
    const Eigen::VectorXd center = centers.center(c).transpose();
    projected_centers_.col(static_cast<Eigen::Index>(c)) = weights_ * center;
  }
}

double MsScorer::Score(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != weights_.cols()) {
    throw std::invalid_argument("score: input has the wrong dimension");
  }
  const Eigen::VectorXd x_in = x;
  const Eigen::VectorXd projected = weights_ * x_in;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < projected_centers_.cols(); ++c) {
    best = std::min(best, (projected - projected_centers_.col(c)).norm());
  }
  return -best;
}

std::vector<double> MsScorer::ScoreAll(const EmbeddingSet& set) const {
  std::vector<double> scores(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    scores[i] = Score(set.row(i).transpose());
  }
  return scores;
}

double MsScore(const Projector& projector, const ClassCenters& centers,
               const Eigen::Ref<const Eigen::VectorXd>& x) {
  return MsScorer(projector, centers).Score(x);
}

double ChooseThreshold(std::span<const double> id_scores, double tpr_target) {
  RequireNonEmpty(id_scores, "ID");
  if (!(tpr_target > 0 && tpr_target <= 1)) {
    throw std::invalid_argument("TPR target must be in (0, 1]");
  }
  const std::size_t n = id_scores.size();
  // The small slack keeps e.g. 0.95 * 20 from rounding up to 20.
  auto needed = static_cast<std::size_t>(
      std::ceil(tpr_target * static_cast<double>(n) - 1e-9));
  needed = std::clamp<std::size_t>(needed, 1, n);
  std::vector<double> sorted(id_scores.begin(), id_scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + (needed - 1), sorted.end(),
                   std::greater<>());
  return sorted[needed - 1];
}

std::vector<bool> Decide(std::span<const double> scores, double threshold) {
  std::vector<bool> decisions(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    decisions[i] = Decide(scores[i], threshold);
  }
  return decisions;
}

double Auroc(std::span<const double> id_scores,
             std::span<const double> ood_scores) {
  RequireNonEmpty(id_scores, "ID");
  RequireNonEmpty(ood_scores, "OOD");
  const std::vector<double> ood = SortedAscending(ood_scores);
  double greater = 0;
  double equal = 0;
  for (double a : id_scores) {
    const auto lo = std::lower_bound(ood.begin(), ood.end(), a);
    const auto hi = std::upper_bound(lo, ood.end(), a);
    greater += static_cast<double>(lo - ood.begin());
    equal += static_cast<double>(hi - lo);
  }
  const double pairs = static_cast<double>(id_scores.size()) *
                       static_cast<double>(ood_scores.size());
  const double less = pairs - greater - equal;
  // Always divide the larger side so that swapping the arguments yields
  // exactly 1 - x: the subtraction 1 - x is exact for x in [0.5, 1].
  if (greater >= less) return (greater + 0.5 * equal) / pairs;
  return 1.0 - (less + 0.5 * equal) / pairs;
}

double FprAtTpr(std::span<const double> id_scores,
                std::span<const double> ood_scores, double tpr_target) {
  RequireNonEmpty(ood_scores, "OOD");
  const double threshold = ChooseThreshold(id_scores, tpr_target);
  const auto accepted =
      std::count_if(ood_scores.begin(), ood_scores.end(),
                    [&](double s) { return Decide(s, threshold); });
  return static_cast<double>(accepted) / static_cast<double>(ood_scores.size());
}

double DetectionError(std::span<const double> id_scores,
                      std::span<const double> ood_scores) {
  RequireNonEmpty(id_scores, "ID");
  RequireNonEmpty(ood_scores, "OOD");
  const std::vector<double> id = SortedAscending(id_scores);
  const std::vector<double> ood = SortedAscending(ood_scores);
  const double n_id = static_cast<double>(id.size());
  const double n_ood = static_cast<double>(ood.size());

  double best = 1.0;
  auto consider = [&](double threshold) {
    const double tpr = static_cast<double>(CountAtLeast(id, threshold)) / n_id;
    const double fpr =
        static_cast<double>(CountAtLeast(ood, threshold)) / n_ood;
    best = std::min(best, 0.5 * (1.0 - tpr) + 0.5 * fpr);
  };
  for (double t : id) consider(t);
  for (double t : ood) consider(t);
  return best;
}

double Aupr(std::span<const double> positive_scores,
            std::span<const double> negative_scores) {
  RequireNonEmpty(positive_scores, "positive");
  RequireNonEmpty(negative_scores, "negative");
  std::vector<std::pair<double, bool>> ranked;
  ranked.reserve(positive_scores.size() + negative_scores.size());
  for (double s : positive_scores) ranked.emplace_back(s, true);
  for (double s : negative_scores) ranked.emplace_back(s, false);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  const double n_pos = static_cast<double>(positive_scores.size());
  double tp = 0;
  double fp = 0;
  double previous_recall = 0;
  double area = 0;
  for (std::size_t i = 0; i < ranked.size();) {
    const double score = ranked[i].first;
    for (; i < ranked.size() && ranked[i].first == score; ++i) {
      (ranked[i].second ? tp : fp) += 1;
    }
    const double recall = tp / n_pos;
    if (recall > previous_recall) {
      area += (recall - previous_recall) * (tp / (tp + fp));
      previous_recall = recall;
    }
  }
  return area;
}

std::string MetricsReport::ToText() const {
  std::ostringstream out;
  out << "auroc=" << FormatDouble(auroc) << '\n'
      << "fpr95=" << FormatDouble(fpr95) << '\n'
      << "detection_error=" << FormatDouble(detection_error) << '\n'
      << "aupr_in=" << FormatDouble(aupr_in) << '\n'
      << "aupr_out=" << FormatDouble(aupr_out) << '\n'
      << "threshold=" << FormatDouble(threshold) << '\n'
      << "n_id=" << n_id << '\n'
      << "n_ood=" << n_ood << '\n';
  return out.str();
}

std::string MetricsReport::ToJson() const {
  const nlohmann::ordered_json record = {
      {"auroc", auroc},
      {"fpr95", fpr95},
      {"detection_error", detection_error},
      {"aupr_in", aupr_in},
      {"aupr_out", aupr_out},
      {"threshold", threshold},
      {"n_id", n_id},
      {"n_ood", n_ood},
  };
  return record.dump(2) + "\n";
}

MetricsReport Evaluate(std::span<const double> id_scores,
                       std::span<const double> ood_scores, double tpr_target) {
  MetricsReport report;
  report.auroc = Auroc(id_scores, ood_scores);
  report.threshold = ChooseThreshold(id_scores, tpr_target);
  report.fpr95 = FprAtTpr(id_scores, ood_scores, tpr_target);
  report.detection_error = DetectionError(id_scores, ood_scores);
  report.aupr_in = Aupr(id_scores, ood_scores);

  std::vector<double> flipped_id(id_scores.size());
  std::vector<double> flipped_ood(ood_scores.size());
  std::transform(id_scores.begin(), id_scores.end(), flipped_id.begin(),
                 [](double s) { return -s; });
  std::transform(ood_scores.begin(), ood_scores.end(), flipped_ood.begin(),
                 [](double s) { return -s; });
  report.aupr_out = Aupr(flipped_ood, flipped_id);

  report.n_id = id_scores.size();
  report.n_ood = ood_scores.size();
  return report;
}

}  // namespace tsl
