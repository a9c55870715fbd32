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

#include "oracles.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tsl::oracle {
namespace {

std::vector<double> DistinctDescending(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  std::vector<double> all(a);
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end(), std::greater<>());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

double FractionAtLeast(const std::vector<double>& scores, double threshold) {
  std::size_t count = 0;
  for (double s : scores) count += s >= threshold;
  return static_cast<double>(count) / static_cast<double>(scores.size());
}

std::vector<bool> KnnMembership(const std::vector<std::size_t>& ranking,
                                std::size_t n, std::size_t k) {
  std::vector<bool> in(n, false);
  for (std::size_t r = 0; r < k && r < ranking.size(); ++r)
    in[ranking[r]] = true;
  return in;
}

}  // namespace

BruteMetric::BruteMetric(const Eigen::MatrixXd& covariance)
    : precision_(covariance.fullPivLu().inverse()) {}

double BruteMetric::Distance(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& y) const {
  const Eigen::VectorXd d = x - y;
  const double q = d.dot(precision_ * d);
  return std::sqrt(std::max(0.0, q));
}

std::vector<std::vector<std::size_t>> BruteRankings(const Eigen::MatrixXd& rows,
                                                    const BruteMetric& metric) {
  const auto n = static_cast<std::size_t>(rows.rows());
  std::vector<std::vector<std::size_t>> rankings(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> entries;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      entries.emplace_back(
          metric.Distance(rows.row(static_cast<Eigen::Index>(i)).transpose(),
                          rows.row(static_cast<Eigen::Index>(j)).transpose()),
          j);
    }
    std::sort(entries.begin(), entries.end());
    for (const auto& e : entries) rankings[i].push_back(e.second);
  }
  return rankings;
}

std::size_t BrutePosition(const std::vector<std::size_t>& ranking,
                          std::size_t j) {
  for (std::size_t r = 0; r < ranking.size(); ++r) {
    if (ranking[r] == j) return r;
  }
  throw std::logic_error("index not in ranking");
}

PairSetO BruteClose(const std::vector<std::vector<std::size_t>>& rankings,
                    std::size_t k) {
  const std::size_t n = rankings.size();
  PairSetO out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto in_i = KnnMembership(rankings[i], n, k);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto in_j = KnnMembership(rankings[j], n, k);
      if (in_i[j] && in_j[i]) out.emplace(i, j);
    }
  }
  return out;
}

PairSetO BruteLoose(const std::vector<std::vector<std::size_t>>& rankings,
                    std::size_t k) {
  const std::size_t n = rankings.size();
  PairSetO out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto in_i = KnnMembership(rankings[i], n, k);
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto in_j = KnnMembership(rankings[j], n, k);
      if (in_i[j] != in_j[i]) out.emplace(i, j);
    }
  }
  return out;
}

PairSetO BruteStepPositives(
    const std::vector<std::vector<std::size_t>>& rankings, std::size_t k) {
  PairSetO out;
  for (std::size_t i = 0; i < rankings.size(); ++i) {
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t j = rankings[i][r];
      out.emplace(std::min(i, j), std::max(i, j));
    }
  }
  return out;
}

PairSetO BruteLabeled(const std::vector<int>& labels) {
  PairSetO out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      if (labels[i] == labels[j]) out.emplace(i, j);
    }
  }
  return out;
}

bool BruteIsNegative(const std::vector<std::vector<std::size_t>>& rankings,
                     std::size_t i, std::size_t j, std::size_t bound) {
  if (i == j) return false;
  const auto& ranking = rankings[i];
  const std::size_t limit = std::min(bound, ranking.size());
  for (std::size_t r = 0; r < limit; ++r) {
    if (ranking[r] == j) return false;
  }
  return true;
}

// Trapezoids under the ROC curve traced through every distinct threshold.
double SweepAuroc(const std::vector<double>& id,
                  const std::vector<double>& ood) {
  double area = 0;
  double prev_tpr = 0;
  double prev_fpr = 0;
  for (double t : DistinctDescending(id, ood)) {
    const double tpr = FractionAtLeast(id, t);
    const double fpr = FractionAtLeast(ood, t);
    area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2;
    prev_tpr = tpr;
    prev_fpr = fpr;
  }
  return area;
}

double SweepFpr(const std::vector<double>& id, const std::vector<double>& ood,
                double tpr_target) {
  double best = -std::numeric_limits<double>::infinity();
  for (double t : id) {
    if (FractionAtLeast(id, t) >= tpr_target - 1e-12) best = std::max(best, t);
  }
  return FractionAtLeast(ood, best);
}

double SweepDetectionError(const std::vector<double>& id,
                           const std::vector<double>& ood) {
  double best = std::numeric_limits<double>::infinity();
  for (double t : DistinctDescending(id, ood)) {
    const double err =
        0.5 * (1 - FractionAtLeast(id, t)) + 0.5 * FractionAtLeast(ood, t);
    best = std::min(best, err);
  }
  return best;
}

double SweepAupr(const std::vector<double>& pos,
                 const std::vector<double>& neg) {
  double ap = 0;
  double prev_recall = 0;
  for (double t : DistinctDescending(pos, neg)) {
    double tp = 0;
    double fp = 0;
    for (double s : pos) tp += s >= t;
    for (double s : neg) fp += s >= t;
    const double recall = tp / static_cast<double>(pos.size());
    ap += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
  }
  return ap;
}

double ScalarPositiveLoss(const Eigen::MatrixXd& p, const Eigen::MatrixXd& rows,
                          const std::vector<Pair>& pairs,
                          const BruteMetric& metric, double coefficient) {
  double total = 0;
  for (const auto& [a, b] : pairs) {
    const Eigen::VectorXd xa = rows.row(static_cast<Eigen::Index>(a));
    const Eigen::VectorXd xb = rows.row(static_cast<Eigen::Index>(b));
    double sq = 0;
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      double v = 0;
      for (Eigen::Index c = 0; c < p.cols(); ++c)
        v += p(r, c) * (xa[c] - xb[c]);
      sq += v * v;
    }
    total +=
        std::max(0.0, std::sqrt(sq) - coefficient * metric.Distance(xa, xb));
  }
  return total;
}

double ScalarNegativeLoss(const Eigen::MatrixXd& p, const Eigen::MatrixXd& rows,
                          const std::vector<Pair>& pairs, double margin) {
  double total = 0;
  for (const auto& [a, b] : pairs) {
    double sq = 0;
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      double v = 0;
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        v += p(r, c) * (rows(static_cast<Eigen::Index>(a), c) -
                        rows(static_cast<Eigen::Index>(b), c));
      }
      sq += v * v;
    }
    total += std::max(0.0, margin - std::sqrt(sq));
  }
  return total;
}

double ScalarMsScore(const Eigen::MatrixXd& p, const Eigen::MatrixXd& centers,
                     const Eigen::VectorXd& x) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    const Eigen::VectorXd d = x - centers.row(c).transpose();
    best = std::min(best, (p * d).norm());
  }
  return -best;
}

Eigen::MatrixXd CentralDifferences(
    const std::function<double(const Eigen::MatrixXd&)>& f,
    const Eigen::MatrixXd& p, double h) {
  Eigen::MatrixXd grad(p.rows(), p.cols());
  Eigen::MatrixXd probe = p;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    for (Eigen::Index c = 0; c < p.cols(); ++c) {
      probe(r, c) = p(r, c) + h;
      const double up = f(probe);
      probe(r, c) = p(r, c) - h;
      const double down = f(probe);
      probe(r, c) = p(r, c);
      grad(r, c) = (up - down) / (2 * h);
    }
  }
  return grad;
}

}  // namespace tsl::oracle
