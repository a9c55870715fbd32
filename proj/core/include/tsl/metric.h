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

#ifndef TSL_METRIC_H_
#define TSL_METRIC_H_

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tsl/embedding.h"

namespace tsl {

// Ridge added to the covariance before factorization.
class Shrinkage {
 public:
  // epsilon = 1e-3 * trace(cov) / dim.
  static Shrinkage Auto() { return Shrinkage(std::nullopt); }
  static Shrinkage Fixed(double epsilon);

  bool is_auto() const { return !epsilon_.has_value(); }
  double Resolve(const Eigen::MatrixXd& covariance) const;

  // "auto" or a decimal number.
  static Shrinkage Parse(const std::string& text);
  std::string ToString() const;

 private:
  explicit Shrinkage(std::optional<double> epsilon) : epsilon_(epsilon) {}
  std::optional<double> epsilon_;
};

inline constexpr double kAutoShrinkageFactor = 1e-3;

class MetricError : public std::runtime_error {
 public:
  MetricError(const std::string& message, double min_eigenvalue)
      : std::runtime_error(message), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

// Mahalanobis distance under a regularized covariance. Stores the lower
// Cholesky factor L of (cov + eps I); distances are ||L^-1 (x - y)||.
class MahalanobisMetric {
 public:
  // Throws MetricError if cov + eps I is not positive definite.
  static MahalanobisMetric FromCovariance(Eigen::MatrixXd covariance,
                                          double shrinkage);

  std::size_t dim() const {
    return static_cast<std::size_t>(covariance_.rows());
  }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  double shrinkage() const { return shrinkage_; }
  const Eigen::MatrixXd& cholesky_factor() const { return factor_; }

  double Distance(const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y) const;

  // Each row r becomes L^-1 r, so Euclidean distances between whitened rows
  // equal Mahalanobis distances between the originals up to rounding.
  RowMatrix WhitenRows(const RowMatrix& rows) const;

 private:
  MahalanobisMetric(Eigen::MatrixXd covariance, double shrinkage,
                    Eigen::MatrixXd factor)
      : covariance_(std::move(covariance)),
        shrinkage_(shrinkage),
        factor_(std::move(factor)) {}

  Eigen::MatrixXd covariance_;
  double shrinkage_;
  Eigen::MatrixXd factor_;
};

// Pooled sample covariance (divisor n - 1) of all labeled rows.
Eigen::MatrixXd SampleCovariance(const RowMatrix& rows);

MahalanobisMetric EstimateMetric(const EmbeddingSet& labeled,
                                 Shrinkage shrinkage);

inline double Mahalanobis(const MahalanobisMetric& metric,
                          const Eigen::Ref<const Eigen::VectorXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& y) {
  return metric.Distance(x, y);
}

// Per-class means of the labeled rows, ordered by ascending class index.
class ClassCenters {
 public:
  ClassCenters(std::vector<int> classes, RowMatrix centers)
      : classes_(std::move(classes)), centers_(std::move(centers)) {}

  std::size_t size() const { return classes_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(centers_.cols()); }
  const std::vector<int>& classes() const { return classes_; }
  const RowMatrix& centers() const { return centers_; }
  auto center(std::size_t i) const {
    return centers_.row(static_cast<Eigen::Index>(i));
  }

 private:
  std::vector<int> classes_;
  RowMatrix centers_;
};

ClassCenters ComputeClassCenters(const EmbeddingSet& labeled);

}  // namespace tsl

#endif  // TSL_METRIC_H_
