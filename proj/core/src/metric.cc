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

#include "tsl/metric.h"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <sstream>

namespace tsl {

Shrinkage Shrinkage::Fixed(double epsilon) {
  if (!(epsilon >= 0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("shrinkage must be a finite value >= 0");
  }
  return Shrinkage(epsilon);
}

double Shrinkage::Resolve(const Eigen::MatrixXd& covariance) const {
  if (epsilon_) return *epsilon_;
  return kAutoShrinkageFactor * covariance.trace() /
         static_cast<double>(covariance.rows());
}

Shrinkage Shrinkage::Parse(const std::string& text) {
  if (text == "auto") return Auto();
  std::size_t consumed = 0;
  double value = 0;
  try {
    value = std::stod(text, &consumed);
  } catch (const std::exception&) {
    consumed = 0;
  }
  if (consumed == 0 || consumed != text.size()) {
    throw std::invalid_argument(
        "shrinkage must be \"auto\" or a number, got \"" + text + "\"");
  }
  return Fixed(value);
}

std::string Shrinkage::ToString() const {
  if (!epsilon_) return "auto";
  std::ostringstream out;
  out.precision(17);
  out << *epsilon_;
  return out.str();
}

MahalanobisMetric MahalanobisMetric::FromCovariance(Eigen::MatrixXd covariance,
                                                    double shrinkage) {
  if (covariance.rows() < 1 || covariance.rows() != covariance.cols()) {
    throw std::invalid_argument("covariance must be a non-empty square matrix");
  }
  if (!covariance.allFinite()) {
    throw std::invalid_argument("covariance has non-finite entries");
  }
  const Eigen::Index dim = covariance.rows();
  Eigen::MatrixXd regularized = covariance;
  regularized.diagonal().array() += shrinkage;

  Eigen::LLT<Eigen::MatrixXd> llt(regularized);
  bool ok = llt.info() == Eigen::Success;
  Eigen::MatrixXd factor;
  if (ok) {
    factor = llt.matrixL();
    // LLT accepts tiny positive pivots that make the solve meaningless.
    ok = (factor.diagonal().array() > 0).all() && factor.allFinite();
  }
  if (!ok) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(regularized,
                                                       Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    std::ostringstream msg;
    msg << "regularized covariance (dim " << dim << ", shrinkage " << shrinkage
        << ") is not positive definite; smallest eigenvalue "
        << "estimate " << min_eig;
    throw MetricError(msg.str(), min_eig);
  }
  return MahalanobisMetric(std::move(covariance), shrinkage, std::move(factor));
}

double MahalanobisMetric::Distance(
    const Eigen::Ref<const Eigen::VectorXd>& x,
    const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (x.size() != factor_.rows() || y.size() != factor_.rows()) {
    throw std::invalid_argument("mahalanobis: dimension mismatch");
  }
  Eigen::VectorXd diff = x - y;
  factor_.triangularView<Eigen::Lower>().solveInPlace(diff);
  return diff.norm();
}

RowMatrix MahalanobisMetric::WhitenRows(const RowMatrix& rows) const {
  if (rows.cols() != factor_.rows()) {
    throw std::invalid_argument("whiten: dimension mismatch");
  }
  // (L^-1 X^T)^T, solved column-wise.
  Eigen::MatrixXd columns = rows.transpose();
  factor_.triangularView<Eigen::Lower>().solveInPlace(columns);
  return columns.transpose();
}

Eigen::MatrixXd SampleCovariance(const RowMatrix& rows) {
  if (rows.rows() < 2) {
    throw std::invalid_argument("covariance needs at least two rows");
  }
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mean;
  Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(rows.rows() - 1);
  return 0.5 * (cov + cov.transpose());
}

MahalanobisMetric EstimateMetric(const EmbeddingSet& labeled,
                                 Shrinkage shrinkage) {
  if (labeled.role() != Role::kLabeledId) {
    throw std::invalid_argument("metric must be estimated on a labeled_id set");
  }
  Eigen::MatrixXd cov = SampleCovariance(labeled.rows());
  const double epsilon = shrinkage.Resolve(cov);
  return MahalanobisMetric::FromCovariance(std::move(cov), epsilon);
}

ClassCenters ComputeClassCenters(const EmbeddingSet& labeled) {
  if (labeled.role() != Role::kLabeledId) {
    throw std::invalid_argument("class centers need a labeled_id set");
  }
  std::map<int, std::pair<Eigen::RowVectorXd, std::size_t>> sums;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    auto [it, inserted] = sums.try_emplace(
        labeled.label(i), Eigen::RowVectorXd::Zero(labeled.dim()), 0);
    it->second.first += labeled.row(i);
    ++it->second.second;
  }
  std::vector<int> classes;
  RowMatrix centers(static_cast<Eigen::Index>(sums.size()),
                    static_cast<Eigen::Index>(labeled.dim()));
  Eigen::Index r = 0;
  for (const auto& [c, acc] : sums) {
    classes.push_back(c);
    centers.row(r++) = acc.first / static_cast<double>(acc.second);
  }
  return ClassCenters(std::move(classes), std::move(centers));
}

}  // namespace tsl
