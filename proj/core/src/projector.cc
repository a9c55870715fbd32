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

#include "tsl/projector.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "tsl/embedding.h"

namespace tsl {

InitScheme ParseInitScheme(const std::string& name) {
  if (name == "identity") return InitScheme::kIdentity;
  if (name == "scaled_random") return InitScheme::kScaledRandom;
  throw std::invalid_argument("unknown init scheme \"" + name +
                              "\" (expected identity or scaled_random)");
}

std::string InitSchemeName(InitScheme scheme) {
  return scheme == InitScheme::kIdentity ? "identity" : "scaled_random";
}

Projector::Projector(Eigen::MatrixXd weights) : weights_(std::move(weights)) {
  if (weights_.rows() < 1 || weights_.cols() < 1) {
    throw std::invalid_argument("projector dims must be positive");
  }
  if (!weights_.allFinite()) {
    throw std::invalid_argument("projector weights must be finite");
  }
}

Eigen::VectorXd Projector::Apply(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != weights_.cols()) {
    throw std::invalid_argument("projector input has the wrong dimension");
  }
  return weights_ * x;
}

void Projector::Update(const Eigen::MatrixXd& direction, double step) {
  weights_.noalias() -= step * direction;
  if (!weights_.allFinite()) {
    throw std::runtime_error("projector weights diverged to non-finite values");
  }
}

void Projector::RoundToStoragePrecision() {
  weights_ = weights_.unaryExpr(
      [](double w) { return static_cast<double>(static_cast<float>(w)); });
}

Projector InitProjector(std::size_t d_in, std::size_t d_out, InitScheme scheme,
                        std::uint64_t seed) {
  if (d_in == 0 || d_out == 0) {
    throw std::invalid_argument("projector dims must be positive");
  }
  const auto rows = static_cast<Eigen::Index>(d_out);
  const auto cols = static_cast<Eigen::Index>(d_in);
  if (scheme == InitScheme::kIdentity) {
    if (d_out > d_in) {
      throw std::invalid_argument("identity init needs d_out <= d_in");
    }
    return Projector(Eigen::MatrixXd::Identity(rows, cols));
  }
  const double limit = std::sqrt(6.0 / static_cast<double>(d_in + d_out));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-limit, limit);
  Eigen::MatrixXd weights(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) weights(r, c) = uniform(rng);
  }
  return Projector(std::move(weights));
}

void SaveProjector(const Projector& projector,
                   const std::filesystem::path& path) {
  WriteMatrixFile(RowMatrix(projector.weights()), path);
}

Projector LoadProjector(const std::filesystem::path& path) {
  return Projector(Eigen::MatrixXd(ReadMatrixFile(path)));
}

}  // namespace tsl
