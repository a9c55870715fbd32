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

#ifndef TSL_PROJECTOR_H_
#define TSL_PROJECTOR_H_

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

namespace tsl {

enum class InitScheme { kIdentity, kScaledRandom };

InitScheme ParseInitScheme(const std::string& name);
std::string InitSchemeName(InitScheme scheme);

// Linear map from the input feature space (d_in) to the projected space
// (d_out).
class Projector {
 public:
  explicit Projector(Eigen::MatrixXd weights);

  std::size_t d_in() const { return static_cast<std::size_t>(weights_.cols()); }
  std::size_t d_out() const {
    return static_cast<std::size_t>(weights_.rows());
  }
  const Eigen::MatrixXd& weights() const { return weights_; }

  Eigen::VectorXd Apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // P <- P - step * direction.
  void Update(const Eigen::MatrixXd& direction, double step);

  // Rounds every weight to the nearest f32, the precision of the file format.
  void RoundToStoragePrecision();

  friend bool operator==(const Projector& a, const Projector& b) {
    return a.weights_.rows() == b.weights_.rows() &&
           a.weights_.cols() == b.weights_.cols() && a.weights_ == b.weights_;
  }

 private:
  Eigen::MatrixXd weights_;
};

// "identity": [I | 0], needs d_out <= d_in.
// "scaled_random": i.i.d. uniform in +-sqrt(6 / (d_in + d_out)).
Projector InitProjector(std::size_t d_in, std::size_t d_out, InitScheme scheme,
                        std::uint64_t seed);

// Stored as an embedding-format matrix with d_out rows of length d_in.
void SaveProjector(const Projector& projector,
                   const std::filesystem::path& path);
Projector LoadProjector(const std::filesystem::path& path);

}  // namespace tsl

#endif  // TSL_PROJECTOR_H_
