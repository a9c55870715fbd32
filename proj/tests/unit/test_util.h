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

#ifndef TSL_TESTS_UNIT_TEST_UTIL_H_
#define TSL_TESTS_UNIT_TEST_UTIL_H_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "tsl/embedding.h"

namespace tsl::testing {

// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  ScratchDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = "tsl_test";
    if (info != nullptr) {
      name += std::string("_") + info->test_suite_name() + "_" + info->name();
    }
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ignored;
    std::filesystem::remove_all(path_, ignored);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const {
    return path_ / leaf;
  }

 private:
  std::filesystem::path path_;
};

inline RowMatrix RandomRows(std::mt19937_64& rng, Eigen::Index n,
                            Eigen::Index dim, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  RowMatrix rows(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) rows(i, j) = normal(rng);
  }
  return rows;
}

// A A^T + 0.1 I for a random square A.
inline Eigen::MatrixXd RandomSpd(std::mt19937_64& rng, Eigen::Index dim) {
  const Eigen::MatrixXd a = RandomRows(rng, dim, dim);
  return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(dim, dim);
}

inline RowMatrix Column(const std::vector<double>& values) {
  RowMatrix rows(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t i = 0; i < values.size(); ++i) {
    rows(static_cast<Eigen::Index>(i), 0) = values[i];
  }
  return rows;
}

}  // namespace tsl::testing

#endif  // TSL_TESTS_UNIT_TEST_UTIL_H_
