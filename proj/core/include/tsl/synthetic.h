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

#ifndef TSL_SYNTHETIC_H_
#define TSL_SYNTHETIC_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsl/embedding.h"

namespace tsl {

// Gaussian-mixture benchmark: k ID classes around random centers, plus OOD
// modes placed at random directions, `ood_offset` away from the ID centroid.
struct SyntheticSpec {
  int num_classes = 10;
  int dim = 32;
  double id_center_scale = 0.5;
  double class_std = 1.0;
  int ood_modes = 1;
  double ood_offset = 4.0;

  int labeled_per_class = 25;
  int unlabeled_id_per_class = 500;
  int unlabeled_ood = 2000;
  int test_id = 1000;
  // Ignored when share_ood is set; test_ood then equals the unlabeled OOD.
  int test_ood = 2000;
  bool share_ood = true;

  std::uint64_t seed = 1;

  // Throws std::invalid_argument naming the offending field.
  void Validate() const;

  // key=value lines, one per field.
  std::string ToText() const;
};

struct SyntheticData {
  EmbeddingSet labeled;
  // Absent when the corresponding count is zero.
  std::optional<EmbeddingSet> unlabeled;
  std::optional<EmbeddingSet> test_id;
  std::optional<EmbeddingSet> test_ood;
  // Ground truth for the shuffled unlabeled set; not visible to training.
  std::vector<bool> unlabeled_is_ood;
};

// Pure function of the spec (seed included). Generated values are rounded to
// f32 so that they survive a save/load round trip unchanged.
SyntheticData GenerateSynthetic(const SyntheticSpec& spec);

}  // namespace tsl

#endif  // TSL_SYNTHETIC_H_
