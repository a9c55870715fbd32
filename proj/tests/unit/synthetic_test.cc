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

#include "tsl/synthetic.h"

#include <limits>

#include "gtest/gtest.h"

namespace tsl {
namespace {

SyntheticSpec TinySpec() {
  SyntheticSpec spec;
  spec.num_classes = 2;
  spec.dim = 2;
  spec.labeled_per_class = 2;
  spec.unlabeled_id_per_class = 0;
  spec.unlabeled_ood = 0;
  spec.test_id = 0;
  spec.test_ood = 0;
  spec.share_ood = false;
  spec.seed = 7;
  return spec;
}

TEST(SyntheticTest, CountsForcedBySpec) {
  const SyntheticData data = GenerateSynthetic(TinySpec());
  EXPECT_EQ(data.labeled.size(), 4u);
  EXPECT_EQ(data.labeled.dim(), 2u);
  EXPECT_EQ(data.labeled.labels()[0], 0);
  EXPECT_EQ(data.labeled.labels()[3], 1);
  EXPECT_FALSE(data.unlabeled.has_value());
  EXPECT_FALSE(data.test_id.has_value());
  EXPECT_FALSE(data.test_ood.has_value());
}

TEST(SyntheticTest, SameSeedSameOutput) {
  SyntheticSpec spec;
  spec.unlabeled_id_per_class = 20;
  spec.unlabeled_ood = 50;
  spec.test_id = 30;
  const SyntheticData a = GenerateSynthetic(spec);
  const SyntheticData b = GenerateSynthetic(spec);
  EXPECT_EQ(a.labeled, b.labeled);
  EXPECT_EQ(*a.unlabeled, *b.unlabeled);
  EXPECT_EQ(*a.test_id, *b.test_id);
  EXPECT_EQ(*a.test_ood, *b.test_ood);
  EXPECT_EQ(a.unlabeled_is_ood, b.unlabeled_is_ood);

  spec.seed = 2;
  EXPECT_FALSE(GenerateSynthetic(spec).labeled == a.labeled);
}

TEST(SyntheticTest, RolesAndSharedOod) {
  SyntheticSpec spec;
  spec.unlabeled_id_per_class = 10;
  spec.unlabeled_ood = 40;
  spec.test_id = 15;
  const SyntheticData data = GenerateSynthetic(spec);
  EXPECT_EQ(data.labeled.role(), Role::kLabeledId);
  EXPECT_EQ(data.unlabeled->role(), Role::kUnlabeledMix);
  EXPECT_FALSE(data.unlabeled->has_labels());
  EXPECT_EQ(data.unlabeled->size(), 140u);
  EXPECT_EQ(data.test_id->size(), 15u);
  ASSERT_EQ(data.test_ood->size(), 40u);

  // With share_ood the test OOD rows are the unlabeled OOD rows.
  std::size_t matched = 0;
  for (std::size_t i = 0; i < data.unlabeled->size(); ++i) {
    if (!data.unlabeled_is_ood[i]) continue;
    for (std::size_t j = 0; j < data.test_ood->size(); ++j) {
      if (data.unlabeled->row(i) == data.test_ood->row(j)) {
        ++matched;
        break;
      }
    }
  }
  EXPECT_EQ(matched, 40u);
}

TEST(SyntheticTest, FarOodIsSeparated) {
  SyntheticSpec spec;
  spec.ood_offset = 20;
  spec.class_std = 1;
  spec.id_center_scale = 1;
  spec.unlabeled_id_per_class = 50;
  spec.unlabeled_ood = 200;
  spec.test_id = 0;
  const SyntheticData data = GenerateSynthetic(spec);
  double min_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < data.unlabeled->size(); ++i) {
    if (data.unlabeled_is_ood[i]) continue;
    for (std::size_t j = 0; j < data.test_ood->size(); ++j) {
      min_distance =
          std::min(min_distance,
                   (data.unlabeled->row(i) - data.test_ood->row(j)).norm());
    }
  }
  EXPECT_GT(min_distance, 10.0);
}

TEST(SyntheticTest, ValuesAreFloatRepresentable) {
  const SyntheticData data = GenerateSynthetic(TinySpec());
  for (Eigen::Index i = 0; i < data.labeled.rows().size(); ++i) {
    const double v = data.labeled.rows().data()[i];
    EXPECT_EQ(v, static_cast<double>(static_cast<float>(v)));
  }
}

TEST(SyntheticTest, ValidationNamesField) {
  SyntheticSpec spec = TinySpec();
  spec.labeled_per_class = 1;
  try {
    GenerateSynthetic(spec);
    ADD_FAILURE() << "expected failure";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("labeled_per_class"),
              std::string::npos);
  }
  spec = TinySpec();
  spec.ood_offset = 0;
  EXPECT_THROW(spec.Validate(), std::invalid_argument);
}

TEST(SyntheticTest, ToTextEchoesFields) {
  const std::string text = SyntheticSpec{}.ToText();
  EXPECT_NE(text.find("num_classes=10\n"), std::string::npos);
  EXPECT_NE(text.find("ood_offset=4\n"), std::string::npos);
  EXPECT_NE(text.find("seed=1\n"), std::string::npos);
}

}  // namespace
}  // namespace tsl
