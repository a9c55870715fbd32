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

#ifndef TSL_CONFIG_H_
#define TSL_CONFIG_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsl/metric.h"
#include "tsl/scoring.h"
#include "tsl/training.h"

namespace tsl {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ThresholdSource { kTest, kHoldout };
enum class AblateTarget { kNone, kPpm, kNpm, kTsm };

inline constexpr int kDeskScaleEpochs = 300;
inline constexpr double kDefaultNegativeBoundFraction = 0.8;

// Everything a pipeline run needs. Serializes to and from flat key=value
// text; the manifest written next to every run parses back into the same
// config.
struct PipelineConfig {
  std::filesystem::path labeled;
  std::filesystem::path unlabeled;
  std::filesystem::path test_id;
  std::filesystem::path test_ood;
  std::filesystem::path holdout;
  std::filesystem::path out = "tsl_out";

  TrainConfig train;
  Shrinkage shrinkage = Shrinkage::Auto();
  double negative_bound_fraction = kDefaultNegativeBoundFraction;
  ThresholdSource threshold_from = ThresholdSource::kTest;
  double tpr_target = kDefaultTprTarget;
  AblateTarget ablate = AblateTarget::kNone;
  bool dump_scores = false;
  int repeats = 1;

  // Reference hyperparameters, with epochs cut to desk scale.
  static PipelineConfig Defaults();

  // Throws ConfigError on an unknown key or unparsable value.
  void Set(std::string_view key, std::string_view value);

  // Cross-field checks, including the lambda ordering.
  void Validate() const;

  // TrainConfig with the `ablate` switch applied.
  TrainConfig EffectiveTrainConfig() const;

  std::string ToText() const;
};

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;

// Parses key=value lines ('#' starts a comment) on top of `base`. Errors
// carry the line number. Does not validate.
PipelineConfig ParseConfigText(
    std::string_view text, PipelineConfig base = PipelineConfig::Defaults());

// Config file (optional, empty path for none) + overrides, then Validate().
PipelineConfig ResolveConfig(const std::filesystem::path& config_file,
                             const ConfigOverrides& overrides);

AblateTarget ParseAblateTarget(std::string_view text);
std::string_view AblateTargetName(AblateTarget target);

}  // namespace tsl

#endif  // TSL_CONFIG_H_
