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

#include "tsl/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "text_util.h"

namespace tsl {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value,
                           std::string_view expected) {
  throw ConfigError("config key '" + std::string(key) + "': expected " +
                    std::string(expected) + ", got \"" + std::string(value) +
                    "\"");
}

template <typename T>
T ParseInteger(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    BadValue(key, value, "an integer");
  }
  return out;
}

double ParseReal(std::string_view key, std::string_view value) {
  double out = 0;
  const auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() ||
      !std::isfinite(out)) {
    BadValue(key, value, "a finite number");
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  BadValue(key, value, "true or false");
}

}  // namespace

AblateTarget ParseAblateTarget(std::string_view text) {
  if (text == "none") return AblateTarget::kNone;
  if (text == "ppm") return AblateTarget::kPpm;
  if (text == "npm") return AblateTarget::kNpm;
  if (text == "tsm") return AblateTarget::kTsm;
  throw ConfigError("ablate must be one of none, ppm, npm, tsm; got \"" +
                    std::string(text) + "\"");
}

std::string_view AblateTargetName(AblateTarget target) {
  switch (target) {
    case AblateTarget::kNone:
      return "none";
    case AblateTarget::kPpm:
      return "ppm";
    case AblateTarget::kNpm:
      return "npm";
    case AblateTarget::kTsm:
      return "tsm";
  }
  return "none";
}

PipelineConfig PipelineConfig::Defaults() {
  PipelineConfig config;
  config.train.epochs = kDeskScaleEpochs;
  return config;
}

void PipelineConfig::Set(std::string_view key, std::string_view raw) {
  const std::string_view value = Trim(raw);
  auto& t = train;
  if (key == "labeled") {
    labeled = std::string(value);
  } else if (key == "unlabeled") {
    unlabeled = std::string(value);
  } else if (key == "test_id") {
    test_id = std::string(value);
  } else if (key == "test_ood") {
    test_ood = std::string(value);
  } else if (key == "holdout") {
    holdout = std::string(value);
  } else if (key == "out") {
    out = std::string(value);
  } else if (key == "seed") {
    t.seed = ParseInteger<std::uint64_t>(key, value);
  } else if (key == "k") {
    t.k = ParseInteger<std::size_t>(key, value);
  } else if (key == "beta") {
    t.beta = ParseInteger<std::size_t>(key, value);
  } else if (key == "lambda1") {
    t.weights.lambda1 = ParseReal(key, value);
  } else if (key == "lambda2") {
    t.weights.lambda2 = ParseReal(key, value);
  } else if (key == "lambda3") {
    t.weights.lambda3 = ParseReal(key, value);
  } else if (key == "margin") {
    t.weights.margin = ParseReal(key, value);
  } else if (key == "lr") {
    t.learning_rate = ParseReal(key, value);
  } else if (key == "epochs") {
    t.epochs = ParseInteger<int>(key, value);
  } else if (key == "batch_size") {
    const auto size = ParseInteger<std::size_t>(key, value);
    if (size < 4) BadValue(key, value, "an integer >= 4");
    t.SetBatchSize(size);
  } else if (key == "quota_labeled") {
    t.quotas.labeled = ParseInteger<std::size_t>(key, value);
  } else if (key == "quota_close") {
    t.quotas.close = ParseInteger<std::size_t>(key, value);
  } else if (key == "quota_loose") {
    t.quotas.loose = ParseInteger<std::size_t>(key, value);
  } else if (key == "quota_negative") {
    t.quotas.negative = ParseInteger<std::size_t>(key, value);
  } else if (key == "init") {
    try {
      t.init = ParseInitScheme(std::string(value));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "d_out") {
    t.d_out = ParseInteger<std::size_t>(key, value);
  } else if (key == "shrinkage") {
    try {
      shrinkage = Shrinkage::Parse(std::string(value));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "negative_bound_fraction") {
    negative_bound_fraction = ParseReal(key, value);
  } else if (key == "threshold_from") {
    if (value == "test") {
      threshold_from = ThresholdSource::kTest;
    } else if (value == "holdout") {
      threshold_from = ThresholdSource::kHoldout;
    } else {
      BadValue(key, value, "test or holdout");
    }
  } else if (key == "tpr_target") {
    tpr_target = ParseReal(key, value);
  } else if (key == "ablate") {
    ablate = ParseAblateTarget(value);
  } else if (key == "dump_scores") {
    dump_scores = ParseBool(key, value);
  } else if (key == "repeats") {
    repeats = ParseInteger<int>(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

void PipelineConfig::Validate() const {
  try {
    train.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(negative_bound_fraction > 0 && negative_bound_fraction <= 1)) {
    throw ConfigError("negative_bound_fraction must be in (0, 1]");
  }
  if (!(tpr_target > 0 && tpr_target <= 1)) {
    throw ConfigError("tpr_target must be in (0, 1]");
  }
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (threshold_from == ThresholdSource::kHoldout && holdout.empty()) {
    throw ConfigError("threshold_from=holdout requires a holdout path");
  }
}

TrainConfig PipelineConfig::EffectiveTrainConfig() const {
  TrainConfig effective = train;
  switch (ablate) {
    case AblateTarget::kNone:
      break;
    case AblateTarget::kPpm:
      effective.enable_ppm = false;
      break;
    case AblateTarget::kNpm:
      effective.enable_npm = false;
      break;
    case AblateTarget::kTsm:
      effective.enable_tsm = false;
      break;
  }
  return effective;
}

std::string PipelineConfig::ToText() const {
  const auto& t = train;
  std::ostringstream text;
  text << "labeled=" << labeled.string() << '\n'
       << "unlabeled=" << unlabeled.string() << '\n'
       << "test_id=" << test_id.string() << '\n'
       << "test_ood=" << test_ood.string() << '\n'
       << "holdout=" << holdout.string() << '\n'
       << "out=" << out.string() << '\n'
       << "seed=" << t.seed << '\n'
       << "k=" << t.k << '\n'
       << "beta=" << t.beta << '\n'
       << "lambda1=" << FormatDouble(t.weights.lambda1) << '\n'
       << "lambda2=" << FormatDouble(t.weights.lambda2) << '\n'
       << "lambda3=" << FormatDouble(t.weights.lambda3) << '\n'
       << "margin=" << FormatDouble(t.weights.margin) << '\n'
       << "lr=" << FormatDouble(t.learning_rate) << '\n'
       << "epochs=" << t.epochs << '\n'
       << "quota_labeled=" << t.quotas.labeled << '\n'
       << "quota_close=" << t.quotas.close << '\n'
       << "quota_loose=" << t.quotas.loose << '\n'
       << "quota_negative=" << t.quotas.negative << '\n'
       << "init=" << InitSchemeName(t.init) << '\n'
       << "d_out=" << t.d_out << '\n'
       << "shrinkage=" << shrinkage.ToString() << '\n'
       << "negative_bound_fraction=" << FormatDouble(negative_bound_fraction)
       << '\n'
       << "threshold_from="
       << (threshold_from == ThresholdSource::kTest ? "test" : "holdout")
       << '\n'
       << "tpr_target=" << FormatDouble(tpr_target) << '\n'
       << "ablate=" << AblateTargetName(ablate) << '\n'
       << "dump_scores=" << (dump_scores ? "true" : "false") << '\n'
       << "repeats=" << repeats << '\n';
  return text.str();
}

PipelineConfig ParseConfigText(std::string_view text, PipelineConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto newline = text.find('\n');
    std::string_view line = text.substr(0, newline);
    text = newline == std::string_view::npos ? std::string_view{}
                                             : text.substr(newline + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value");
    }
    try {
      base.Set(Trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return base;
}

PipelineConfig ResolveConfig(const std::filesystem::path& config_file,
                             const ConfigOverrides& overrides) {
  PipelineConfig config = PipelineConfig::Defaults();
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) {
      throw ConfigError(config_file.string() + ": cannot open config file");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    config = ParseConfigText(buffer.str(), std::move(config));
  }
  for (const auto& [key, value] : overrides) config.Set(key, value);
  config.Validate();
  return config;
}

}  // namespace tsl
