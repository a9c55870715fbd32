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

// Command-line front end: synth, mine, train, score, eval, run, ablate.

#include <exception>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tsl/config.h"
#include "tsl/pipeline.h"
#include "tsl/synthetic.h"

namespace {

struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr FlagSpec kPipelineFlags[] = {
    {"--labeled", "labeled", "Labeled ID embeddings (with .labels sidecar)"},
    {"--unlabeled", "unlabeled", "Unlabeled ID/OOD mixture embeddings"},
    {"--test-id", "test_id", "Test ID embeddings"},
    {"--test-ood", "test_ood", "Test OOD embeddings"},
    {"--holdout", "holdout", "Held-out ID embeddings for threshold selection"},
    {"--out", "out", "Output directory"},
    {"--seed", "seed", "Random seed"},
    {"--k", "k", "Neighbor count K"},
    {"--beta", "beta", "Negative rank multiplier beta"},
    {"--lambda1", "lambda1", "Coefficient for labeled intra-class pairs"},
    {"--lambda2", "lambda2", "Coefficient for close pairs"},
    {"--lambda3", "lambda3", "Coefficient for loose pairs"},
    {"--margin", "margin", "Negative-pair margin M"},
    {"--lr", "lr", "SGD learning rate"},
    {"--epochs", "epochs", "Training epochs"},
    {"--batch-size", "batch_size", "Pairs per step, split over four sources"},
    {"--shrinkage", "shrinkage", "Covariance ridge: auto or a number"},
    {"--init", "init", "Projector init: identity or scaled_random"},
    {"--ablate", "ablate", "Disable one module: none, ppm, npm, tsm"},
    {"--threshold-from", "threshold_from", "Threshold source: test or holdout"},
    {"--tpr-target", "tpr_target", "TPR used to pick the threshold"},
    {"--repeats", "repeats", "Repeat runs with seed offsets"},
    {"--negative-bound-fraction", "negative_bound_fraction",
     "Cap on the negative rank bound as a fraction of the pool"},
};

// Collects key=value overrides from the flags a user actually passed.
class PipelineOptions {
 public:
  explicit PipelineOptions(CLI::App* app) {
    app->add_option("--config", config_file_, "key=value config file");
    for (const auto& spec : kPipelineFlags) {
      options_.emplace_back(
          spec.key, app->add_option(spec.flag, values_[spec.key], spec.help));
    }
    dump_scores_ =
        app->add_flag("--dump-scores", "Write per-point (score, is_id) rows");
  }

  tsl::PipelineConfig Resolve() const {
    tsl::ConfigOverrides overrides;
    for (const auto& [key, option] : options_) {
      if (option->count() > 0) overrides.emplace_back(key, values_.at(key));
    }
    if (dump_scores_->count() > 0)
      overrides.emplace_back("dump_scores", "true");
    return tsl::ResolveConfig(config_file_, overrides);
  }

 private:
  std::string config_file_;
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, CLI::Option*>> options_;
  CLI::Option* dump_scores_ = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Topological structure learning for weakly-supervised OOD "
      "detection on embedding files"};
  app.require_subcommand(1);
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress progress logging");

  tsl::SyntheticSpec spec;
  std::string synth_out = "synthetic";
  auto* synth = app.add_subcommand("synth", "Write a synthetic benchmark");
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--seed", spec.seed, "Random seed");
  synth->add_option("--classes", spec.num_classes, "ID classes");
  synth->add_option("--dim", spec.dim, "Feature dimension");
  synth->add_option("--center-scale", spec.id_center_scale,
                    "Spread of ID class centers");
  synth->add_option("--class-std", spec.class_std, "Per-class std deviation");
  synth->add_option("--ood-modes", spec.ood_modes, "Number of OOD modes");
  synth->add_option("--ood-offset", spec.ood_offset,
                    "Distance of OOD modes from the ID centroid");
  synth->add_option("--labeled-per-class", spec.labeled_per_class);
  synth->add_option("--unlabeled-id-per-class", spec.unlabeled_id_per_class);
  synth->add_option("--unlabeled-ood", spec.unlabeled_ood);
  synth->add_option("--test-id-count", spec.test_id);
  synth->add_option("--test-ood-count", spec.test_ood,
                    "Ignored unless --share-ood=false");
  synth->add_option("--share-ood", spec.share_ood,
                    "Test OOD set equals the unlabeled OOD points");

  auto* mine = app.add_subcommand("mine", "Estimate the metric and mine pairs");
  PipelineOptions mine_options(mine);

  auto* train = app.add_subcommand("train", "Mine pairs and train a projector");
  PipelineOptions train_options(train);

  std::string projector_path;
  auto* score = app.add_subcommand("score", "Score test sets with a projector");
  PipelineOptions score_options(score);
  score->add_option("--projector", projector_path,
                    "Projector file (default: <out>/projector.bin)");

  std::string id_scores;
  std::string ood_scores;
  std::string eval_out;
  double eval_tpr = tsl::kDefaultTprTarget;
  auto* eval = app.add_subcommand("eval", "Metrics on precomputed scores");
  eval->add_option("--id-scores", id_scores, "One ID score per line")
      ->required();
  eval->add_option("--ood-scores", ood_scores, "One OOD score per line")
      ->required();
  eval->add_option("--tpr-target", eval_tpr, "TPR used to pick the threshold");
  eval->add_option("--out", eval_out, "Also write report.txt/report.json here");

  auto* run = app.add_subcommand("run", "Full pipeline: mine, train, score");
  PipelineOptions run_options(run);

  auto* ablate = app.add_subcommand("ablate", "Run the PPM/NPM/TSM ladder");
  PipelineOptions ablate_options(ablate);

  CLI11_PARSE(app, argc, argv);
  if (quiet) tsl::SetLogStream(nullptr);

  try {
    if (synth->parsed()) {
      tsl::CmdSynth(spec, synth_out);
    } else if (mine->parsed()) {
      tsl::CmdMine(mine_options.Resolve());
    } else if (train->parsed()) {
      tsl::CmdTrain(train_options.Resolve());
    } else if (score->parsed()) {
      const tsl::PipelineConfig config = score_options.Resolve();
      const auto path = projector_path.empty()
                            ? config.out / tsl::artifacts::kProjector
                            : std::filesystem::path(projector_path);
      std::cout << tsl::CmdScore(config, path).ToText();
    } else if (eval->parsed()) {
      std::cout
          << tsl::CmdEval(id_scores, ood_scores, eval_tpr, eval_out).ToText();
    } else if (run->parsed()) {
      const auto reports = tsl::CmdRun(run_options.Resolve());
      for (const auto& report : reports) std::cout << report.ToText();
    } else if (ablate->parsed()) {
      std::cout << tsl::FormatAblationTable(
          tsl::CmdAblate(ablate_options.Resolve()));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
