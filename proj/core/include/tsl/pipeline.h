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

#ifndef TSL_PIPELINE_H_
#define TSL_PIPELINE_H_

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tsl/config.h"
#include "tsl/embedding.h"
#include "tsl/metric.h"
#include "tsl/mining.h"
#include "tsl/scoring.h"
#include "tsl/synthetic.h"
#include "tsl/training.h"

namespace tsl {

// Progress and warnings go here; nullptr silences them. Defaults to std::clog.
void SetLogStream(std::ostream* stream);

// Fixed artifact names inside the output directory.
namespace artifacts {
inline constexpr const char* kProjector = "projector.bin";
inline constexpr const char* kPairs = "pairs.txt";
inline constexpr const char* kNegatives = "negatives.txt";
inline constexpr const char* kHistory = "history.txt";
inline constexpr const char* kScoresId = "scores_id.txt";
inline constexpr const char* kScoresOod = "scores_ood.txt";
inline constexpr const char* kScoreDump = "scores_dump.txt";
inline constexpr const char* kReport = "report.txt";
inline constexpr const char* kReportJson = "report.json";
inline constexpr const char* kManifest = "manifest.txt";
inline constexpr const char* kCovariance = "covariance.bin";
inline constexpr const char* kCenters = "centers.bin";
inline constexpr const char* kAblation = "ablation.txt";
inline constexpr const char* kSummary = "summary.txt";
}  // namespace artifacts

// Synthetic file names written by CmdSynth.
namespace synth_files {
inline constexpr const char* kLabeled = "labeled.bin";
inline constexpr const char* kUnlabeled = "unlabeled.bin";
inline constexpr const char* kTestId = "test_id.bin";
inline constexpr const char* kTestOod = "test_ood.bin";
}  // namespace synth_files

struct Datasets {
  EmbeddingSet labeled;
  std::optional<EmbeddingSet> unlabeled;
  EmbeddingSet test_id;
  EmbeddingSet test_ood;
  std::optional<EmbeddingSet> holdout;
};

Datasets LoadDatasets(const PipelineConfig& config);

// In-memory datasets from a synthetic draw. Fails if either test set is empty.
Datasets DatasetsFromSynthetic(const SyntheticData& data);

struct MiningOutcome {
  MahalanobisMetric metric;
  EmbeddingSet pool;
  NeighborTable table;
  NegativeBound bound;
  PairInventory inventory;
};

MiningOutcome Mine(const EmbeddingSet& labeled, const EmbeddingSet* unlabeled,
                   const PipelineConfig& config);

struct RunOutcome {
  TrainResult training;
  std::vector<double> id_scores;
  std::vector<double> ood_scores;
  // Threshold actually applied by the decision function.
  double threshold = 0;
  MetricsReport report;
  // Same scoring with the untrained identity projector.
  MetricsReport identity_report;
};

// Train, score and evaluate. Reuses `mined` when given (it must come from
// the same labeled/unlabeled data and mining parameters).
RunOutcome RunOnData(const Datasets& data, const PipelineConfig& config,
                     const MiningOutcome* mined = nullptr);

// Writes every run artifact into `out`.
void WriteRunArtifacts(const RunOutcome& run, const MiningOutcome& mined,
                       const PipelineConfig& config,
                       const std::filesystem::path& out);

std::vector<double> ReadScoreFile(const std::filesystem::path& path);
void WriteScoreFile(const std::vector<double>& scores,
                    const std::filesystem::path& path);

// Subcommands. Each writes under config.out (or `out`) using the fixed names.
void CmdSynth(const SyntheticSpec& spec, const std::filesystem::path& out);
MiningOutcome CmdMine(const PipelineConfig& config);
TrainResult CmdTrain(const PipelineConfig& config);
MetricsReport CmdScore(const PipelineConfig& config,
                       const std::filesystem::path& projector_path);
MetricsReport CmdEval(const std::filesystem::path& id_scores,
                      const std::filesystem::path& ood_scores,
                      double tpr_target, const std::filesystem::path& out);
// One report per repeat; repeat r uses seed + r and, when repeats > 1,
// writes into out/rep<r>.
std::vector<MetricsReport> CmdRun(const PipelineConfig& config);

struct AblationRow {
  std::string name;
  bool ppm = false;
  bool npm = false;
  bool tsm = false;
  MetricsReport report;
  LossBreakdown final_loss;
};

// The cumulative ladder: baseline, +PPM, +NPM, +TSM. Mining is shared.
std::vector<AblationRow> RunAblationLadder(const Datasets& data,
                                           const PipelineConfig& config);
std::string FormatAblationTable(const std::vector<AblationRow>& rows);
std::vector<AblationRow> CmdAblate(const PipelineConfig& config);

}  // namespace tsl

#endif  // TSL_PIPELINE_H_
