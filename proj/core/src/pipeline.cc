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

#include "tsl/pipeline.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "text_util.h"

namespace tsl {
namespace {

std::ostream* g_log = &std::clog;

void Log(const std::string& message) {
  if (g_log) *g_log << "[tsl] " << message << '\n';
}

void RequireFile(const std::filesystem::path& path, const char* what) {
  if (path.empty()) {
    throw ConfigError(std::string("missing required input path: ") + what);
  }
  if (!std::filesystem::exists(path)) {
    throw ConfigError(std::string(what) +
                      " file does not exist: " + path.string());
  }
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void EnsureDirectory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error(dir.string() +
                             ": cannot create directory: " + ec.message());
  }
}

std::string FormatLoss(const LossBreakdown& loss) {
  return "l_a=" + FormatDouble(loss.l_a) + " l_c=" + FormatDouble(loss.l_c) +
         " l_l=" + FormatDouble(loss.l_l) + " l_f=" + FormatDouble(loss.l_f) +
         " total=" + FormatDouble(loss.total);
}

struct Scored {
  std::vector<double> id_scores;
  std::vector<double> ood_scores;
  double threshold = 0;
  MetricsReport report;
};

Scored ScoreAndEvaluate(const Projector& projector, const EmbeddingSet& labeled,
                        const EmbeddingSet& test_id,
                        const EmbeddingSet& test_ood,
                        const EmbeddingSet* holdout,
                        const PipelineConfig& config) {
  const MsScorer scorer(projector, ComputeClassCenters(labeled));
  Scored scored;
  scored.id_scores = scorer.ScoreAll(test_id);
  scored.ood_scores = scorer.ScoreAll(test_ood);
  scored.report =
      Evaluate(scored.id_scores, scored.ood_scores, config.tpr_target);
  scored.threshold = scored.report.threshold;
  if (config.threshold_from == ThresholdSource::kHoldout) {
    if (!holdout)
      throw ConfigError("threshold_from=holdout needs holdout data");
    scored.threshold =
        ChooseThreshold(scorer.ScoreAll(*holdout), config.tpr_target);
    scored.report.threshold = scored.threshold;
  }
  return scored;
}

void WriteReport(const MetricsReport& report,
                 const std::filesystem::path& out) {
  WriteText(out / artifacts::kReport, report.ToText());
  WriteText(out / artifacts::kReportJson, report.ToJson());
}

}  // namespace

void SetLogStream(std::ostream* stream) { g_log = stream; }

Datasets LoadDatasets(const PipelineConfig& config) {
  RequireFile(config.labeled, "labeled");
  RequireFile(config.test_id, "test_id");
  RequireFile(config.test_ood, "test_ood");
  if (!config.unlabeled.empty()) RequireFile(config.unlabeled, "unlabeled");
  if (config.threshold_from == ThresholdSource::kHoldout) {
    RequireFile(config.holdout, "holdout");
  }

  Datasets data{
      LoadEmbeddings(config.labeled, Role::kLabeledId),
      std::nullopt,
      LoadEmbeddings(config.test_id, Role::kTestId),
      LoadEmbeddings(config.test_ood, Role::kTestOod),
      std::nullopt,
  };
  if (!config.unlabeled.empty()) {
    data.unlabeled = LoadEmbeddings(config.unlabeled, Role::kUnlabeledMix);
  }
  if (!config.holdout.empty()) {
    data.holdout = LoadEmbeddings(config.holdout, Role::kTestId);
  }
  return data;
}

Datasets DatasetsFromSynthetic(const SyntheticData& data) {
  if (!data.test_id) throw std::invalid_argument("synthetic test_id is empty");
  if (!data.test_ood) {
    throw std::invalid_argument("synthetic test_ood is empty");
  }
  return Datasets{data.labeled, data.unlabeled, *data.test_id, *data.test_ood,
                  std::nullopt};
}

MiningOutcome Mine(const EmbeddingSet& labeled, const EmbeddingSet* unlabeled,
                   const PipelineConfig& config) {
  const TrainConfig& train = config.train;
  MahalanobisMetric metric = EstimateMetric(labeled, config.shrinkage);
  EmbeddingSet pool = MakePool(labeled, unlabeled);
  Log("metric: dim=" + std::to_string(metric.dim()) +
      " shrinkage=" + FormatDouble(metric.shrinkage()));

  NeighborTable table =
      BuildNeighborTableWhitened(metric.WhitenRows(pool.rows()));
  Log("neighbor table: " + std::to_string(table.n_points()) + " points");

  const NegativeBound bound = ResolveNegativeBound(
      train.k, train.beta, pool.size(), config.negative_bound_fraction);
  if (bound.rescaled) {
    Log("warning: beta*K=" + std::to_string(train.k * train.beta) +
        " exceeds the pool; negative rank bound rescaled to " +
        std::to_string(bound.bound));
  }
  if (NegativeSetsEmpty(table, bound.bound)) {
    Log("warning: negative rank bound " + std::to_string(bound.bound) +
        " leaves every negative set empty; the margin term is inactive");
  }

  PairInventory inventory =
      MinePairs(table, labeled, train.k, train.beta, bound.bound);
  Log("pairs: close=" + std::to_string(inventory.close.size()) +
      " loose=" + std::to_string(inventory.loose.size()) +
      " labeled=" + std::to_string(inventory.labeled_intra.size()));
  return MiningOutcome{std::move(metric), std::move(pool), std::move(table),
                       bound, std::move(inventory)};
}

RunOutcome RunOnData(const Datasets& data, const PipelineConfig& config,
                     const MiningOutcome* mined) {
  config.Validate();
  std::optional<MiningOutcome> owned;
  if (!mined) {
    owned.emplace(Mine(data.labeled,
                       data.unlabeled ? &*data.unlabeled : nullptr, config));
    mined = &*owned;
  }

  const TrainConfig train = config.EffectiveTrainConfig();
  RunOutcome run{
      Train(mined->pool, data.labeled, mined->table, mined->inventory,
            mined->metric, train,
            [](int epoch, const LossBreakdown& loss) {
              if (epoch == 1 || epoch % 50 == 0) {
                Log("epoch " + std::to_string(epoch) + " " + FormatLoss(loss));
              }
            }),
      {},
      {},
      0,
      {},
      {}};
  // Scores come from the projector as it will be stored on disk.
  run.training.projector.RoundToStoragePrecision();

  const EmbeddingSet* holdout = data.holdout ? &*data.holdout : nullptr;
  Scored scored =
      ScoreAndEvaluate(run.training.projector, data.labeled, data.test_id,
                       data.test_ood, holdout, config);
  run.id_scores = std::move(scored.id_scores);
  run.ood_scores = std::move(scored.ood_scores);
  run.threshold = scored.threshold;
  run.report = scored.report;

  const std::size_t dim = data.labeled.dim();
  run.identity_report =
      ScoreAndEvaluate(InitProjector(dim, dim, InitScheme::kIdentity, 0),
                       data.labeled, data.test_id, data.test_ood, holdout,
                       config)
          .report;
  Log("auroc=" + FormatDouble(run.report.auroc) + " (identity projector " +
      FormatDouble(run.identity_report.auroc) + ")");
  return run;
}

void WriteRunArtifacts(const RunOutcome& run, const MiningOutcome& mined,
                       const PipelineConfig& config,
                       const std::filesystem::path& out) {
  EnsureDirectory(out);
  SaveProjector(run.training.projector, out / artifacts::kProjector);
  WritePairInventory(mined.inventory, out / artifacts::kPairs);
  WriteNegativeConfig(mined.inventory, out / artifacts::kNegatives);

  std::ostringstream history;
  for (std::size_t e = 0; e < run.training.history.size(); ++e) {
    history << "epoch=" << (e + 1) << ' ' << FormatLoss(run.training.history[e])
            << '\n';
  }
  WriteText(out / artifacts::kHistory, history.str());

  WriteScoreFile(run.id_scores, out / artifacts::kScoresId);
  WriteScoreFile(run.ood_scores, out / artifacts::kScoresOod);
  if (config.dump_scores) {
    std::ostringstream dump;
    dump << "score is_id\n";
    for (double s : run.id_scores) dump << FormatDouble(s) << " 1\n";
    for (double s : run.ood_scores) dump << FormatDouble(s) << " 0\n";
    WriteText(out / artifacts::kScoreDump, dump.str());
  }
  WriteReport(run.report, out);

  std::ostringstream manifest;
  manifest << "# tsl run manifest; parses back as a config file\n"
           << config.ToText() << "# derived\n"
           << "# pool_size=" << mined.pool.size() << '\n'
           << "# shrinkage_resolved=" << FormatDouble(mined.metric.shrinkage())
           << '\n'
           << "# close_pairs=" << mined.inventory.close.size() << '\n'
           << "# loose_pairs=" << mined.inventory.loose.size() << '\n'
           << "# labeled_pairs=" << mined.inventory.labeled_intra.size() << '\n'
           << "# negative_rank_bound=" << mined.bound.bound
           << (mined.bound.rescaled ? " (rescaled)" : "") << '\n'
           << "# steps_per_epoch=" << run.training.steps_per_epoch << '\n';
  if (!run.training.history.empty()) {
    manifest << "# final_loss " << FormatLoss(run.training.history.back())
             << '\n';
  }
  manifest << "# identity_auroc=" << FormatDouble(run.identity_report.auroc)
           << '\n';
  WriteText(out / artifacts::kManifest, manifest.str());
}

std::vector<double> ReadScoreFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open score file");
  std::vector<double> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    double value = 0;
    const char* begin = line.data() + first;
    const char* end = line.data() + last + 1;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
      throw std::runtime_error(path.string() + ": unparsable score on line " +
                               std::to_string(line_no));
    }
    scores.push_back(value);
  }
  if (scores.empty()) {
    throw std::runtime_error(path.string() + ": score file is empty");
  }
  return scores;
}

void WriteScoreFile(const std::vector<double>& scores,
                    const std::filesystem::path& path) {
  std::ostringstream text;
  for (double s : scores) text << FormatDouble(s) << '\n';
  WriteText(path, text.str());
}

void CmdSynth(const SyntheticSpec& spec, const std::filesystem::path& out) {
  const SyntheticData data = GenerateSynthetic(spec);
  if (!data.test_id) {
    throw std::invalid_argument(
        "synthetic spec yields an empty test_id set; evaluation needs at "
        "least one test ID point");
  }
  if (!data.test_ood) {
    throw std::invalid_argument(
        "synthetic spec yields an empty test_ood set; evaluation needs at "
        "least one OOD point (raise unlabeled_ood with share_ood, or "
        "test_ood)");
  }
  EnsureDirectory(out);
  SaveEmbeddings(data.labeled, out / synth_files::kLabeled);
  if (data.unlabeled) {
    SaveEmbeddings(*data.unlabeled, out / synth_files::kUnlabeled);
  }
  SaveEmbeddings(*data.test_id, out / synth_files::kTestId);
  SaveEmbeddings(*data.test_ood, out / synth_files::kTestOod);
  WriteText(out / artifacts::kManifest,
            "# tsl synthetic manifest\n" + spec.ToText());
  Log("synthetic data written to " + out.string());
}

MiningOutcome CmdMine(const PipelineConfig& config) {
  RequireFile(config.labeled, "labeled");
  const EmbeddingSet labeled = LoadEmbeddings(config.labeled, Role::kLabeledId);
  std::optional<EmbeddingSet> unlabeled;
  if (!config.unlabeled.empty()) {
    RequireFile(config.unlabeled, "unlabeled");
    unlabeled = LoadEmbeddings(config.unlabeled, Role::kUnlabeledMix);
  }
  MiningOutcome mined =
      Mine(labeled, unlabeled ? &*unlabeled : nullptr, config);

  EnsureDirectory(config.out);
  WritePairInventory(mined.inventory, config.out / artifacts::kPairs);
  WriteNegativeConfig(mined.inventory, config.out / artifacts::kNegatives);
  WriteMatrixFile(RowMatrix(mined.metric.covariance()),
                  config.out / artifacts::kCovariance);
  WriteMatrixFile(ComputeClassCenters(labeled).centers(),
                  config.out / artifacts::kCenters);
  return mined;
}

TrainResult CmdTrain(const PipelineConfig& config) {
  RequireFile(config.labeled, "labeled");
  const EmbeddingSet labeled = LoadEmbeddings(config.labeled, Role::kLabeledId);
  std::optional<EmbeddingSet> unlabeled;
  if (!config.unlabeled.empty()) {
    RequireFile(config.unlabeled, "unlabeled");
    unlabeled = LoadEmbeddings(config.unlabeled, Role::kUnlabeledMix);
  }
  const MiningOutcome mined =
      Mine(labeled, unlabeled ? &*unlabeled : nullptr, config);
  TrainResult result = Train(mined.pool, labeled, mined.table, mined.inventory,
                             mined.metric, config.EffectiveTrainConfig());
  result.projector.RoundToStoragePrecision();

  EnsureDirectory(config.out);
  SaveProjector(result.projector, config.out / artifacts::kProjector);
  WritePairInventory(mined.inventory, config.out / artifacts::kPairs);
  WriteNegativeConfig(mined.inventory, config.out / artifacts::kNegatives);
  std::ostringstream history;
  for (std::size_t e = 0; e < result.history.size(); ++e) {
    history << "epoch=" << (e + 1) << ' ' << FormatLoss(result.history[e])
            << '\n';
  }
  WriteText(config.out / artifacts::kHistory, history.str());
  std::ostringstream manifest;
  manifest << "# tsl train manifest; parses back as a config file\n"
           << config.ToText();
  if (!result.history.empty()) {
    manifest << "# final_loss " << FormatLoss(result.history.back()) << '\n';
  }
  WriteText(config.out / artifacts::kManifest, manifest.str());
  return result;
}

MetricsReport CmdScore(const PipelineConfig& config,
                       const std::filesystem::path& projector_path) {
  const Datasets data = LoadDatasets(config);
  RequireFile(projector_path, "projector");
  const Projector projector = LoadProjector(projector_path);
  const EmbeddingSet* holdout = data.holdout ? &*data.holdout : nullptr;
  const Scored scored = ScoreAndEvaluate(projector, data.labeled, data.test_id,
                                         data.test_ood, holdout, config);
  EnsureDirectory(config.out);
  WriteScoreFile(scored.id_scores, config.out / artifacts::kScoresId);
  WriteScoreFile(scored.ood_scores, config.out / artifacts::kScoresOod);
  WriteReport(scored.report, config.out);
  return scored.report;
}

MetricsReport CmdEval(const std::filesystem::path& id_scores,
                      const std::filesystem::path& ood_scores,
                      double tpr_target, const std::filesystem::path& out) {
  const MetricsReport report =
      Evaluate(ReadScoreFile(id_scores), ReadScoreFile(ood_scores), tpr_target);
  if (!out.empty()) {
    EnsureDirectory(out);
    WriteReport(report, out);
  }
  return report;
}

std::vector<MetricsReport> CmdRun(const PipelineConfig& config) {
  config.Validate();
  const Datasets data = LoadDatasets(config);
  const MiningOutcome mined =
      Mine(data.labeled, data.unlabeled ? &*data.unlabeled : nullptr, config);

  std::vector<MetricsReport> reports;
  for (int r = 0; r < config.repeats; ++r) {
    PipelineConfig repeat = config;
    repeat.train.seed = config.train.seed + static_cast<std::uint64_t>(r);
    repeat.repeats = 1;
    const std::filesystem::path out =
        config.repeats > 1 ? config.out / ("rep" + std::to_string(r))
                           : config.out;
    const RunOutcome run = RunOnData(data, repeat, &mined);
    WriteRunArtifacts(run, mined, repeat, out);
    reports.push_back(run.report);
  }

  if (config.repeats > 1) {
    auto summarize = [&](const char* name, double MetricsReport::* field) {
      double mean = 0;
      for (const auto& r : reports) mean += r.*field;
      mean /= static_cast<double>(reports.size());
      double var = 0;
      for (const auto& r : reports)
        var += (r.*field - mean) * (r.*field - mean);
      const double stddev =
          std::sqrt(var / static_cast<double>(reports.size() - 1));
      return std::string(name) + "_mean=" + FormatDouble(mean) + "\n" + name +
             "_std=" + FormatDouble(stddev) + "\n";
    };
    std::string summary = "repeats=" + std::to_string(config.repeats) + "\n";
    summary += summarize("auroc", &MetricsReport::auroc);
    summary += summarize("fpr95", &MetricsReport::fpr95);
    summary += summarize("detection_error", &MetricsReport::detection_error);
    summary += summarize("aupr_in", &MetricsReport::aupr_in);
    summary += summarize("aupr_out", &MetricsReport::aupr_out);
    EnsureDirectory(config.out);
    WriteText(config.out / artifacts::kSummary, summary);
  }
  return reports;
}

std::vector<AblationRow> RunAblationLadder(const Datasets& data,
                                           const PipelineConfig& config) {
  const MiningOutcome mined =
      Mine(data.labeled, data.unlabeled ? &*data.unlabeled : nullptr, config);
  std::vector<AblationRow> rows = {
      {"baseline", false, false, false, {}, {}},
      {"+ppm", true, false, false, {}, {}},
      {"+npm", true, true, false, {}, {}},
      {"+tsm", true, true, true, {}, {}},
  };
  for (auto& row : rows) {
    PipelineConfig step = config;
    step.ablate = AblateTarget::kNone;
    step.train.enable_ppm = row.ppm;
    step.train.enable_npm = row.npm;
    step.train.enable_tsm = row.tsm;
    Log("ablation row " + row.name);
    const RunOutcome run = RunOnData(data, step, &mined);
    row.report = run.report;
    if (!run.training.history.empty()) {
      row.final_loss = run.training.history.back();
    }
  }
  return rows;
}

std::string FormatAblationTable(const std::vector<AblationRow>& rows) {
  std::ostringstream table;
  table << std::left << std::setw(10) << "row" << " ppm npm tsm "
        << std::setw(10) << "auroc" << std::setw(10) << "fpr95" << std::setw(10)
        << "det_err" << std::setw(10) << "aupr_in" << std::setw(10)
        << "aupr_out" << '\n';
  auto cell = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << v;
    return s.str();
  };
  for (const auto& row : rows) {
    table << std::setw(10) << row.name << "  " << row.ppm << "   " << row.npm
          << "   " << row.tsm << "  " << std::setw(10) << cell(row.report.auroc)
          << std::setw(10) << cell(row.report.fpr95) << std::setw(10)
          << cell(row.report.detection_error) << std::setw(10)
          << cell(row.report.aupr_in) << std::setw(10)
          << cell(row.report.aupr_out) << '\n';
  }
  return table.str();
}

std::vector<AblationRow> CmdAblate(const PipelineConfig& config) {
  config.Validate();
  const Datasets data = LoadDatasets(config);
  std::vector<AblationRow> rows = RunAblationLadder(data, config);
  EnsureDirectory(config.out);
  WriteText(config.out / artifacts::kAblation, FormatAblationTable(rows));
  return rows;
}

}  // namespace tsl
