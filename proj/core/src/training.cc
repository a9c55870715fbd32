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

#include "tsl/training.h"

#include <algorithm>
#include <iterator>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tsl {
namespace {

void SampleFrom(const PairSet& source, std::size_t count, std::mt19937_64& rng,
                std::vector<IndexPair>& out) {
  if (source.empty() || count == 0) return;
  std::uniform_int_distribution<std::size_t> pick(0, source.size() - 1);
  out.reserve(out.size() + count);
  for (std::size_t s = 0; s < count; ++s) out.push_back(source[pick(rng)]);
}

// Close and loose are disjoint, so the union is their merge.
PairSet MergedPositives(const PairInventory& inventory) {
  PairSet merged;
  merged.reserve(inventory.close.size() + inventory.loose.size());
  std::merge(inventory.close.begin(), inventory.close.end(),
             inventory.loose.begin(), inventory.loose.end(),
             std::back_inserter(merged));
  return merged;
}

}  // namespace

void TrainConfig::SetBatchSize(std::size_t size) {
  if (size < 4) throw std::invalid_argument("batch_size must be >= 4");
  const std::size_t base = size / 4;
  const std::size_t extra = size % 4;
  quotas.labeled = base + (extra > 0);
  quotas.close = base + (extra > 1);
  quotas.loose = base + (extra > 2);
  quotas.negative = base;
}

void TrainConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("train config: " + what);
  };
  const auto& w = weights;
  if (!(w.lambda1 > 0)) fail("lambda1 must be > 0");
  if (!(w.lambda2 > 0)) fail("lambda2 must be > 0");
  if (!(w.lambda3 > 0)) fail("lambda3 must be > 0");
  if (!(w.lambda1 < w.lambda2)) {
    std::ostringstream msg;
    msg << "constraint lambda1 < lambda2 violated (lambda1=" << w.lambda1
        << ", lambda2=" << w.lambda2 << ")";
    fail(msg.str());
  }
  if (!(w.lambda2 < w.lambda3)) {
    std::ostringstream msg;
    msg << "constraint lambda2 < lambda3 violated (lambda2=" << w.lambda2
        << ", lambda3=" << w.lambda3 << ")";
    fail(msg.str());
  }
  if (!(w.margin > 0)) fail("margin must be > 0");
  if (k == 0) fail("K must be positive");
  if (beta == 0) fail("beta must be positive");
  if (!(learning_rate > 0)) fail("learning_rate must be > 0");
  if (epochs < 0) fail("epochs must be >= 0");
  if (quotas.close + quotas.loose == 0) {
    fail("close and loose quotas cannot both be zero");
  }
}

std::size_t StepsPerEpoch(const PairInventory& inventory,
                          const StepQuotas& quotas) {
  const std::size_t positives = inventory.close.size() + inventory.loose.size();
  const std::size_t per_step = quotas.close + quotas.loose;
  if (per_step == 0) throw std::invalid_argument("no positive quota");
  return std::max<std::size_t>(1, (positives + per_step - 1) / per_step);
}

StepBatches SampleStep(const NeighborTable& table,
                       const PairInventory& inventory,
                       const TrainConfig& config, std::mt19937_64& rng) {
  StepBatches batches;
  if (config.enable_tsm) {
    SampleFrom(inventory.labeled_intra, config.quotas.labeled, rng,
               batches.labeled);
  }
  if (config.enable_ppm) {
    SampleFrom(inventory.close, config.quotas.close, rng, batches.close);
    SampleFrom(inventory.loose, config.quotas.loose, rng, batches.loose);
  } else {
    // Callers training many steps should go through Train, which merges once.
    SampleFrom(MergedPositives(inventory),
               config.quotas.close + config.quotas.loose, rng, batches.close);
  }
  if (config.enable_npm) {
    batches.negative = SampleNegativePairs(table, inventory.negative_rank_bound,
                                           config.quotas.negative, rng);
  } else {
    batches.negative =
        SampleAnyPairs(table.n_points(), config.quotas.negative, rng);
  }
  return batches;
}

TrainResult Train(const EmbeddingSet& pool, const EmbeddingSet& labeled,
                  const NeighborTable& table, const PairInventory& inventory,
                  const MahalanobisMetric& metric, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.Validate();
  if (inventory.close.empty() && inventory.loose.empty()) {
    throw std::runtime_error("no positive structure mined, increase K");
  }
  if (pool.size() != table.n_points()) {
    throw std::invalid_argument("neighbor table was not built on this pool");
  }
  const auto n_labeled = static_cast<Eigen::Index>(labeled.size());
  if (labeled.size() > pool.size() || labeled.dim() != pool.dim() ||
      pool.rows().topRows(n_labeled) != labeled.rows()) {
    throw std::invalid_argument("pool must start with the labeled rows");
  }

  const PairGeometry geometry(pool, metric);
  const std::size_t d_out = config.d_out == 0 ? pool.dim() : config.d_out;
  TrainResult result{InitProjector(pool.dim(), d_out, config.init, config.seed),
                     {},
                     StepsPerEpoch(inventory, config.quotas)};

  PairInventory merged;
  const PairInventory* source = &inventory;
  TrainConfig step_config = config;
  if (!config.enable_ppm) {
    merged.close = MergedPositives(inventory);
    merged.labeled_intra = inventory.labeled_intra;
    merged.negative_rank_bound = inventory.negative_rank_bound;
    step_config.enable_ppm = true;
    step_config.quotas.close = config.quotas.close + config.quotas.loose;
    step_config.quotas.loose = 0;
    source = &merged;
  }

  std::mt19937_64 rng(config.seed);
  Eigen::MatrixXd gradient;
  const double inv_steps = 1.0 / static_cast<double>(result.steps_per_epoch);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    LossBreakdown sum;
    for (std::size_t step = 0; step < result.steps_per_epoch; ++step) {
      const StepBatches batches = SampleStep(table, *source, step_config, rng);
      sum += EvaluateLossAndGradient(result.projector, geometry, batches,
                                     config.weights, gradient);
      result.projector.Update(gradient, config.learning_rate);
    }
    result.history.push_back(sum.Scaled(inv_steps));
    if (on_epoch) on_epoch(epoch, result.history.back());
  }
  return result;
}

}  // namespace tsl
