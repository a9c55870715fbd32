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

#ifndef TSL_TRAINING_H_
#define TSL_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "tsl/embedding.h"
#include "tsl/metric.h"
#include "tsl/mining.h"
#include "tsl/objective.h"
#include "tsl/projector.h"

namespace tsl {

// Pairs drawn from each source per SGD step.
struct StepQuotas {
  std::size_t labeled = 32;
  std::size_t close = 32;
  std::size_t loose = 32;
  std::size_t negative = 32;

  std::size_t total() const { return labeled + close + loose + negative; }
};

inline constexpr int kReferenceEpochs = 1500;

struct TrainConfig {
  LossWeights weights;
  std::size_t k = 12;
  std::size_t beta = 4000;
  double learning_rate = 3e-4;
  int epochs = kReferenceEpochs;
  StepQuotas quotas;
  std::uint64_t seed = 1;

  // Ablation switches. With enable_ppm off, close and loose pairs are pooled
  // into one positive set trained with lambda2. With enable_npm off,
  // negatives are any two distinct points. With enable_tsm off, the labeled
  // intra-class term is dropped.
  bool enable_ppm = true;
  bool enable_npm = true;
  bool enable_tsm = true;

  InitScheme init = InitScheme::kIdentity;
  std::size_t d_out = 0;  // 0 means d_in

  std::size_t batch_size() const { return quotas.total(); }
  // Splits `size` evenly over the four sources.
  void SetBatchSize(std::size_t size);

  // Throws std::invalid_argument naming the violated constraint, including
  // the ordering lambda1 < lambda2 < lambda3.
  void Validate() const;
};

struct TrainResult {
  Projector projector;
  // Epoch-mean losses, one entry per epoch.
  std::vector<LossBreakdown> history;
  std::size_t steps_per_epoch = 0;
};

// ceil((|close| + |loose|) / (q_close + q_loose)).
std::size_t StepsPerEpoch(const PairInventory& inventory,
                          const StepQuotas& quotas);

// Draws one step's pairs. Uniform with replacement from the inventories;
// negatives come from the rank complement (or any pair, with NPM off).
StepBatches SampleStep(const NeighborTable& table,
                       const PairInventory& inventory,
                       const TrainConfig& config, std::mt19937_64& rng);

using EpochCallback = std::function<void(int epoch, const LossBreakdown&)>;

// Plain SGD on the summed hinge objective. `pool` must hold the labeled rows
// first, and `table`/`inventory` must have been mined from it. Deterministic
// for a fixed config.seed.
TrainResult Train(const EmbeddingSet& pool, const EmbeddingSet& labeled,
                  const NeighborTable& table, const PairInventory& inventory,
                  const MahalanobisMetric& metric, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

}  // namespace tsl

#endif  // TSL_TRAINING_H_
