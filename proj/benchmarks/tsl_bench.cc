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

#include <random>
#include <vector>

#include "benchmark/benchmark.h"
#include "tsl/metric.h"
#include "tsl/mining.h"
#include "tsl/objective.h"
#include "tsl/scoring.h"
#include "tsl/synthetic.h"
#include "tsl/training.h"

namespace tsl {
namespace {

// Synthetic pool with `classes` classes and roughly 60 rows per class.
struct Fixture {
  EmbeddingSet labeled;
  EmbeddingSet pool;
  MahalanobisMetric metric;

  static Fixture Make(int classes, int dim) {
    SyntheticSpec spec;
    spec.num_classes = classes;
    spec.dim = dim;
    spec.labeled_per_class = 10;
    spec.unlabeled_id_per_class = 40;
    spec.unlabeled_ood = 10 * classes;
    spec.test_id = 0;
    spec.test_ood = 0;
    const SyntheticData data = GenerateSynthetic(spec);
    auto pool = MakePool(data.labeled, &*data.unlabeled);
    auto metric = EstimateMetric(data.labeled, Shrinkage::Auto());
    return {data.labeled, std::move(pool), std::move(metric)};
  }
};

void BM_NeighborTable(benchmark::State& state) {
  const Fixture f = Fixture::Make(static_cast<int>(state.range(0)), 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(BuildNeighborTable(f.pool, f.metric, 1));
  }
  state.counters["pool"] = static_cast<double>(f.pool.size());
}
BENCHMARK(BM_NeighborTable)
    ->Arg(5)
    ->Arg(20)
    ->Arg(40)
    ->Unit(benchmark::kMillisecond);

void BM_TrainingStep(benchmark::State& state) {
  const Fixture f = Fixture::Make(10, static_cast<int>(state.range(0)));
  const NeighborTable table = BuildNeighborTable(f.pool, f.metric);
  TrainConfig config;
  const std::size_t bound = f.pool.size() * 4 / 5;
  const PairInventory inventory =
      MinePairs(table, f.labeled, config.k, config.beta, bound);
  const PairGeometry geometry(f.pool, f.metric);
  Projector projector =
      InitProjector(f.pool.dim(), f.pool.dim(), InitScheme::kIdentity, 1);
  std::mt19937_64 rng(1);
  Eigen::MatrixXd gradient;
  for (auto _ : state) {
    const StepBatches batches = SampleStep(table, inventory, config, rng);
    benchmark::DoNotOptimize(EvaluateLossAndGradient(
        projector, geometry, batches, config.weights, gradient));
    projector.Update(gradient, config.learning_rate);
  }
}
BENCHMARK(BM_TrainingStep)->Arg(32)->Arg(128)->Arg(512);

void BM_Metrics(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0, 1);
  std::vector<double> id(static_cast<std::size_t>(state.range(0)));
  std::vector<double> ood(id.size());
  for (double& x : id) x = normal(rng) + 1;
  for (double& x : ood) x = normal(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Evaluate(id, ood, 0.95));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}
BENCHMARK(BM_Metrics)->Range(1 << 10, 1 << 16);

}  // namespace
}  // namespace tsl

BENCHMARK_MAIN();
