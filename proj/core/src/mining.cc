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

#include "tsl/mining.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace tsl {
namespace {

void CheckK(const NeighborTable& table, std::size_t k) {
  if (k == 0 || k >= table.n_points()) {
    throw std::invalid_argument(
        "K must satisfy 0 < K < n_points (K=" + std::to_string(k) +
        ", n_points=" + std::to_string(table.n_points()) + ")");
  }
}

void RankAnchors(const RowMatrix& whitened, std::size_t begin, std::size_t end,
                 std::vector<PointIndex>& ranked,
                 std::vector<PointIndex>& rank_of) {
  const std::size_t n = static_cast<std::size_t>(whitened.rows());
  Eigen::VectorXd dist(whitened.rows());
  std::vector<PointIndex> order(n - 1);
  for (std::size_t i = begin; i < end; ++i) {
    dist = (whitened.rowwise() - whitened.row(static_cast<Eigen::Index>(i)))
               .rowwise()
               .squaredNorm()
               .cwiseSqrt();
    std::size_t w = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) order[w++] = static_cast<PointIndex>(j);
    }
    std::sort(order.begin(), order.end(), [&](PointIndex a, PointIndex b) {
      const double da = dist[a];
      const double db = dist[b];
      return da < db || (da == db && a < b);
    });
    std::copy(order.begin(), order.end(), ranked.begin() + i * (n - 1));
    PointIndex* inverse = rank_of.data() + i * n;
    inverse[i] = std::numeric_limits<PointIndex>::max();
    for (std::size_t r = 0; r < n - 1; ++r) {
      inverse[order[r]] = static_cast<PointIndex>(r);
    }
  }
}

}  // namespace

NeighborTable::NeighborTable(std::size_t n_points,
                             std::vector<PointIndex> ranked,
                             std::vector<PointIndex> rank_of)
    : n_(n_points), ranked_(std::move(ranked)), rank_of_(std::move(rank_of)) {
  if (n_ < 2) throw std::invalid_argument("neighbor table needs >= 2 points");
  if (ranked_.size() != n_ * (n_ - 1) || rank_of_.size() != n_ * n_) {
    throw std::invalid_argument("neighbor table storage has the wrong size");
  }
}

NeighborTable BuildNeighborTable(const EmbeddingSet& pool,
                                 const MahalanobisMetric& metric,
                                 unsigned num_threads) {
  if (pool.dim() != metric.dim()) {
    throw std::invalid_argument("pool and metric dims differ");
  }
  return BuildNeighborTableWhitened(metric.WhitenRows(pool.rows()),
                                    num_threads);
}

NeighborTable BuildNeighborTableWhitened(const RowMatrix& whitened,
                                         unsigned num_threads) {
  const std::size_t n = static_cast<std::size_t>(whitened.rows());
  if (n < 2) throw std::invalid_argument("neighbor table needs >= 2 points");
  if (n > std::numeric_limits<PointIndex>::max()) {
    throw std::invalid_argument("pool too large for 32-bit point indices");
  }
  std::vector<PointIndex> ranked(n * (n - 1));
  std::vector<PointIndex> rank_of(n * n);

  if (num_threads == 0)
    num_threads = std::max(1u, std::thread::hardware_concurrency());
  num_threads = static_cast<unsigned>(
      std::min<std::size_t>(num_threads, std::max<std::size_t>(1, n / 64)));

  if (num_threads <= 1) {
    RankAnchors(whitened, 0, n, ranked, rank_of);
  } else {
    std::vector<std::jthread> workers;
    const std::size_t block = (n + num_threads - 1) / num_threads;
    for (unsigned t = 0; t < num_threads; ++t) {
      const std::size_t begin = t * block;
      const std::size_t end = std::min(n, begin + block);
      if (begin >= end) break;
      workers.emplace_back([&, begin, end] {
        RankAnchors(whitened, begin, end, ranked, rank_of);
      });
    }
  }
  return NeighborTable(n, std::move(ranked), std::move(rank_of));
}

PairSet MineClosePairs(const NeighborTable& table, std::size_t k) {
  CheckK(table, k);
  PairSet pairs;
  for (std::size_t i = 0; i < table.n_points(); ++i) {
    for (PointIndex j : table.ranking(i).first(k)) {
      if (i < j && table.rank_of(j, i) < k) {
        pairs.push_back({static_cast<PointIndex>(i), j});
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

PairSet MineLoosePairs(const NeighborTable& table, std::size_t k) {
  CheckK(table, k);
  PairSet pairs;
  for (std::size_t i = 0; i < table.n_points(); ++i) {
    for (PointIndex j : table.ranking(i).first(k)) {
      // Only one direction holds, so each loose pair is seen exactly once.
      if (table.rank_of(j, i) >= k) {
        pairs.push_back(IndexPair::Unordered(static_cast<PointIndex>(i), j));
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

bool IsNegativeAtBound(const NeighborTable& table, std::size_t i, std::size_t j,
                       std::size_t rank_bound) {
  if (i == j) return false;
  return table.rank_of(i, j) >= rank_bound;
}

std::vector<IndexPair> SampleNegativePairs(const NeighborTable& table,
                                           std::size_t rank_bound,
                                           std::size_t count,
                                           std::mt19937_64& rng) {
  std::vector<IndexPair> pairs;
  if (NegativeSetsEmpty(table, rank_bound)) return pairs;
  const std::size_t n = table.n_points();
  std::uniform_int_distribution<std::size_t> anchor_dist(0, n - 1);
  std::uniform_int_distribution<std::size_t> position_dist(rank_bound, n - 2);
  pairs.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t anchor = anchor_dist(rng);
    const std::size_t position = position_dist(rng);
    pairs.push_back(
        {static_cast<PointIndex>(anchor), table.ranking(anchor)[position]});
  }
  return pairs;
}

std::vector<IndexPair> SampleNegativePairs(const NeighborTable& table,
                                           std::size_t k, std::size_t beta,
                                           std::size_t count,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return SampleNegativePairs(table, k * beta, count, rng);
}

std::vector<IndexPair> SampleAnyPairs(std::size_t n_points, std::size_t count,
                                      std::mt19937_64& rng) {
  if (n_points < 2) throw std::invalid_argument("need >= 2 points");
  std::uniform_int_distribution<std::size_t> anchor_dist(0, n_points - 1);
  std::uniform_int_distribution<std::size_t> other_dist(0, n_points - 2);
  std::vector<IndexPair> pairs;
  pairs.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t i = anchor_dist(rng);
    std::size_t j = other_dist(rng);
    if (j >= i) ++j;
    pairs.push_back({static_cast<PointIndex>(i), static_cast<PointIndex>(j)});
  }
  return pairs;
}

PairSet MineLabeledPairs(const EmbeddingSet& labeled) {
  if (labeled.role() != Role::kLabeledId) {
    throw std::invalid_argument("labeled pairs need a labeled_id set");
  }
  PairSet pairs;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    for (std::size_t j = i + 1; j < labeled.size(); ++j) {
      if (labeled.label(i) == labeled.label(j)) {
        pairs.push_back(
            {static_cast<PointIndex>(i), static_cast<PointIndex>(j)});
      }
    }
  }
  return pairs;
}

StepBaseline MineStepBaseline(const NeighborTable& table, std::size_t k) {
  CheckK(table, k);
  StepBaseline step;
  for (std::size_t i = 0; i < table.n_points(); ++i) {
    for (PointIndex j : table.ranking(i).first(k)) {
      step.positives.push_back(
          IndexPair::Unordered(static_cast<PointIndex>(i), j));
    }
  }
  std::sort(step.positives.begin(), step.positives.end());
  step.positives.erase(
      std::unique(step.positives.begin(), step.positives.end()),
      step.positives.end());
  return step;
}

NegativeBound ResolveNegativeBound(std::size_t k, std::size_t beta,
                                   std::size_t n_points, double fraction) {
  if (!(fraction > 0 && fraction <= 1)) {
    throw std::invalid_argument("negative bound fraction must be in (0, 1]");
  }
  const std::size_t requested = k * beta;
  const auto cap = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n_points)));
  if (requested <= cap) return {requested, false};
  return {cap, true};
}

PairInventory MinePairs(const NeighborTable& table, const EmbeddingSet& labeled,
                        std::size_t k, std::size_t beta,
                        std::size_t negative_rank_bound) {
  if (labeled.size() > table.n_points()) {
    throw std::invalid_argument("labeled set larger than the mining pool");
  }
  PairInventory inventory;
  inventory.close = MineClosePairs(table, k);
  inventory.loose = MineLoosePairs(table, k);
  inventory.labeled_intra = MineLabeledPairs(labeled);
  inventory.k = k;
  inventory.beta = beta;
  inventory.negative_rank_bound = negative_rank_bound;
  return inventory;
}

void WritePairInventory(const PairInventory& inventory,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw std::runtime_error(path.string() + ": cannot open for writing");
  auto emit = [&](const PairSet& pairs, const char* tag) {
    for (const auto& p : pairs) {
      out << p.first << ' ' << p.second << ' ' << tag << '\n';
    }
  };
  emit(inventory.close, "close");
  emit(inventory.loose, "loose");
  emit(inventory.labeled_intra, "labeled");
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void WriteNegativeConfig(const PairInventory& inventory,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw std::runtime_error(path.string() + ": cannot open for writing");
  out << inventory.k << ' ' << inventory.beta << ' '
      << inventory.negative_rank_bound << '\n';
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace tsl
