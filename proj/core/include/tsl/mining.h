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

#ifndef TSL_MINING_H_
#define TSL_MINING_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "tsl/embedding.h"
#include "tsl/metric.h"

namespace tsl {

using PointIndex = std::uint32_t;

struct IndexPair {
  PointIndex first = 0;
  PointIndex second = 0;

  // Canonical unordered form, first < second.
  static IndexPair Unordered(PointIndex a, PointIndex b) {
    return a < b ? IndexPair{a, b} : IndexPair{b, a};
  }

  friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
};

// Sorted, duplicate-free list of unordered pairs.
using PairSet = std::vector<IndexPair>;

// Exact neighbor ranking of every point against every other point.
//
// ranking(i) lists all j != i by ascending distance to i, ties broken by
// ascending index. rank_of(i, j) is the 0-based position of j in ranking(i).
class NeighborTable {
 public:
  NeighborTable(std::size_t n_points, std::vector<PointIndex> ranked,
                std::vector<PointIndex> rank_of);

  std::size_t n_points() const { return n_; }

  std::span<const PointIndex> ranking(std::size_t i) const {
    return {ranked_.data() + i * (n_ - 1), n_ - 1};
  }
  PointIndex rank_of(std::size_t i, std::size_t j) const {
    return rank_of_[i * n_ + j];
  }

  // Is j among the K nearest neighbors of i?
  bool InNeighborhood(std::size_t i, std::size_t j, std::size_t k) const {
    return i != j && rank_of(i, j) < k;
  }

 private:
  std::size_t n_;
  std::vector<PointIndex> ranked_;   // n x (n - 1)
  std::vector<PointIndex> rank_of_;  // n x n, diagonal unused
};

// Full pairwise Mahalanobis ranking over `pool` (labeled rows first).
// Rows are processed in parallel; the result does not depend on scheduling.
NeighborTable BuildNeighborTable(const EmbeddingSet& pool,
                                 const MahalanobisMetric& metric,
                                 unsigned num_threads = 0);

// Same, over rows already mapped through MahalanobisMetric::WhitenRows.
NeighborTable BuildNeighborTableWhitened(const RowMatrix& whitened,
                                         unsigned num_threads = 0);

// Mutual K-NN pairs.
PairSet MineClosePairs(const NeighborTable& table, std::size_t k);

// Pairs where exactly one direction of K-NN membership holds.
PairSet MineLoosePairs(const NeighborTable& table, std::size_t k);

// Directed test: j lies outside the first `rank_bound` neighbors of i.
bool IsNegativeAtBound(const NeighborTable& table, std::size_t i, std::size_t j,
                       std::size_t rank_bound);

inline bool IsNegative(const NeighborTable& table, std::size_t i, std::size_t j,
                       std::size_t k, std::size_t beta) {
  return IsNegativeAtBound(table, i, j, k * beta);
}

// True when no anchor has any negative at this bound.
inline bool NegativeSetsEmpty(const NeighborTable& table,
                              std::size_t rank_bound) {
  return rank_bound + 1 >= table.n_points();
}

// Ordered (anchor, far point) pairs: anchor uniform over the pool, far point
// uniform over ranking positions [rank_bound, n - 1). Returns an empty list
// when the negative sets are empty.
std::vector<IndexPair> SampleNegativePairs(const NeighborTable& table,
                                           std::size_t rank_bound,
                                           std::size_t count,
                                           std::mt19937_64& rng);
std::vector<IndexPair> SampleNegativePairs(const NeighborTable& table,
                                           std::size_t k, std::size_t beta,
                                           std::size_t count,
                                           std::uint64_t seed);

// Any ordered pair i != j, uniformly.
std::vector<IndexPair> SampleAnyPairs(std::size_t n_points, std::size_t count,
                                      std::mt19937_64& rng);

// All same-class pairs of a labeled_id set.
PairSet MineLabeledPairs(const EmbeddingSet& labeled);

// Ablation reference: one-directional K-NN positives, and every ordered pair
// i != j as a negative.
struct StepBaseline {
  PairSet positives;
  static bool IsNegative(std::size_t i, std::size_t j) { return i != j; }
};
StepBaseline MineStepBaseline(const NeighborTable& table, std::size_t k);

struct PairInventory {
  PairSet close;
  PairSet loose;
  PairSet labeled_intra;
  std::size_t k = 0;
  std::size_t beta = 0;
  std::size_t negative_rank_bound = 0;
};

struct NegativeBound {
  std::size_t bound = 0;
  bool rescaled = false;
};

// min(beta * K, ceil(fraction * n_points)).
NegativeBound ResolveNegativeBound(std::size_t k, std::size_t beta,
                                   std::size_t n_points, double fraction);

PairInventory MinePairs(const NeighborTable& table, const EmbeddingSet& labeled,
                        std::size_t k, std::size_t beta,
                        std::size_t negative_rank_bound);

// "i j tag" lines, tag in {close, loose, labeled}.
void WritePairInventory(const PairInventory& inventory,
                        const std::filesystem::path& path);
// A single "K beta bound" line.
void WriteNegativeConfig(const PairInventory& inventory,
                         const std::filesystem::path& path);

}  // namespace tsl

#endif  // TSL_MINING_H_
