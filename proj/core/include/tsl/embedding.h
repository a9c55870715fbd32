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

#ifndef TSL_EMBEDDING_H_
#define TSL_EMBEDDING_H_

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tsl {

// Row-major storage so each embedding is a contiguous row.
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Label value for rows without a class.
inline constexpr int kUnlabeled = -1;

enum class Role { kLabeledId, kUnlabeledMix, kTestId, kTestOod };

std::string_view RoleName(Role role);

// An immutable matrix of embeddings with optional per-row class labels.
//
// Labels are either absent, or present for every row. A labeled_id set has a
// class index >= 0 on every row; every other role carries no class, which is
// spelled either as "no label block" or as a block of kUnlabeled values.
class EmbeddingSet {
 public:
  // Throws std::invalid_argument if any invariant is violated.
  EmbeddingSet(RowMatrix rows, std::vector<int> labels, Role role);

  static EmbeddingSet Labeled(RowMatrix rows, std::vector<int> labels) {
    return EmbeddingSet(std::move(rows), std::move(labels), Role::kLabeledId);
  }
  static EmbeddingSet Unlabeled(RowMatrix rows, Role role) {
    return EmbeddingSet(std::move(rows), {}, role);
  }

  std::size_t dim() const { return static_cast<std::size_t>(rows_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(rows_.rows()); }
  Role role() const { return role_; }

  const RowMatrix& rows() const { return rows_; }
  auto row(std::size_t i) const {
    return rows_.row(static_cast<Eigen::Index>(i));
  }

  bool has_labels() const { return !labels_.empty(); }
  std::span<const int> labels() const { return labels_; }
  int label(std::size_t i) const {
    return labels_.empty() ? kUnlabeled : labels_[i];
  }

  // One past the largest class index; 0 for sets without classes.
  int num_classes() const;

  friend bool operator==(const EmbeddingSet& a, const EmbeddingSet& b);

 private:
  RowMatrix rows_;
  std::vector<int> labels_;
  Role role_;
};

// Labeled rows first, then unlabeled rows. The result carries no labels, so
// index i < labeled.size() in the pool is row i of `labeled`.
EmbeddingSet MakePool(const EmbeddingSet& labeled,
                      const EmbeddingSet* unlabeled);

class EmbeddingFileError : public std::runtime_error {
 public:
  enum class Kind {
    kIo,
    kBadHeader,
    kTruncated,
    kNonFinite,
    kLabelOutOfRange,
    kLabelCount,
    kRoleMismatch,
  };

  EmbeddingFileError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Binary layout, all little-endian:
//   "TSLE" | u16 version | u32 dim | u64 rows | rows*dim f32, row-major
// Labels live in a text sidecar at `path + ".labels"`, one integer per line.
inline constexpr std::uint16_t kEmbeddingFormatVersion = 1;

std::filesystem::path LabelSidecarPath(const std::filesystem::path& path);

// Reads a raw matrix from the binary format, ignoring any sidecar.
RowMatrix ReadMatrixFile(const std::filesystem::path& path);
void WriteMatrixFile(const RowMatrix& matrix,
                     const std::filesystem::path& path);

// Loads an embedding file and its optional label sidecar. The sidecar, when
// present, must agree with `role`.
EmbeddingSet LoadEmbeddings(const std::filesystem::path& path, Role role);

// Values are narrowed to f32 on disk; sets whose values are already
// f32-representable round-trip bit-exactly. Writes the sidecar iff the set
// has labels, and removes a stale sidecar otherwise.
void SaveEmbeddings(const EmbeddingSet& set, const std::filesystem::path& path);

}  // namespace tsl

#endif  // TSL_EMBEDDING_H_
