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

#include "tsl/embedding.h"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <system_error>

namespace tsl {
namespace {

constexpr std::array<char, 4> kMagic = {'T', 'S', 'L', 'E'};
constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 8;

using Kind = EmbeddingFileError::Kind;

[[noreturn]] void Fail(Kind kind, const std::filesystem::path& path,
                       const std::string& what) {
  throw EmbeddingFileError(kind, path.string() + ": " + what);
}

template <typename T>
void PutLittleEndian(std::string& out, T value) {
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    out.push_back(static_cast<char>((value >> (8 * b)) & 0xFF));
  }
}

template <typename T>
T GetLittleEndian(const char* data) {
  T value = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    value |= static_cast<T>(static_cast<unsigned char>(data[b])) << (8 * b);
  }
  return value;
}

bool IsLabeledRole(Role role) { return role == Role::kLabeledId; }

}  // namespace

std::string_view RoleName(Role role) {
  switch (role) {
    case Role::kLabeledId:
      return "labeled_id";
    case Role::kUnlabeledMix:
      return "unlabeled_mix";
    case Role::kTestId:
      return "test_id";
    case Role::kTestOod:
      return "test_ood";
  }
  return "unknown";
}

EmbeddingSet::EmbeddingSet(RowMatrix rows, std::vector<int> labels, Role role)
    : rows_(std::move(rows)), labels_(std::move(labels)), role_(role) {
  if (rows_.cols() < 1) {
    throw std::invalid_argument("embedding set needs dim >= 1");
  }
  if (rows_.rows() < 1) {
    throw std::invalid_argument("embedding set needs at least one row");
  }
  if (!rows_.allFinite()) {
    throw std::invalid_argument("embedding set contains non-finite values");
  }
  if (!labels_.empty() &&
      labels_.size() != static_cast<std::size_t>(rows_.rows())) {
    throw std::invalid_argument("label count does not match row count");
  }
  if (IsLabeledRole(role_)) {
    if (labels_.empty()) {
      throw std::invalid_argument("labeled_id set requires labels");
    }
    if (std::any_of(labels_.begin(), labels_.end(),
                    [](int y) { return y < 0; })) {
      throw std::invalid_argument("labeled_id set has an unlabeled row");
    }
  } else if (std::any_of(labels_.begin(), labels_.end(),
                         [](int y) { return y != kUnlabeled; })) {
    throw std::invalid_argument(std::string(RoleName(role_)) +
                                " set must not carry class labels");
  }
}

int EmbeddingSet::num_classes() const {
  if (labels_.empty()) return 0;
  return *std::max_element(labels_.begin(), labels_.end()) + 1;
}

bool operator==(const EmbeddingSet& a, const EmbeddingSet& b) {
  return a.role_ == b.role_ && a.labels_ == b.labels_ &&
         a.rows_.rows() == b.rows_.rows() && a.rows_.cols() == b.rows_.cols() &&
         std::memcmp(a.rows_.data(), b.rows_.data(),
                     sizeof(double) * a.rows_.size()) == 0;
}

EmbeddingSet MakePool(const EmbeddingSet& labeled,
                      const EmbeddingSet* unlabeled) {
  const Eigen::Index n_l = static_cast<Eigen::Index>(labeled.size());
  const Eigen::Index n_u =
      unlabeled ? static_cast<Eigen::Index>(unlabeled->size()) : 0;
  if (unlabeled && unlabeled->dim() != labeled.dim()) {
    throw std::invalid_argument("labeled and unlabeled dims differ");
  }
  RowMatrix rows(n_l + n_u, static_cast<Eigen::Index>(labeled.dim()));
  rows.topRows(n_l) = labeled.rows();
  if (n_u > 0) rows.bottomRows(n_u) = unlabeled->rows();
  return EmbeddingSet::Unlabeled(std::move(rows), Role::kUnlabeledMix);
}

std::filesystem::path LabelSidecarPath(const std::filesystem::path& path) {
  std::filesystem::path sidecar = path;
  sidecar += ".labels";
  return sidecar;
}

RowMatrix ReadMatrixFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(Kind::kIo, path, "cannot open for reading");
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());

  if (bytes.size() < kHeaderBytes) {
    Fail(Kind::kBadHeader, path, "file shorter than the 18-byte header");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    Fail(Kind::kBadHeader, path, "bad magic, expected \"TSLE\"");
  }
  const auto version = GetLittleEndian<std::uint16_t>(bytes.data() + 4);
  if (version != kEmbeddingFormatVersion) {
    Fail(Kind::kBadHeader, path,
         "unsupported format version " + std::to_string(version));
  }
  const auto dim = GetLittleEndian<std::uint32_t>(bytes.data() + 6);
  const auto rows = GetLittleEndian<std::uint64_t>(bytes.data() + 10);
  if (dim == 0) Fail(Kind::kBadHeader, path, "header declares dim = 0");
  if (rows == 0) Fail(Kind::kBadHeader, path, "header declares 0 rows");
  if (rows > std::numeric_limits<std::uint64_t>::max() / 4 / dim) {
    Fail(Kind::kBadHeader, path, "header row count overflows");
  }

  const std::uint64_t values = rows * dim;
  const std::uint64_t payload = bytes.size() - kHeaderBytes;
  if (payload < values * 4) {
    Fail(Kind::kTruncated, path,
         "payload holds " + std::to_string(payload / 4) +
             " values, header "
             "declares " +
             std::to_string(values));
  }
  if (payload > values * 4) {
    Fail(
        Kind::kBadHeader, path,
        std::to_string(payload - values * 4) + " trailing bytes after payload");
  }

  RowMatrix matrix(static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(dim));
  const char* cursor = bytes.data() + kHeaderBytes;
  double* out = matrix.data();
  for (std::uint64_t v = 0; v < values; ++v, cursor += 4) {
    const float f =
        std::bit_cast<float>(GetLittleEndian<std::uint32_t>(cursor));
    if (!std::isfinite(f)) {
      Fail(Kind::kNonFinite, path,
           "non-finite value at row " + std::to_string(v / dim) + ", column " +
               std::to_string(v % dim));
    }
    out[v] = static_cast<double>(f);
  }
  return matrix;
}

void WriteMatrixFile(const RowMatrix& matrix,
                     const std::filesystem::path& path) {
  std::string bytes;
  bytes.reserve(kHeaderBytes + 4 * static_cast<std::size_t>(matrix.size()));
  bytes.append(kMagic.data(), kMagic.size());
  PutLittleEndian<std::uint16_t>(bytes, kEmbeddingFormatVersion);
  PutLittleEndian<std::uint32_t>(bytes,
                                 static_cast<std::uint32_t>(matrix.cols()));
  PutLittleEndian<std::uint64_t>(bytes,
                                 static_cast<std::uint64_t>(matrix.rows()));
  const double* values = matrix.data();
  for (Eigen::Index v = 0; v < matrix.size(); ++v) {
    const float f = static_cast<float>(values[v]);
    if (!std::isfinite(f)) {
      Fail(Kind::kNonFinite, path, "value does not fit in f32");
    }
    PutLittleEndian<std::uint32_t>(bytes, std::bit_cast<std::uint32_t>(f));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(Kind::kIo, path, "cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(Kind::kIo, path, "write failed");
}

EmbeddingSet LoadEmbeddings(const std::filesystem::path& path, Role role) {
  RowMatrix rows = ReadMatrixFile(path);

  std::vector<int> labels;
  const auto sidecar = LabelSidecarPath(path);
  if (std::filesystem::exists(sidecar)) {
    std::ifstream in(sidecar);
    if (!in) Fail(Kind::kIo, sidecar, "cannot open label sidecar");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      const auto last = line.find_last_not_of(" \t\r");
      if (first == std::string::npos) {
        Fail(Kind::kBadHeader, sidecar,
             "empty label on line " + std::to_string(line_no));
      }
      int value = 0;
      const char* begin = line.data() + first;
      const char* end = line.data() + last + 1;
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (ec == std::errc::result_out_of_range) {
        Fail(Kind::kLabelOutOfRange, sidecar,
             "label out of range on line " + std::to_string(line_no));
      }
      if (ec != std::errc() || ptr != end) {
        Fail(Kind::kBadHeader, sidecar,
             "malformed label on line " + std::to_string(line_no));
      }
      if (value < kUnlabeled) {
        Fail(Kind::kLabelOutOfRange, sidecar,
             "label " + std::to_string(value) + " out of range on line " +
                 std::to_string(line_no));
      }
      labels.push_back(value);
    }
    if (labels.size() != static_cast<std::size_t>(rows.rows())) {
      Fail(Kind::kLabelCount, sidecar,
           std::to_string(labels.size()) + " labels for " +
               std::to_string(rows.rows()) + " rows");
    }
  }

  try {
    return EmbeddingSet(std::move(rows), std::move(labels), role);
  } catch (const std::invalid_argument& e) {
    Fail(Kind::kRoleMismatch, path, e.what());
  }
}

void SaveEmbeddings(const EmbeddingSet& set,
                    const std::filesystem::path& path) {
  WriteMatrixFile(set.rows(), path);
  const auto sidecar = LabelSidecarPath(path);
  if (!set.has_labels()) {
    std::error_code ec;
    std::filesystem::remove(sidecar, ec);
    return;
  }
  std::ostringstream text;
  for (int y : set.labels()) text << y << '\n';
  std::ofstream out(sidecar, std::ios::trunc);
  if (!out) Fail(Kind::kIo, sidecar, "cannot open for writing");
  out << text.str();
  if (!out) Fail(Kind::kIo, sidecar, "write failed");
}

}  // namespace tsl
