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

#include "tsl/synthetic.h"

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace tsl {
namespace {

double RoundToF32(double v) {
  return static_cast<double>(static_cast<float>(v));
}

class Sampler {
 public:
  Sampler(std::uint64_t seed, int dim) : engine_(seed), dim_(dim) {}

  Eigen::RowVectorXd Gaussian(double stddev) {
    Eigen::RowVectorXd v(dim_);
    for (int j = 0; j < dim_; ++j) v[j] = stddev * normal_(engine_);
    return v;
  }

  Eigen::RowVectorXd Direction() {
    Eigen::RowVectorXd v;
    do {
      v = Gaussian(1.0);
    } while (v.norm() == 0.0);
    return v / v.norm();
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  int dim_;
};

void DrawRows(Sampler& sampler, const Eigen::RowVectorXd& mean, double stddev,
              RowMatrix& out, Eigen::Index row) {
  out.row(row) = (mean + sampler.Gaussian(stddev)).unaryExpr(&RoundToF32);
}

}  // namespace

void SyntheticSpec::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok)
      throw std::invalid_argument(std::string("synthetic spec: ") + what);
  };
  require(num_classes >= 1, "num_classes must be positive");
  require(dim >= 1, "dim must be positive");
  require(id_center_scale > 0, "id_center_scale must be > 0");
  require(class_std > 0, "class_std must be > 0");
  require(ood_modes >= 1, "ood_modes must be positive");
  require(ood_offset > 0, "ood_offset must be > 0");
  require(labeled_per_class >= 2, "labeled_per_class must be >= 2");
  require(unlabeled_id_per_class >= 0, "unlabeled_id_per_class must be >= 0");
  require(unlabeled_ood >= 0, "unlabeled_ood must be >= 0");
  require(test_id >= 0, "test_id must be >= 0");
  require(test_ood >= 0, "test_ood must be >= 0");
}

std::string SyntheticSpec::ToText() const {
  std::ostringstream out;
  out.precision(17);
  out << "num_classes=" << num_classes << '\n'
      << "dim=" << dim << '\n'
      << "id_center_scale=" << id_center_scale << '\n'
      << "class_std=" << class_std << '\n'
      << "ood_modes=" << ood_modes << '\n'
      << "ood_offset=" << ood_offset << '\n'
      << "labeled_per_class=" << labeled_per_class << '\n'
      << "unlabeled_id_per_class=" << unlabeled_id_per_class << '\n'
      << "unlabeled_ood=" << unlabeled_ood << '\n'
      << "test_id=" << test_id << '\n'
      << "test_ood=" << test_ood << '\n'
      << "share_ood=" << (share_ood ? "true" : "false") << '\n'
      << "seed=" << seed << '\n';
  return out.str();
}

SyntheticData GenerateSynthetic(const SyntheticSpec& spec) {
  spec.Validate();
  Sampler sampler(spec.seed, spec.dim);
  const Eigen::Index dim = spec.dim;
  const int k = spec.num_classes;

  std::vector<Eigen::RowVectorXd> centers;
  Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(dim);
  for (int c = 0; c < k; ++c) {
    centers.push_back(sampler.Gaussian(spec.id_center_scale));
    centroid += centers.back();
  }
  centroid /= k;

  std::vector<Eigen::RowVectorXd> modes;
  for (int m = 0; m < spec.ood_modes; ++m) {
    modes.push_back(centroid + spec.ood_offset * sampler.Direction());
  }

  RowMatrix labeled(static_cast<Eigen::Index>(k) * spec.labeled_per_class, dim);
  std::vector<int> labels;
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < spec.labeled_per_class; ++i) {
      DrawRows(sampler, centers[c], spec.class_std, labeled,
               static_cast<Eigen::Index>(labels.size()));
      labels.push_back(c);
    }
  }

  const Eigen::Index n_uid =
      static_cast<Eigen::Index>(k) * spec.unlabeled_id_per_class;
  const Eigen::Index n_uood = spec.unlabeled_ood;
  RowMatrix unlabeled(n_uid + n_uood, dim);
  Eigen::Index row = 0;
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < spec.unlabeled_id_per_class; ++i) {
      DrawRows(sampler, centers[c], spec.class_std, unlabeled, row++);
    }
  }
  for (Eigen::Index i = 0; i < n_uood; ++i) {
    DrawRows(sampler, modes[i % modes.size()], spec.class_std, unlabeled,
             row++);
  }
  const RowMatrix unlabeled_ood = unlabeled.bottomRows(n_uood);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_uid + n_uood));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), sampler.engine());
  RowMatrix shuffled(unlabeled.rows(), dim);
  std::vector<bool> is_ood(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    shuffled.row(static_cast<Eigen::Index>(i)) = unlabeled.row(order[i]);
    is_ood[i] = order[i] >= n_uid;
  }

  RowMatrix test_id(spec.test_id, dim);
  for (Eigen::Index i = 0; i < spec.test_id; ++i) {
    DrawRows(sampler, centers[i % k], spec.class_std, test_id, i);
  }

  RowMatrix test_ood;
  if (spec.share_ood) {
    test_ood = unlabeled_ood;
  } else {
    test_ood.resize(spec.test_ood, dim);
    for (Eigen::Index i = 0; i < spec.test_ood; ++i) {
      DrawRows(sampler, modes[i % modes.size()], spec.class_std, test_ood, i);
    }
  }

  auto optional_set = [](RowMatrix rows, Role role) {
    std::optional<EmbeddingSet> set;
    if (rows.rows() > 0)
      set.emplace(EmbeddingSet::Unlabeled(std::move(rows), role));
    return set;
  };

  SyntheticData data{
      EmbeddingSet::Labeled(std::move(labeled), std::move(labels)),
      optional_set(std::move(shuffled), Role::kUnlabeledMix),
      optional_set(std::move(test_id), Role::kTestId),
      optional_set(std::move(test_ood), Role::kTestOod),
      std::move(is_ood),
  };
  return data;
}

}  // namespace tsl
