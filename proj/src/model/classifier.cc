// Copyright 2026 The plantwi Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "plantwi/model/classifier.h"

#include <cmath>
#include <random>

#include "plantwi/error.h"

namespace plantwi {

CosineClassifier CosineClassifier::Random(int dim,
                                          std::vector<std::string> names,
                                          uint64_t seed) {
  if (dim <= 0) Fail(ErrorCode::kInvalidInput, "classifier dim must be > 0");
  CosineClassifier head;
  head.dim = dim;
  head.class_names = std::move(names);
  head.parent_class.assign(head.class_names.size(), kNoParent);
  head.weights.resize(head.class_names.size() * static_cast<size_t>(dim));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (float& w : head.weights) w = static_cast<float>(dist(rng));
  NormalizeRows(head);
  return head;
}

void CosineClassifier::Validate() const {
  const int classes = class_count();
  if (classes < 2) Fail(ErrorCode::kInvalidInput, "classifier needs C >= 2");
  if (dim <= 0 || weights.size() != static_cast<size_t>(classes) * dim) {
    Fail(ErrorCode::kInvalidInput, "classifier weight shape mismatch");
  }
  if (parent_class.size() != static_cast<size_t>(classes)) {
    Fail(ErrorCode::kInvalidInput, "parent table size mismatch");
  }
  if (!(margin >= 0.0 && margin <= 0.5)) {
    Fail(ErrorCode::kInvalidInput, "margin must lie in [0, 0.5]");
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    Fail(ErrorCode::kInvalidInput, "scale must be positive");
  }
  for (int j = 0; j < classes; ++j) {
    double sq = 0.0;
    for (float w : row(j)) sq += static_cast<double>(w) * w;
    if (std::abs(std::sqrt(sq) - 1.0) > 1e-6) {
      Fail(ErrorCode::kInvalidInput,
           "classifier row " + std::to_string(j) + " is not unit norm");
    }
    const int32_t parent = parent_class[j];
    if (parent != kNoParent && (parent < 0 || parent >= classes)) {
      Fail(ErrorCode::kInvalidInput, "parent class out of range");
    }
  }
}

std::vector<int32_t> CosineClassifier::FoldingMap() const {
  std::vector<int32_t> map(class_count());
  for (int j = 0; j < class_count(); ++j) {
    int32_t c = j;
    // Parents may themselves be imprinted classes; follow the chain.
    for (int guard = 0; parent_class[c] != kNoParent && guard < class_count();
         ++guard) {
      c = parent_class[c];
    }
    map[j] = c;
  }
  return map;
}

void NormalizeRows(CosineClassifier& head) {
  for (int j = 0; j < head.class_count(); ++j) {
    auto r = head.row(j);
    double sq = 0.0;
    for (float w : r) sq += static_cast<double>(w) * w;
    const double norm = std::sqrt(sq);
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      Fail(ErrorCode::kNumericalFailure, "cannot normalize classifier row");
    }
    // Rows already on the sphere at float precision are left untouched.
    if (std::abs(norm - 1.0) <= 1e-7) continue;
    for (float& w : r) w = static_cast<float>(w / norm);
  }
}

ScoreMap CosineLogits(const FeatureMap& features,
                      const CosineClassifier& head) {
  if (features.channels() != head.dim) {
    Fail(ErrorCode::kInvalidInput,
         "feature dim " + std::to_string(features.channels()) +
             " does not match classifier dim " + std::to_string(head.dim));
  }
  const int classes = head.class_count();
  const int dim = head.dim;
  ScoreMap scores(features.height(), features.width(), classes);
  for (size_t p = 0; p < features.pixel_count(); ++p) {
    auto f = features.pixel(p);
    auto s = scores.pixel(p);
    for (int j = 0; j < classes; ++j) {
      const float* w = head.weights.data() + static_cast<size_t>(j) * dim;
      double acc = 0.0;
      for (int d = 0; d < dim; ++d) acc += f[d] * w[d];
      s[j] = acc;
    }
  }
  return scores;
}

LabelMap Predict(const ScoreMap& scores) {
  LabelMap labels(scores.height(), scores.width());
  for (size_t p = 0; p < scores.pixel_count(); ++p) {
    auto s = scores.pixel(p);
    int32_t best = 0;
    for (int j = 1; j < static_cast<int>(s.size()); ++j) {
      if (s[j] > s[best]) best = j;
    }
    labels[p] = best;
  }
  return labels;
}

}  // namespace plantwi
