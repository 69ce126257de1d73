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

#ifndef PLANTWI_MODEL_CLASSIFIER_H_
#define PLANTWI_MODEL_CLASSIFIER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "plantwi/image.h"

namespace plantwi {

inline constexpr double kDefaultMargin = 0.1;
inline constexpr double kDefaultScale = 16.0;
inline constexpr int32_t kNoParent = -1;

// Final 1x1 classification layer with unit-norm rows. Scores are plain
// cosine similarities; margin and scale only enter the training loss.
struct CosineClassifier {
  int dim = 0;
  std::vector<float> weights;  // class_count() x dim, row-major
  std::vector<std::string> class_names;
  // For imprinted classes, the base class they fold into at evaluation time;
  // kNoParent for pre-trained classes.
  std::vector<int32_t> parent_class;
  double margin = kDefaultMargin;
  double scale = kDefaultScale;

  static CosineClassifier Random(int dim, std::vector<std::string> names,
                                 uint64_t seed);

  int class_count() const { return static_cast<int>(class_names.size()); }
  std::span<const float> row(int j) const {
    return {weights.data() + static_cast<size_t>(j) * dim,
            static_cast<size_t>(dim)};
  }
  std::span<float> row(int j) {
    return {weights.data() + static_cast<size_t>(j) * dim,
            static_cast<size_t>(dim)};
  }

  // Checks shapes, C >= 2, margin in [0, 0.5], scale > 0 and unit-norm rows.
  // Throws InvalidInput.
  void Validate() const;

  // Maps every class to its base class (identity for pre-trained classes).
  std::vector<int32_t> FoldingMap() const;

  friend bool operator==(const CosineClassifier&,
                         const CosineClassifier&) = default;
};

// Rescales every row to unit L2 norm and rounds to single precision.
void NormalizeRows(CosineClassifier& head);

// score(h, w, j) = <feature(h, w), W_j>. Throws InvalidInput when the
// feature dimension does not match the head.
ScoreMap CosineLogits(const FeatureMap& features, const CosineClassifier& head);

// Per-pixel argmax; ties go to the lowest class index.
LabelMap Predict(const ScoreMap& scores);

}  // namespace plantwi

#endif  // PLANTWI_MODEL_CLASSIFIER_H_
