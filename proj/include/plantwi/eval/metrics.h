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

#ifndef PLANTWI_EVAL_METRICS_H_
#define PLANTWI_EVAL_METRICS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plantwi/image.h"

namespace plantwi {

// K x K counts, rows = ground truth, columns = (mapped) prediction.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int classes = 0)
      : classes_(classes), counts_(static_cast<size_t>(classes) * classes) {}

  int classes() const { return classes_; }
  uint64_t at(int gt, int pred) const {
    return counts_[static_cast<size_t>(gt) * classes_ + pred];
  }
  uint64_t& at(int gt, int pred) {
    return counts_[static_cast<size_t>(gt) * classes_ + pred];
  }
  uint64_t total() const;
  // Throws InvalidInput on a class-count mismatch.
  void Merge(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&,
                         const ConfusionMatrix&) = default;

 private:
  int classes_;
  std::vector<uint64_t> counts_;
};

// Identity mapping over `classes` prediction classes.
std::vector<int32_t> IdentityMapping(int classes);

// Accumulates (gt, mapping[pred]) pairs. mapping[c] is the evaluation class
// of prediction class c. Throws InvalidInput on a size mismatch, a gt label
// outside [0, eval_classes) or a prediction without a valid mapping.
ConfusionMatrix Confusion(const LabelMap& pred, const LabelMap& gt,
                          std::span<const int32_t> mapping, int eval_classes);

struct ClassMetrics {
  // Undefined (0/0) entries stay empty.
  std::optional<double> iou;
  std::optional<double> precision;
  std::optional<double> recall;
  friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

struct MetricsReport {
  std::vector<std::string> class_names;
  std::vector<ClassMetrics> per_class;
  // Mean over classes with a defined IoU; NaN when none is defined.
  double mean_iou = 0.0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// IoU = TP / (TP + FP + FN), precision = TP / (TP + FP),
// recall = TP / (TP + FN).
MetricsReport ComputeMetrics(const ConfusionMatrix& confusion,
                             std::vector<std::string> class_names = {});

}  // namespace plantwi

#endif  // PLANTWI_EVAL_METRICS_H_
