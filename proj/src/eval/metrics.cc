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

#include "plantwi/eval/metrics.h"

#include <cmath>
#include <limits>
#include <numeric>

#include "plantwi/error.h"

namespace plantwi {

uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), uint64_t{0});
}

void ConfusionMatrix::Merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) {
    Fail(ErrorCode::kInvalidInput, "confusion matrices differ in size");
  }
  for (size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::vector<int32_t> IdentityMapping(int classes) {
  std::vector<int32_t> map(classes);
  std::iota(map.begin(), map.end(), 0);
  return map;
}

ConfusionMatrix Confusion(const LabelMap& pred, const LabelMap& gt,
                          std::span<const int32_t> mapping, int eval_classes) {
  if (!pred.same_shape(gt)) {
    Fail(ErrorCode::kInvalidInput, "prediction and ground truth differ in size");
  }
  ConfusionMatrix confusion(eval_classes);
  for (size_t i = 0; i < pred.size(); ++i) {
    const int32_t g = gt[i];
    const int32_t p = pred[i];
    if (g < 0 || g >= eval_classes) {
      Fail(ErrorCode::kInvalidInput,
           "ground-truth label " + std::to_string(g) + " out of range");
    }
    if (p < 0 || static_cast<size_t>(p) >= mapping.size() || mapping[p] < 0 ||
        mapping[p] >= eval_classes) {
      Fail(ErrorCode::kInvalidInput,
           "prediction class " + std::to_string(p) + " has no mapping");
    }
    ++confusion.at(g, mapping[p]);
  }
  return confusion;
}

MetricsReport ComputeMetrics(const ConfusionMatrix& confusion,
                             std::vector<std::string> class_names) {
  const int k = confusion.classes();
  MetricsReport report;
  if (class_names.empty()) {
    for (int c = 0; c < k; ++c) class_names.push_back(std::to_string(c));
  }
  report.class_names = std::move(class_names);
  double iou_sum = 0.0;
  int defined = 0;
  for (int c = 0; c < k; ++c) {
    uint64_t tp = confusion.at(c, c);
    uint64_t fp = 0, fn = 0;
    for (int o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += confusion.at(o, c);
      fn += confusion.at(c, o);
    }
    ClassMetrics m;
    if (tp + fp + fn > 0) {
      m.iou = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
      iou_sum += *m.iou;
      ++defined;
    }
    if (tp + fp > 0) m.precision = static_cast<double>(tp) / (tp + fp);
    if (tp + fn > 0) m.recall = static_cast<double>(tp) / (tp + fn);
    report.per_class.push_back(m);
  }
  report.mean_iou = defined > 0 ? iou_sum / defined
                                : std::numeric_limits<double>::quiet_NaN();
  return report;
}

}  // namespace plantwi
