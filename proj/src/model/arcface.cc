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

#include "plantwi/model/arcface.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "plantwi/error.h"

namespace plantwi {

double MarginCosine(double cos_theta, double margin) {
  if (margin == 0.0) return cos_theta;
  const double theta = std::acos(std::clamp(cos_theta, -1.0, 1.0));
  if (theta + margin > std::numbers::pi) return -1.0;
  return std::cos(theta + margin);
}

double MarginCosineDerivative(double cos_theta, double margin) {
  if (margin == 0.0) return 1.0;
  const double c = std::clamp(cos_theta, -1.0, 1.0);
  const double theta = std::acos(c);
  if (theta + margin > std::numbers::pi) return 0.0;
  // cos(theta + m) = c cos m - sin(theta) sin m, sin(theta) = sqrt(1 - c^2)
  const double sin_theta = std::max(std::sqrt(1.0 - c * c), 1e-12);
  return std::cos(margin) + c * std::sin(margin) / sin_theta;
}

double ArcFaceLossRows(std::span<const double> scores,
                       std::span<const int32_t> labels, int classes,
                       double margin, double scale,
                       std::span<double> score_grads) {
  const size_t rows = labels.size();
  if (classes < 1 || scores.size() != rows * classes) {
    Fail(ErrorCode::kInvalidInput, "score/label shape mismatch");
  }
  const bool want_grad = !score_grads.empty();
  if (want_grad && score_grads.size() != scores.size()) {
    Fail(ErrorCode::kInvalidInput, "gradient buffer shape mismatch");
  }
  if (rows == 0) return 0.0;

  std::vector<double> logits(classes);
  double total = 0.0;
  const double inv_rows = 1.0 / static_cast<double>(rows);
  for (size_t r = 0; r < rows; ++r) {
    const int32_t y = labels[r];
    if (y < 0 || y >= classes) {
      Fail(ErrorCode::kInvalidInput,
           "label " + std::to_string(y) + " outside [0, " +
               std::to_string(classes) + ")");
    }
    const double* c = scores.data() + r * classes;
    for (int j = 0; j < classes; ++j) logits[j] = scale * c[j];
    logits[y] = scale * MarginCosine(c[y], margin);
    const double peak = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (int j = 0; j < classes; ++j) sum += std::exp(logits[j] - peak);
    const double lse = peak + std::log(sum);
    total += lse - logits[y];
    if (want_grad) {
      double* g = score_grads.data() + r * classes;
      for (int j = 0; j < classes; ++j) {
        const double p = std::exp(logits[j] - lse);
        g[j] = (p - (j == y ? 1.0 : 0.0)) * scale * inv_rows;
      }
      g[y] *= MarginCosineDerivative(c[y], margin);
    }
  }
  const double loss = total * inv_rows;
  if (!std::isfinite(loss)) {
    Fail(ErrorCode::kNumericalFailure, "ArcFace loss is not finite");
  }
  return loss;
}

LossReport ArcFaceLoss(const ScoreMap& scores, const LabelMap& labels,
                       const CosineClassifier& head) {
  if (scores.height() != labels.height() || scores.width() != labels.width() ||
      scores.channels() != head.class_count()) {
    Fail(ErrorCode::kInvalidInput, "scores, labels and head disagree in shape");
  }
  LossReport report;
  report.pixel_count = labels.size();
  report.loss = ArcFaceLossRows(scores.data(), labels.data(),
                                head.class_count(), head.margin, head.scale);
  return report;
}

}  // namespace plantwi
