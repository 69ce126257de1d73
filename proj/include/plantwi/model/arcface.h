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

// Additive angular margin (ArcFace) loss on cosine scores.
//
// For a pixel with label y and cosines c_j the loss is
//
//   -log( e^{s cos(theta_y + m)} / (e^{s cos(theta_y + m)} + sum_{j != y} e^{s c_j}) )
//
// with theta_y = arccos(clamp(c_y, -1, 1)). When theta_y + m exceeds pi the
// margin term is pinned to cos(pi) = -1. The reported loss is the mean over
// pixels.

#ifndef PLANTWI_MODEL_ARCFACE_H_
#define PLANTWI_MODEL_ARCFACE_H_

#include <cstddef>
#include <cstdint>
#include <span>

#include "plantwi/image.h"
#include "plantwi/model/classifier.h"

namespace plantwi {

struct LossReport {
  double loss = 0.0;
  size_t pixel_count = 0;
  double extractor_grad_norm = 0.0;
  double classifier_grad_norm = 0.0;
};

// cos(arccos(c) + margin) with the clamping rules above.
double MarginCosine(double cos_theta, double margin);
// d MarginCosine / d cos_theta.
double MarginCosineDerivative(double cos_theta, double margin);

// Mean loss over n rows of `classes` scores. When score_grads is non-empty it
// receives dLoss/dscore with the same layout. Throws InvalidInput on a label
// outside [0, classes).
double ArcFaceLossRows(std::span<const double> scores,
                       std::span<const int32_t> labels, int classes,
                       double margin, double scale,
                       std::span<double> score_grads = {});

LossReport ArcFaceLoss(const ScoreMap& scores, const LabelMap& labels,
                       const CosineClassifier& head);

}  // namespace plantwi

#endif  // PLANTWI_MODEL_ARCFACE_H_
