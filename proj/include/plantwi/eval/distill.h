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

// Fine-tuning baseline with output-level distillation.
//
// A frozen copy of the input model acts as teacher. Every pixel of the
// support images gets a pseudo-label: the teacher's prediction, overridden
// with the plant class under the interaction mask. The student minimizes
//
//   CE(softmax(s cos), pseudo) + w * KL(softmax(s cos_t / T) || softmax(s cos / T))
//
// averaged over pixels, with Adam at a constant learning rate. After every
// epoch the student is scored on a validation set and the best epoch wins.

#ifndef PLANTWI_EVAL_DISTILL_H_
#define PLANTWI_EVAL_DISTILL_H_

#include <cstdint>
#include <span>
#include <vector>

#include "plantwi/imprinting/pooling.h"
#include "plantwi/model/trainer.h"

namespace plantwi {

struct DistillConfig {
  double distill_weight = 0.5;
  double temperature = 1.0;
  double lr = 1e-4;
  int batch = 5;
  int epochs = 15;
  uint64_t seed = 0;
  int32_t plant_class = 0;

  // Throws InvalidInput unless weight >= 0 and the other values are positive.
  void Validate() const;
};

// Pixels of a distillation batch with their pseudo-labels and the teacher's
// tempered class distribution (rows x C).
struct DistillBatch {
  PixelBatch pixels;
  std::vector<double> teacher_probs;
};

DistillBatch BuildDistillBatch(const Model& teacher,
                               std::span<const SupportPair> support,
                               const DistillConfig& config);

// Mean combined loss of the student on the batch and its gradient. Counts as
// one backward pass. Throws NumericalFailure on a non-finite loss.
ModelGradient DistillGradient(const Model& student, const DistillBatch& batch,
                              const DistillConfig& config);

// Loss only, without a backward pass.
double DistillLoss(const Model& student, const DistillBatch& batch,
                   const DistillConfig& config);

struct DistillResult {
  Model model;                    // student at the best epoch
  int best_epoch = 0;             // 1-based
  std::vector<double> val_miou;   // one entry per epoch
  std::vector<double> loss_curve; // mean training loss per epoch
};

// Support masks are the full interaction masks. Validation images carry
// ground-truth labels over the model's classes. Throws InvalidInput on an
// empty support set or validation set.
DistillResult DistillFinetune(const Model& model, const SupportSet& support,
                              std::span<const LabeledImage> validation,
                              const DistillConfig& config);

// Mean IoU of the model's predictions over the labeled images, with the
// head's folding map applied.
double MeanIoU(const Model& model, std::span<const LabeledImage> images,
               int eval_classes);

}  // namespace plantwi

#endif  // PLANTWI_EVAL_DISTILL_H_
