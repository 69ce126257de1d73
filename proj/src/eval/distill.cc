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

#include "plantwi/eval/distill.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "plantwi/error.h"
#include "plantwi/eval/metrics.h"

namespace plantwi {
namespace {

// Numerically stable softmax of scale * scores / temperature, in place.
void Softmax(std::span<const double> scores, double factor,
             std::span<double> out) {
  double top = -INFINITY;
  for (double c : scores) top = std::max(top, factor * c);
  double sum = 0.0;
  for (size_t j = 0; j < scores.size(); ++j) {
    out[j] = std::exp(factor * scores[j] - top);
    sum += out[j];
  }
  for (double& p : out) p /= sum;
}

// Loss and dLoss/dscore for every row; score_grads may be empty.
double Combined(std::span<const double> scores, const DistillBatch& batch,
                int classes, double scale, const DistillConfig& config,
                std::span<double> score_grads) {
  const size_t rows = batch.pixels.size();
  const double t = config.temperature;
  const double w = config.distill_weight;
  std::vector<double> p(classes), q(classes);
  double total = 0.0;
  for (size_t r = 0; r < rows; ++r) {
    auto c = scores.subspan(r * classes, classes);
    auto teacher = std::span<const double>(batch.teacher_probs)
                       .subspan(r * classes, classes);
    const int32_t y = batch.pixels.labels[r];
    Softmax(c, scale, p);
    Softmax(c, scale / t, q);
    double loss = -std::log(std::max(p[y], 1e-300));
    double kl = 0.0;
    for (int j = 0; j < classes; ++j) {
      if (teacher[j] > 0.0) {
        kl += teacher[j] * (std::log(teacher[j]) - std::log(std::max(q[j], 1e-300)));
      }
    }
    loss += w * kl;
    total += loss;
    if (!score_grads.empty()) {
      // d/dc_j: CE gives s (p_j - [j = y]); KL gives (s / T) (q_j - t_j).
      for (int j = 0; j < classes; ++j) {
        const double ce = scale * (p[j] - (j == y ? 1.0 : 0.0));
        const double dk = scale / t * (q[j] - teacher[j]);
        score_grads[r * classes + j] = (ce + w * dk) / static_cast<double>(rows);
      }
    }
  }
  const double mean = total / static_cast<double>(rows);
  if (!std::isfinite(mean)) {
    Fail(ErrorCode::kNumericalFailure, "non-finite distillation loss");
  }
  return mean;
}

}  // namespace

void DistillConfig::Validate() const {
  if (!(distill_weight >= 0.0) || !(temperature > 0.0) || !(lr > 0.0) ||
      batch <= 0 || epochs <= 0) {
    Fail(ErrorCode::kInvalidInput, "invalid distillation configuration");
  }
}

DistillBatch BuildDistillBatch(const Model& teacher,
                               std::span<const SupportPair> support,
                               const DistillConfig& config) {
  DistillBatch batch;
  const int classes = teacher.head.class_count();
  const double factor = teacher.head.scale / config.temperature;
  for (const SupportPair& pair : support) {
    if (pair.image.height() != pair.mask.height() ||
        pair.image.width() != pair.mask.width()) {
      Fail(ErrorCode::kInvalidInput, "support image and mask differ in size");
    }
    const ScoreMap scores = teacher.Scores(pair.image);
    LabelMap pseudo = Predict(scores);
    for (size_t i = 0; i < pseudo.size(); ++i) {
      if (pair.mask[i]) pseudo[i] = config.plant_class;
    }
    batch.pixels.Append(
        PrepareInputs(pair.image, teacher.extractor.context_radius), pseudo);
    const size_t offset = batch.teacher_probs.size();
    batch.teacher_probs.resize(offset + scores.data().size());
    for (size_t p = 0; p < scores.pixel_count(); ++p) {
      Softmax(scores.pixel(p), factor,
              std::span<double>(batch.teacher_probs)
                  .subspan(offset + p * classes, classes));
    }
  }
  return batch;
}

ModelGradient DistillGradient(const Model& student, const DistillBatch& batch,
                              const DistillConfig& config) {
  if (batch.pixels.size() == 0) Fail(ErrorCode::kInvalidInput, "empty batch");
  ExtractorTape tape(student.extractor, batch.pixels.inputs);
  const std::vector<double> scores = TapeScores(tape, student.head);
  std::vector<double> score_grads(scores.size());
  const double loss = Combined(scores, batch, student.head.class_count(),
                               student.head.scale, config, score_grads);
  ModelGradient grad = BackpropagateScores(student, tape, score_grads);
  grad.loss = loss;
  return grad;
}

double DistillLoss(const Model& student, const DistillBatch& batch,
                   const DistillConfig& config) {
  if (batch.pixels.size() == 0) Fail(ErrorCode::kInvalidInput, "empty batch");
  ExtractorTape tape(student.extractor, batch.pixels.inputs);
  const std::vector<double> scores = TapeScores(tape, student.head);
  return Combined(scores, batch, student.head.class_count(),
                  student.head.scale, config, {});
}

double MeanIoU(const Model& model, std::span<const LabeledImage> images,
               int eval_classes) {
  ConfusionMatrix confusion(eval_classes);
  const std::vector<int32_t> mapping = model.head.FoldingMap();
  for (const LabeledImage& item : images) {
    confusion.Merge(
        Confusion(model.Predict(item.image), item.labels, mapping, eval_classes));
  }
  return ComputeMetrics(confusion).mean_iou;
}

DistillResult DistillFinetune(const Model& model, const SupportSet& support,
                              std::span<const LabeledImage> validation,
                              const DistillConfig& config) {
  config.Validate();
  if (support.empty()) Fail(ErrorCode::kInvalidInput, "empty support set");
  if (validation.empty()) Fail(ErrorCode::kInvalidInput, "empty validation set");
  const Model& teacher = model;
  const int eval_classes = model.head.class_count();

  std::vector<DistillBatch> images;
  for (const SupportPair& pair : support) {
    images.push_back(BuildDistillBatch(teacher, {&pair, 1}, config));
  }

  DistillResult result;
  Model student = model;
  AdamOptimizer optimizer;
  std::mt19937_64 rng(config.seed);
  std::vector<size_t> order(images.size());
  std::iota(order.begin(), order.end(), 0);
  double best = -INFINITY;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    size_t pixels = 0;
    for (size_t start = 0; start < order.size(); start += config.batch) {
      DistillBatch batch;
      for (size_t k = start; k < std::min(order.size(), start + config.batch); ++k) {
        const DistillBatch& one = images[order[k]];
        batch.pixels.inputs.insert(batch.pixels.inputs.end(),
                                   one.pixels.inputs.begin(),
                                   one.pixels.inputs.end());
        batch.pixels.labels.insert(batch.pixels.labels.end(),
                                   one.pixels.labels.begin(),
                                   one.pixels.labels.end());
        batch.teacher_probs.insert(batch.teacher_probs.end(),
                                   one.teacher_probs.begin(),
                                   one.teacher_probs.end());
      }
      const ModelGradient grad = DistillGradient(student, batch, config);
      optimizer.Step(student, grad, config.lr);
      loss_sum += grad.loss * batch.pixels.size();
      pixels += batch.pixels.size();
    }
    result.loss_curve.push_back(loss_sum / static_cast<double>(pixels));
    const double miou = MeanIoU(student, validation, eval_classes);
    result.val_miou.push_back(miou);
    if (result.best_epoch == 0 || miou > best) {
      best = miou;
      result.best_epoch = epoch;
      result.model = student;
    }
  }
  return result;
}

}  // namespace plantwi
