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

#include "plantwi/model/trainer.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "plantwi/error.h"

namespace plantwi {
namespace {

std::atomic<uint64_t> g_backward_passes{0};

// Visits (parameter block, gradient block) pairs in a fixed order: extractor
// layers (weight, bias) followed by the classifier weights.
template <typename Fn>
void ForEachBlock(Model& model, const ModelGradient& grad, Fn&& fn) {
  for (size_t l = 0; l < model.extractor.layers.size(); ++l) {
    fn(model.extractor.layers[l].weight, grad.extractor.layers[l].weight);
    fn(model.extractor.layers[l].bias, grad.extractor.layers[l].bias);
  }
  fn(model.head.weights, grad.head);
}

void CheckFinite(const ModelGradient& grad) {
  if (!std::isfinite(grad.loss) || !std::isfinite(grad.extractor.SquaredNorm())) {
    Fail(ErrorCode::kNumericalFailure, "non-finite loss or gradient");
  }
}

}  // namespace

void PixelBatch::Append(const InputMap& map, const LabelMap& label_map) {
  if (map.height() != label_map.height() || map.width() != label_map.width()) {
    Fail(ErrorCode::kInvalidInput, "input map and labels differ in size");
  }
  inputs.insert(inputs.end(), map.data().begin(), map.data().end());
  labels.insert(labels.end(), label_map.data().begin(), label_map.data().end());
}

LossReport ModelGradient::Report(size_t pixels) const {
  LossReport report;
  report.loss = loss;
  report.pixel_count = pixels;
  report.extractor_grad_norm = std::sqrt(extractor.SquaredNorm());
  double sq = 0.0;
  for (double g : head) sq += g * g;
  report.classifier_grad_norm = std::sqrt(sq);
  return report;
}

uint64_t BackwardPassCount() { return g_backward_passes.load(); }

std::vector<double> TapeScores(const ExtractorTape& tape,
                               const CosineClassifier& head) {
  const int classes = head.class_count();
  const int dim = head.dim;
  std::vector<double> scores(tape.size() * classes);
  for (size_t r = 0; r < tape.size(); ++r) {
    auto f = tape.feature(r);
    for (int j = 0; j < classes; ++j) {
      const float* w = head.weights.data() + static_cast<size_t>(j) * dim;
      double acc = 0.0;
      for (int d = 0; d < dim; ++d) acc += f[d] * w[d];
      scores[r * classes + j] = acc;
    }
  }
  return scores;
}

ModelGradient BackpropagateScores(const Model& model, const ExtractorTape& tape,
                                  std::span<const double> score_grads) {
  g_backward_passes.fetch_add(1);
  const int classes = model.head.class_count();
  const int dim = model.head.dim;
  ModelGradient grad;
  grad.extractor = ExtractorGradient::ZerosLike(model.extractor);
  grad.head.assign(model.head.weights.size(), 0.0);
  std::vector<double> feature_grads(tape.size() * dim, 0.0);
  for (size_t r = 0; r < tape.size(); ++r) {
    auto f = tape.feature(r);
    const double* g = score_grads.data() + r * classes;
    double* fg = feature_grads.data() + r * dim;
    for (int j = 0; j < classes; ++j) {
      if (g[j] == 0.0) continue;
      const float* w = model.head.weights.data() + static_cast<size_t>(j) * dim;
      double* hw = grad.head.data() + static_cast<size_t>(j) * dim;
      for (int d = 0; d < dim; ++d) {
        hw[d] += g[j] * f[d];
        fg[d] += g[j] * w[d];
      }
    }
  }
  tape.Backward(feature_grads, grad.extractor);
  return grad;
}

ModelGradient ArcFaceGradient(const Model& model, const PixelBatch& batch) {
  if (batch.size() == 0) Fail(ErrorCode::kInvalidInput, "empty batch");
  ExtractorTape tape(model.extractor, batch.inputs);
  const std::vector<double> scores = TapeScores(tape, model.head);
  std::vector<double> score_grads(scores.size());
  const double loss =
      ArcFaceLossRows(scores, batch.labels, model.head.class_count(),
                      model.head.margin, model.head.scale, score_grads);
  ModelGradient grad = BackpropagateScores(model, tape, score_grads);
  grad.loss = loss;
  CheckFinite(grad);
  return grad;
}

void ApplySgd(Model& model, const ModelGradient& grad, double lr) {
  ForEachBlock(model, grad, [lr](std::vector<float>& p,
                                 const std::vector<double>& g) {
    for (size_t i = 0; i < p.size(); ++i) {
      p[i] = static_cast<float>(p[i] - lr * g[i]);
    }
  });
  NormalizeRows(model.head);
}

void AdamOptimizer::Step(Model& model, const ModelGradient& grad, double lr) {
  ++steps_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  size_t block = 0;
  ForEachBlock(model, grad, [&](std::vector<float>& p,
                                const std::vector<double>& g) {
    if (first_.size() <= block) {
      first_.emplace_back(p.size(), 0.0);
      second_.emplace_back(p.size(), 0.0);
    }
    std::vector<double>& m = first_[block];
    std::vector<double>& v = second_[block];
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
      const double step =
          lr * (m[i] / correction1) / (std::sqrt(v[i] / correction2) + epsilon_);
      p[i] = static_cast<float>(p[i] - step);
    }
    ++block;
  });
  NormalizeRows(model.head);
}

LossReport TrainStep(std::span<const RgbImage> images,
                     std::span<const LabelMap> labels, Model& model,
                     double lr) {
  if (images.empty() || images.size() != labels.size()) {
    Fail(ErrorCode::kInvalidInput, "batch must be non-empty and paired");
  }
  if (!(lr >= 0.0)) Fail(ErrorCode::kInvalidInput, "lr must be >= 0");
  PixelBatch batch;
  for (size_t i = 0; i < images.size(); ++i) {
    batch.Append(PrepareInputs(images[i], model.extractor.context_radius),
                 labels[i]);
  }
  const ModelGradient grad = ArcFaceGradient(model, batch);
  if (lr > 0.0) ApplySgd(model, grad, lr);
  return grad.Report(batch.size());
}

PretrainResult Pretrain(std::span<const LabeledImage> dataset,
                        std::vector<std::string> class_names,
                        const PretrainConfig& config) {
  if (dataset.empty()) Fail(ErrorCode::kInvalidInput, "empty dataset");
  if (config.epochs < 0 || config.images_per_step <= 0 || !(config.lr > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "invalid pretraining configuration");
  }
  const int classes = static_cast<int>(class_names.size());
  std::set<int32_t> present;
  for (const LabeledImage& item : dataset) {
    for (int32_t label : item.labels.data()) {
      if (label < 0 || label >= classes) {
        Fail(ErrorCode::kInvalidInput, "label outside the class list");
      }
      present.insert(label);
    }
  }
  if (static_cast<int>(present.size()) < classes) {
    Fail(ErrorCode::kInvalidInput,
         "dataset contains only " + std::to_string(present.size()) + " of " +
             std::to_string(classes) + " classes");
  }

  std::mt19937_64 rng(config.seed);
  PretrainResult result;
  Model& model = result.model;
  model.extractor = ExtractorParams::Random(config.extractor, rng());
  model.head = CosineClassifier::Random(config.extractor.dim,
                                        std::move(class_names), rng());
  model.head.margin = config.margin;
  model.head.scale = config.scale;
  model.head.Validate();

  std::vector<InputMap> inputs;
  inputs.reserve(dataset.size());
  for (const LabeledImage& item : dataset) {
    inputs.push_back(PrepareInputs(item.image, model.extractor.context_radius));
  }

  AdamOptimizer optimizer;
  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  const int channels = kInputChannels;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    size_t loss_pixels = 0;
    for (size_t start = 0; start < order.size();
         start += config.images_per_step) {
      const size_t stop =
          std::min(order.size(), start + config.images_per_step);
      PixelBatch batch;
      for (size_t k = start; k < stop; ++k) {
        const InputMap& map = inputs[order[k]];
        const LabelMap& labels = dataset[order[k]].labels;
        const size_t pixels = labels.size();
        if (config.pixels_per_image <= 0) {
          batch.Append(map, labels);
          continue;
        }
        std::uniform_int_distribution<size_t> pick(0, pixels - 1);
        for (int s = 0; s < config.pixels_per_image; ++s) {
          const size_t p = pick(rng);
          auto x = map.pixel(p);
          batch.inputs.insert(batch.inputs.end(), x.begin(), x.begin() + channels);
          batch.labels.push_back(labels[p]);
        }
      }
      const ModelGradient grad = ArcFaceGradient(model, batch);
      optimizer.Step(model, grad, config.lr);
      loss_sum += grad.loss * batch.size();
      loss_pixels += batch.size();
    }
    result.loss_curve.push_back(loss_sum / static_cast<double>(loss_pixels));
  }
  return result;
}

}  // namespace plantwi
