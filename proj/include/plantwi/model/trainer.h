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

#ifndef PLANTWI_MODEL_TRAINER_H_
#define PLANTWI_MODEL_TRAINER_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "plantwi/image.h"
#include "plantwi/model/arcface.h"
#include "plantwi/model/classifier.h"
#include "plantwi/model/extractor.h"

namespace plantwi {

struct Model {
  ExtractorParams extractor;
  CosineClassifier head;

  ScoreMap Scores(const RgbImage& image) const {
    return CosineLogits(ExtractFeatures(image, extractor), head);
  }
  LabelMap Predict(const RgbImage& image) const {
    return plantwi::Predict(Scores(image));
  }

  friend bool operator==(const Model&, const Model&) = default;
};

// Flattened training pixels: inputs holds size() rows of kInputChannels.
struct PixelBatch {
  std::vector<double> inputs;
  std::vector<int32_t> labels;

  size_t size() const { return labels.size(); }
  void Append(const InputMap& map, const LabelMap& labels);
};

struct ModelGradient {
  ExtractorGradient extractor;
  std::vector<double> head;  // same layout as CosineClassifier::weights
  double loss = 0.0;

  LossReport Report(size_t pixels) const;
};

// Number of backward passes executed in this process. Refinement paths that
// claim to be forward-only are checked against this counter.
uint64_t BackwardPassCount();

// Backpropagates dL/dscores (rows x C) through the head and the extractor.
// Every call counts as one backward pass.
ModelGradient BackpropagateScores(const Model& model, const ExtractorTape& tape,
                                  std::span<const double> score_grads);

// Cosine scores (rows x C) for the features recorded on a tape.
std::vector<double> TapeScores(const ExtractorTape& tape,
                               const CosineClassifier& head);

// Mean ArcFace loss over the batch and its gradient w.r.t. all parameters,
// using the margin and scale stored in the head.
ModelGradient ArcFaceGradient(const Model& model, const PixelBatch& batch);

// Applies params -= lr * grad, then projects classifier rows back onto the
// unit sphere.
void ApplySgd(Model& model, const ModelGradient& grad, double lr);

class AdamOptimizer {
 public:
  explicit AdamOptimizer(double beta1 = 0.9, double beta2 = 0.999,
                         double epsilon = 1e-8)
      : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

  // Same projection rule as ApplySgd.
  void Step(Model& model, const ModelGradient& grad, double lr);

 private:
  double beta1_;
  double beta2_;
  double epsilon_;
  int64_t steps_ = 0;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
};

// One full-gradient descent step of the ArcFace loss on every pixel of the
// batch. lr == 0 leaves the model bitwise unchanged. Throws InvalidInput on
// an empty batch or negative lr and NumericalFailure on a non-finite loss.
LossReport TrainStep(std::span<const RgbImage> images,
                     std::span<const LabelMap> labels, Model& model,
                     double lr);

struct LabeledImage {
  RgbImage image;
  LabelMap labels;
};

struct PretrainConfig {
  double margin = kDefaultMargin;
  double scale = kDefaultScale;
  double lr = 0.01;
  int epochs = 200;
  uint64_t seed = 0;
  // Pixels drawn per image and epoch; <= 0 uses every pixel.
  int pixels_per_image = 1024;
  int images_per_step = 4;
  ExtractorConfig extractor;
};

struct PretrainResult {
  Model model;
  std::vector<double> loss_curve;  // mean loss per epoch
};

// Trains extractor and head from scratch with Adam on the ArcFace loss.
// Deterministic for a given seed. Throws InvalidInput on an empty dataset or
// when fewer than class_names.size() distinct labels occur in it.
PretrainResult Pretrain(std::span<const LabeledImage> dataset,
                        std::vector<std::string> class_names,
                        const PretrainConfig& config);

}  // namespace plantwi

#endif  // PLANTWI_MODEL_TRAINER_H_
