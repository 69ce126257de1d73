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

// Compact per-pixel embedding network.
//
// An RGB image is first turned into a 5-channel input map (centered RGB plus
// two local texture channels) and smoothed by a fixed box window that gives
// each pixel some spatial context. A pointwise MLP then maps every input
// vector to a D-dimensional embedding that is L2-normalized:
//
//   h1 = tanh(W1 x + b1), h2 = tanh(W2 h1 + b2), z = W3 h2 + b3, f = z / |z|
//
// The context stage has no parameters, so gradients never have to flow
// across pixels.

#ifndef PLANTWI_MODEL_EXTRACTOR_H_
#define PLANTWI_MODEL_EXTRACTOR_H_

#include <cstdint>
#include <span>
#include <vector>

#include "plantwi/image.h"

namespace plantwi {

inline constexpr int kInputChannels = 5;

struct ExtractorConfig {
  int hidden1 = 32;
  int hidden2 = 32;
  int dim = 16;
  // Half-width of the box window applied to the input map.
  int context_radius = 1;
};

// Fully connected layer; weight is row-major [out][in].
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<float> weight;
  std::vector<float> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Parameters are stored in single precision so that checkpoints round-trip
// exactly; all arithmetic is carried out in double.
struct ExtractorParams {
  int context_radius = 1;
  std::vector<DenseLayer> layers;  // input -> hidden1 -> hidden2 -> dim

  static ExtractorParams Random(const ExtractorConfig& config, uint64_t seed);

  int input_dim() const { return layers.front().in; }
  int output_dim() const { return layers.back().out; }
  size_t parameter_count() const;

  friend bool operator==(const ExtractorParams&,
                         const ExtractorParams&) = default;
};

// Gradient buffers with the same layout as ExtractorParams.
struct ExtractorGradient {
  struct Layer {
    std::vector<double> weight;
    std::vector<double> bias;
  };
  std::vector<Layer> layers;

  static ExtractorGradient ZerosLike(const ExtractorParams& params);
  double SquaredNorm() const;
};

// H x W x kInputChannels network input, after the context window.
using InputMap = Tensor3<double>;

InputMap PrepareInputs(const RgbImage& image, int context_radius);

// Throws InvalidInput on an empty image.
FeatureMap ExtractFeatures(const RgbImage& image,
                           const ExtractorParams& params);
FeatureMap EmbedInputs(const InputMap& inputs, const ExtractorParams& params);

// Unnormalized network output z for a single input vector. Exposed for the
// scale-invariance checks on the classifier.
std::vector<double> RawEmbedding(std::span<const double> input,
                                 const ExtractorParams& params);

// Forward pass over a batch of input rows that keeps the intermediate
// activations needed by Backward().
class ExtractorTape {
 public:
  // inputs holds n rows of input_dim() values.
  ExtractorTape(const ExtractorParams& params, std::span<const double> inputs);

  size_t size() const { return rows_; }
  int dim() const { return dim_; }
  std::span<const double> feature(size_t row) const {
    return {features_.data() + row * dim_, static_cast<size_t>(dim_)};
  }

  // Accumulates dL/dparams into grad given dL/dfeature for every row
  // (n x dim, row-major).
  void Backward(std::span<const double> feature_grads,
                ExtractorGradient& grad) const;

 private:
  const ExtractorParams& params_;
  std::span<const double> inputs_;
  size_t rows_ = 0;
  int dim_ = 0;
  std::vector<double> h1_;
  std::vector<double> h2_;
  std::vector<double> features_;
  std::vector<double> norms_;
};

}  // namespace plantwi

#endif  // PLANTWI_MODEL_EXTRACTOR_H_
