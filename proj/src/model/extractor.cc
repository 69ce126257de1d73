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

#include "plantwi/model/extractor.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "plantwi/error.h"

namespace plantwi {
namespace {

DenseLayer MakeLayer(int in, int out, std::mt19937_64& rng) {
  DenseLayer layer;
  layer.in = in;
  layer.out = out;
  const double limit = std::sqrt(6.0 / (in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  layer.weight.resize(static_cast<size_t>(in) * out);
  for (float& w : layer.weight) w = static_cast<float>(dist(rng));
  layer.bias.assign(out, 0.0f);
  return layer;
}

// y = W x + b
inline void Affine(const DenseLayer& layer, const double* x, double* y) {
  const float* w = layer.weight.data();
  for (int o = 0; o < layer.out; ++o) {
    double acc = layer.bias[o];
    const float* row = w + static_cast<size_t>(o) * layer.in;
    for (int i = 0; i < layer.in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

// Box mean over a (2r+1)^2 window, averaging only in-bounds pixels so that a
// constant map stays constant at the borders.
Tensor3<double> BoxMean(const Tensor3<double>& src, int radius) {
  if (radius <= 0) return src;
  const int height = src.height();
  const int width = src.width();
  const int channels = src.channels();
  Tensor3<double> out(height, width, channels);
  for (int h = 0; h < height; ++h) {
    for (int w = 0; w < width; ++w) {
      auto dst = out.pixel(h, w);
      int count = 0;
      for (int dh = -radius; dh <= radius; ++dh) {
        const int hh = h + dh;
        if (hh < 0 || hh >= height) continue;
        for (int dw = -radius; dw <= radius; ++dw) {
          const int ww = w + dw;
          if (ww < 0 || ww >= width) continue;
          auto s = src.pixel(hh, ww);
          for (int c = 0; c < channels; ++c) dst[c] += s[c];
          ++count;
        }
      }
      for (int c = 0; c < channels; ++c) dst[c] /= count;
    }
  }
  return out;
}

}  // namespace

ExtractorParams ExtractorParams::Random(const ExtractorConfig& config,
                                        uint64_t seed) {
  if (config.hidden1 <= 0 || config.hidden2 <= 0 || config.dim <= 0 ||
      config.context_radius < 0) {
    Fail(ErrorCode::kInvalidInput, "extractor sizes must be positive");
  }
  std::mt19937_64 rng(seed);
  ExtractorParams params;
  params.context_radius = config.context_radius;
  params.layers.push_back(MakeLayer(kInputChannels, config.hidden1, rng));
  params.layers.push_back(MakeLayer(config.hidden1, config.hidden2, rng));
  params.layers.push_back(MakeLayer(config.hidden2, config.dim, rng));
  return params;
}

size_t ExtractorParams::parameter_count() const {
  size_t n = 0;
  for (const DenseLayer& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

ExtractorGradient ExtractorGradient::ZerosLike(const ExtractorParams& params) {
  ExtractorGradient grad;
  for (const DenseLayer& l : params.layers) {
    grad.layers.push_back({std::vector<double>(l.weight.size(), 0.0),
                           std::vector<double>(l.bias.size(), 0.0)});
  }
  return grad;
}

double ExtractorGradient::SquaredNorm() const {
  double sum = 0.0;
  for (const Layer& l : layers) {
    for (double g : l.weight) sum += g * g;
    for (double g : l.bias) sum += g * g;
  }
  return sum;
}

InputMap PrepareInputs(const RgbImage& image, int context_radius) {
  if (image.height() <= 0 || image.width() <= 0 || image.channels() != 3) {
    Fail(ErrorCode::kInvalidInput, "image must be a non-empty RGB image");
  }
  const int height = image.height();
  const int width = image.width();

  // Luminance and green-red opponent planes feed the texture channels.
  Tensor3<double> base(height, width, 2);
  for (int h = 0; h < height; ++h) {
    for (int w = 0; w < width; ++w) {
      const double r = image.at(h, w, 0) / 255.0;
      const double g = image.at(h, w, 1) / 255.0;
      const double b = image.at(h, w, 2) / 255.0;
      base.at(h, w, 0) = 0.299 * r + 0.587 * g + 0.114 * b;
      base.at(h, w, 1) = g - r;
    }
  }
  Tensor3<double> squares = base;
  for (double& v : squares.data()) v *= v;
  const Tensor3<double> mean = BoxMean(base, 1);
  const Tensor3<double> mean_sq = BoxMean(squares, 1);

  InputMap raw(height, width, kInputChannels);
  for (int h = 0; h < height; ++h) {
    for (int w = 0; w < width; ++w) {
      auto x = raw.pixel(h, w);
      for (int c = 0; c < 3; ++c) x[c] = image.at(h, w, c) / 255.0 - 0.5;
      for (int c = 0; c < 2; ++c) {
        const double m = mean.at(h, w, c);
        const double var = std::max(0.0, mean_sq.at(h, w, c) - m * m);
        x[3 + c] = 4.0 * std::sqrt(var);
      }
    }
  }
  return BoxMean(raw, context_radius);
}

std::vector<double> RawEmbedding(std::span<const double> input,
                                 const ExtractorParams& params) {
  const DenseLayer& l1 = params.layers[0];
  const DenseLayer& l2 = params.layers[1];
  const DenseLayer& l3 = params.layers[2];
  std::vector<double> h1(l1.out), h2(l2.out), z(l3.out);
  Affine(l1, input.data(), h1.data());
  for (double& v : h1) v = std::tanh(v);
  Affine(l2, h1.data(), h2.data());
  for (double& v : h2) v = std::tanh(v);
  Affine(l3, h2.data(), z.data());
  return z;
}

FeatureMap EmbedInputs(const InputMap& inputs, const ExtractorParams& params) {
  if (inputs.channels() != params.input_dim()) {
    Fail(ErrorCode::kInvalidInput, "input channel count mismatch");
  }
  ExtractorTape tape(params, inputs.data());
  FeatureMap features(inputs.height(), inputs.width(), params.output_dim());
  for (size_t p = 0; p < tape.size(); ++p) {
    auto src = tape.feature(p);
    std::copy(src.begin(), src.end(), features.pixel(p).begin());
  }
  return features;
}

FeatureMap ExtractFeatures(const RgbImage& image,
                           const ExtractorParams& params) {
  return EmbedInputs(PrepareInputs(image, params.context_radius), params);
}

ExtractorTape::ExtractorTape(const ExtractorParams& params,
                             std::span<const double> inputs)
    : params_(params), inputs_(inputs) {
  const DenseLayer& l1 = params.layers[0];
  const DenseLayer& l2 = params.layers[1];
  const DenseLayer& l3 = params.layers[2];
  rows_ = inputs.size() / l1.in;
  dim_ = l3.out;
  h1_.resize(rows_ * l1.out);
  h2_.resize(rows_ * l2.out);
  features_.resize(rows_ * l3.out);
  norms_.resize(rows_);
  for (size_t r = 0; r < rows_; ++r) {
    double* h1 = h1_.data() + r * l1.out;
    double* h2 = h2_.data() + r * l2.out;
    double* z = features_.data() + r * l3.out;
    Affine(l1, inputs.data() + r * l1.in, h1);
    for (int i = 0; i < l1.out; ++i) h1[i] = std::tanh(h1[i]);
    Affine(l2, h1, h2);
    for (int i = 0; i < l2.out; ++i) h2[i] = std::tanh(h2[i]);
    Affine(l3, h2, z);
    double sq = 0.0;
    for (int i = 0; i < l3.out; ++i) sq += z[i] * z[i];
    const double norm = std::sqrt(sq);
    if (!(norm > 1e-12) || !std::isfinite(norm)) {
      Fail(ErrorCode::kNumericalFailure, "embedding norm is zero or not finite");
    }
    for (int i = 0; i < l3.out; ++i) z[i] /= norm;
    norms_[r] = norm;
  }
}

void ExtractorTape::Backward(std::span<const double> feature_grads,
                             ExtractorGradient& grad) const {
  const DenseLayer& l1 = params_.layers[0];
  const DenseLayer& l2 = params_.layers[1];
  const DenseLayer& l3 = params_.layers[2];
  std::vector<double> dz(l3.out), dh2(l2.out), dh1(l1.out);
  auto& g1 = grad.layers[0];
  auto& g2 = grad.layers[1];
  auto& g3 = grad.layers[2];
  for (size_t r = 0; r < rows_; ++r) {
    const double* f = features_.data() + r * dim_;
    const double* g = feature_grads.data() + r * dim_;
    double fg = 0.0;
    bool any = false;
    for (int i = 0; i < dim_; ++i) {
      fg += f[i] * g[i];
      any = any || g[i] != 0.0;
    }
    if (!any) continue;
    // d(z/|z|)/dz = (I - f f^T) / |z|
    for (int i = 0; i < dim_; ++i) dz[i] = (g[i] - f[i] * fg) / norms_[r];

    const double* h2 = h2_.data() + r * l2.out;
    const double* h1 = h1_.data() + r * l1.out;
    const double* x = inputs_.data() + r * l1.in;

    std::fill(dh2.begin(), dh2.end(), 0.0);
    for (int o = 0; o < l3.out; ++o) {
      const double d = dz[o];
      g3.bias[o] += d;
      double* gw = g3.weight.data() + static_cast<size_t>(o) * l3.in;
      const float* w = l3.weight.data() + static_cast<size_t>(o) * l3.in;
      for (int i = 0; i < l3.in; ++i) {
        gw[i] += d * h2[i];
        dh2[i] += d * w[i];
      }
    }
    for (int i = 0; i < l2.out; ++i) dh2[i] *= 1.0 - h2[i] * h2[i];

    std::fill(dh1.begin(), dh1.end(), 0.0);
    for (int o = 0; o < l2.out; ++o) {
      const double d = dh2[o];
      g2.bias[o] += d;
      double* gw = g2.weight.data() + static_cast<size_t>(o) * l2.in;
      const float* w = l2.weight.data() + static_cast<size_t>(o) * l2.in;
      for (int i = 0; i < l2.in; ++i) {
        gw[i] += d * h1[i];
        dh1[i] += d * w[i];
      }
    }
    for (int i = 0; i < l1.out; ++i) dh1[i] *= 1.0 - h1[i] * h1[i];

    for (int o = 0; o < l1.out; ++o) {
      const double d = dh1[o];
      g1.bias[o] += d;
      double* gw = g1.weight.data() + static_cast<size_t>(o) * l1.in;
      for (int i = 0; i < l1.in; ++i) gw[i] += d * x[i];
    }
  }
}

}  // namespace plantwi
