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

// Random fixtures shared by the unit tests.

#ifndef PLANTWI_TESTS_FIXTURES_H_
#define PLANTWI_TESTS_FIXTURES_H_

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "plantwi/error.h"
#include "plantwi/image.h"
#include "plantwi/model/trainer.h"

namespace plantwi::testing {

inline std::vector<double> RandomUnit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  double sq = 0.0;
  for (double& x : v) {
    x = normal(rng);
    sq += x * x;
  }
  for (double& x : v) x /= std::sqrt(sq);
  return v;
}

inline RgbImage RandomImage(std::mt19937_64& rng, int h, int w) {
  RgbImage image(h, w, 3);
  std::uniform_int_distribution<int> byte(0, 255);
  for (uint8_t& v : image.data()) v = static_cast<uint8_t>(byte(rng));
  return image;
}

// H x W feature map of independent random unit vectors.
inline FeatureMap RandomFeatures(std::mt19937_64& rng, int h, int w, int dim) {
  FeatureMap f(h, w, dim);
  for (size_t p = 0; p < f.pixel_count(); ++p) {
    const auto v = RandomUnit(rng, dim);
    std::copy(v.begin(), v.end(), f.pixel(p).begin());
  }
  return f;
}

inline BinaryMask RandomMask(std::mt19937_64& rng, int h, int w, double p) {
  BinaryMask m(h, w, 0);
  std::bernoulli_distribution on(p);
  for (uint8_t& v : m.data()) v = on(rng);
  return m;
}

inline LabelMap RandomLabels(std::mt19937_64& rng, int h, int w, int classes) {
  LabelMap l(h, w);
  std::uniform_int_distribution<int> pick(0, classes - 1);
  for (int32_t& v : l.data()) v = pick(rng);
  return l;
}

inline Model RandomModel(uint64_t seed, int dim, int classes,
                         int hidden = 32) {
  ExtractorConfig config;
  config.dim = dim;
  config.hidden1 = hidden;
  config.hidden2 = hidden;
  std::vector<std::string> names;
  for (int c = 0; c < classes; ++c) names.push_back("c" + std::to_string(c));
  Model model;
  model.extractor = ExtractorParams::Random(config, seed);
  model.head = CosineClassifier::Random(dim, names, seed + 1);
  return model;
}

// Runs fn and returns the code of the plantwi::Error it throws, if any.
inline std::optional<ErrorCode> CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline double Dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace plantwi::testing

#endif  // PLANTWI_TESTS_FIXTURES_H_
