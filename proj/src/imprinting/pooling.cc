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

#include "plantwi/imprinting/pooling.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "plantwi/error.h"

namespace plantwi {
namespace {

constexpr double kDegenerateNorm = 1e-12;

// Returns the total number of set mask pixels after validating shapes.
size_t ValidateSupport(std::span<const FeatureMap> features,
                       std::span<const BinaryMask> masks) {
  if (features.empty() || features.size() != masks.size()) {
    Fail(ErrorCode::kInvalidInput,
         "features and masks must be non-empty lists of equal length");
  }
  const int dim = features.front().channels();
  size_t count = 0;
  for (size_t i = 0; i < features.size(); ++i) {
    if (features[i].channels() != dim || dim <= 0) {
      Fail(ErrorCode::kInvalidInput, "feature maps disagree in dimension");
    }
    if (features[i].height() != masks[i].height() ||
        features[i].width() != masks[i].width()) {
      Fail(ErrorCode::kInvalidInput,
           "mask " + std::to_string(i) + " does not match its feature map");
    }
    count += CountSet(masks[i]);
  }
  if (count == 0) Fail(ErrorCode::kEmptyMask, "no mask pixel is set");
  return count;
}

void Normalize(PooledPrototype& proto) {
  double sq = 0.0;
  for (double v : proto.raw) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!(norm >= kDegenerateNorm)) {
    Fail(ErrorCode::kDegeneratePrototype,
         "pooled feature has near-zero norm; masked features cancel out");
  }
  proto.normalized.resize(proto.raw.size());
  for (size_t d = 0; d < proto.raw.size(); ++d) {
    proto.normalized[d] = proto.raw[d] / norm;
  }
}

}  // namespace

std::string_view PoolingMethodName(PoolingMethod method) {
  return method == PoolingMethod::kMap ? "map" : "rap";
}

PoolingMethod ParsePoolingMethod(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "map") return PoolingMethod::kMap;
  if (lower == "rap") return PoolingMethod::kRap;
  Fail(ErrorCode::kInvalidInput,
       "unknown pooling method '" + std::string(name) + "' (want map|rap)");
}

PooledPrototype MaskedAveragePool(std::span<const FeatureMap> features,
                                  std::span<const BinaryMask> masks) {
  const size_t count = ValidateSupport(features, masks);
  const int dim = features.front().channels();
  PooledPrototype proto;
  proto.method = PoolingMethod::kMap;
  proto.raw.assign(dim, 0.0);
  for (size_t i = 0; i < features.size(); ++i) {
    for (size_t p = 0; p < masks[i].size(); ++p) {
      if (!masks[i][p]) continue;
      auto x = features[i].pixel(p);
      for (int d = 0; d < dim; ++d) proto.raw[d] += x[d];
    }
  }
  for (double& v : proto.raw) v /= static_cast<double>(count);
  Normalize(proto);
  return proto;
}

PooledPrototype RobustAveragePool(std::span<const FeatureMap> features,
                                  std::span<const BinaryMask> masks) {
  const PooledPrototype center = MaskedAveragePool(features, masks);
  return RobustAveragePool(features, masks, center.normalized);
}

PooledPrototype RobustAveragePool(std::span<const FeatureMap> features,
                                  std::span<const BinaryMask> masks,
                                  std::span<const double> reference) {
  const size_t count = ValidateSupport(features, masks);
  const int dim = features.front().channels();
  if (reference.size() != static_cast<size_t>(dim)) {
    Fail(ErrorCode::kInvalidInput, "reference dimension mismatch");
  }
  PooledPrototype proto;
  proto.method = PoolingMethod::kRap;
  proto.raw.assign(dim, 0.0);
  bool any_weight = false;
  for (size_t i = 0; i < features.size(); ++i) {
    Plane<double> weights(masks[i].height(), masks[i].width(), 0.0);
    for (size_t p = 0; p < masks[i].size(); ++p) {
      if (!masks[i][p]) continue;
      auto x = features[i].pixel(p);
      double dot = 0.0;
      for (int d = 0; d < dim; ++d) dot += x[d] * reference[d];
      if (dot <= 0.0) continue;  // clipped: contributes exactly nothing
      weights[p] = dot;
      any_weight = true;
      for (int d = 0; d < dim; ++d) proto.raw[d] += dot * x[d];
    }
    proto.pixel_weights.push_back(std::move(weights));
  }
  if (!any_weight) {
    Fail(ErrorCode::kDegeneratePrototype, "every robust pooling weight is zero");
  }
  for (double& v : proto.raw) v /= static_cast<double>(count);
  Normalize(proto);
  return proto;
}

PooledPrototype Pool(PoolingMethod method, std::span<const FeatureMap> features,
                     std::span<const BinaryMask> masks) {
  return method == PoolingMethod::kMap ? MaskedAveragePool(features, masks)
                                       : RobustAveragePool(features, masks);
}

PooledPrototype PoolSupport(const SupportSet& support,
                            const ExtractorParams& extractor,
                            PoolingMethod method) {
  std::vector<FeatureMap> features;
  std::vector<BinaryMask> masks;
  features.reserve(support.size());
  masks.reserve(support.size());
  for (const SupportPair& pair : support) {
    if (pair.image.height() != pair.mask.height() ||
        pair.image.width() != pair.mask.width()) {
      Fail(ErrorCode::kInvalidInput, "support mask does not match its image");
    }
    // Images without any masked pixel add nothing; skip the forward pass.
    if (CountSet(pair.mask) == 0) continue;
    features.push_back(ExtractFeatures(pair.image, extractor));
    masks.push_back(pair.mask);
  }
  if (features.empty()) {
    if (support.empty()) Fail(ErrorCode::kInvalidInput, "empty support set");
    Fail(ErrorCode::kEmptyMask, "no support mask has a set pixel");
  }
  return Pool(method, features, masks);
}

CosineClassifier Imprint(const CosineClassifier& head,
                         const PooledPrototype& prototype,
                         int32_t parent_class, std::string name) {
  if (prototype.normalized.size() != static_cast<size_t>(head.dim)) {
    Fail(ErrorCode::kInvalidInput, "prototype dimension does not match head");
  }
  if (parent_class < 0 || parent_class >= head.class_count()) {
    Fail(ErrorCode::kInvalidInput, "parent class out of range");
  }
  CosineClassifier out = head;
  if (name.empty()) {
    name = head.class_names[parent_class] + "#" +
           std::to_string(head.class_count());
  }
  for (double v : prototype.normalized) {
    out.weights.push_back(static_cast<float>(v));
  }
  out.class_names.push_back(std::move(name));
  out.parent_class.push_back(parent_class);
  return out;
}

}  // namespace plantwi
