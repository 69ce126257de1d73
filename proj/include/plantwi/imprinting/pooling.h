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

// Prototype pooling and weight imprinting.
//
// Masked average pooling (MAP) averages the embeddings under the support
// masks:
//
//   x_map = sum_i sum_hw M_i(h,w) x_i(h,w) / sum_i sum_hw M_i(h,w)
//
// Robust average pooling (RAP) down-weights embeddings that point away from
// the MAP center. Each masked pixel gets v = max(0, <x, x_map / |x_map|>) and
//
//   x_rap = sum_i sum_hw v_i(h,w) M_i(h,w) x_i(h,w) / sum_i sum_hw M_i(h,w)
//
// Both prototypes are L2-normalized before use. The RAP denominator is the
// mask count, not the weight sum; it cancels under normalization.

#ifndef PLANTWI_IMPRINTING_POOLING_H_
#define PLANTWI_IMPRINTING_POOLING_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plantwi/image.h"
#include "plantwi/model/classifier.h"
#include "plantwi/model/extractor.h"

namespace plantwi {

enum class PoolingMethod { kMap, kRap };

std::string_view PoolingMethodName(PoolingMethod method);
// Accepts "map" / "rap" in any case; throws InvalidInput otherwise.
PoolingMethod ParsePoolingMethod(std::string_view name);

struct PooledPrototype {
  PoolingMethod method = PoolingMethod::kMap;
  std::vector<double> raw;
  std::vector<double> normalized;
  // RAP only: v for every pixel of every support image (0 outside the mask).
  std::vector<Plane<double>> pixel_weights;
};

// Support pair (I_i, M_i).
struct SupportPair {
  RgbImage image;
  BinaryMask mask;
};
using SupportSet = std::vector<SupportPair>;

// Errors: InvalidInput on mismatched lists or shapes, EmptyMask when no mask
// pixel is set, DegeneratePrototype when |raw| < 1e-12.
PooledPrototype MaskedAveragePool(std::span<const FeatureMap> features,
                                  std::span<const BinaryMask> masks);
// Same errors; DegeneratePrototype also covers every v being zero.
PooledPrototype RobustAveragePool(std::span<const FeatureMap> features,
                                  std::span<const BinaryMask> masks);
// RAP with an explicit reference direction in place of the normalized MAP
// center.
PooledPrototype RobustAveragePool(std::span<const FeatureMap> features,
                                  std::span<const BinaryMask> masks,
                                  std::span<const double> reference);

PooledPrototype Pool(PoolingMethod method, std::span<const FeatureMap> features,
                     std::span<const BinaryMask> masks);

// Runs the extractor over the support images and pools under their masks.
// This is a forward-only computation.
PooledPrototype PoolSupport(const SupportSet& support,
                            const ExtractorParams& extractor,
                            PoolingMethod method);

// Returns a copy of head with one extra row equal to the prototype. Existing
// rows are copied bit for bit; the new class records parent_class so that
// evaluation can fold it back. Throws InvalidInput on a dimension mismatch or
// an out-of-range parent.
CosineClassifier Imprint(const CosineClassifier& head,
                         const PooledPrototype& prototype,
                         int32_t parent_class, std::string name = {});

}  // namespace plantwi

#endif  // PLANTWI_IMPRINTING_POOLING_H_
