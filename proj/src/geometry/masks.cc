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

#include "plantwi/geometry/masks.h"

#include <string>

#include "plantwi/error.h"

namespace plantwi {

BinaryMask FrameInteractionMask(const DepthImage& depth,
                                const CameraIntrinsics& intrinsics,
                                const RigidTransform& pose,
                                const VoxelGrid& grid) {
  intrinsics.Validate();
  if (depth.height() != intrinsics.height || depth.width() != intrinsics.width) {
    Fail(ErrorCode::kInvalidInput, "depth image does not match intrinsics");
  }
  BinaryMask mask(depth.height(), depth.width(), 0);
  if (grid.interacted_count() == 0) return mask;
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const auto p = DeprojectPixel(u, v, depth.at(v, u), intrinsics, pose);
      if (p && grid.InteractedAt(*p)) mask.at(v, u) = 1;
    }
  }
  return mask;
}

BinaryMask TemporalOr(std::span<const BinaryMask> masks) {
  if (masks.size() != kTemporalFrames) {
    Fail(ErrorCode::kInvalidInput,
         "temporal OR needs exactly " + std::to_string(kTemporalFrames) +
             " frames, got " + std::to_string(masks.size()));
  }
  BinaryMask out(masks[0].height(), masks[0].width(), 0);
  for (const BinaryMask& m : masks) {
    if (!m.same_shape(out)) {
      Fail(ErrorCode::kInvalidInput, "frame masks differ in size");
    }
    for (size_t i = 0; i < m.size(); ++i) out[i] |= m[i] ? 1 : 0;
  }
  return out;
}

BinaryMask FilterTrainingMask(const BinaryMask& interaction_mask,
                              const LabelMap& predicted, int32_t plant_class) {
  return BuildTrainingMask(interaction_mask, predicted, plant_class,
                           TrainingMaskRule::kPredictedPlant);
}

BinaryMask BuildTrainingMask(const BinaryMask& interaction_mask,
                             const LabelMap& predicted, int32_t plant_class,
                             TrainingMaskRule rule) {
  if (!interaction_mask.same_shape(predicted)) {
    Fail(ErrorCode::kInvalidInput, "interaction mask and prediction differ");
  }
  const bool keep_plant = rule == TrainingMaskRule::kPredictedPlant;
  BinaryMask out(interaction_mask.height(), interaction_mask.width(), 0);
  for (size_t i = 0; i < out.size(); ++i) {
    const bool is_plant = predicted[i] == plant_class;
    out[i] = interaction_mask[i] && is_plant == keep_plant ? 1 : 0;
  }
  return out;
}

std::string_view TrainingMaskRuleName(TrainingMaskRule rule) {
  return rule == TrainingMaskRule::kPredictedPlant ? "predicted-plant"
                                                   : "false-negative";
}

TrainingMaskRule ParseTrainingMaskRule(std::string_view name) {
  if (name == "predicted-plant") return TrainingMaskRule::kPredictedPlant;
  if (name == "false-negative") return TrainingMaskRule::kFalseNegative;
  Fail(ErrorCode::kInvalidInput,
       "unknown training-mask rule '" + std::string(name) +
           "' (expected predicted-plant or false-negative)");
}

}  // namespace plantwi
