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

// Interaction mask construction.
//
//   per frame:   pixel = 1 iff its back-projected point lies in an interacted
//                voxel (invalid depth -> 0)
//   M' (interaction mask) = OR over exactly five consecutive frames
//   M  (training mask)    = M' AND (predicted label == plant)
//
// BuildTrainingMask also offers the complementary rule, which keeps the
// touched pixels the model does not yet call plant, i.e. the false-negative
// plant regions a new class is meant to capture.

#ifndef PLANTWI_GEOMETRY_MASKS_H_
#define PLANTWI_GEOMETRY_MASKS_H_

#include <cstdint>
#include <span>
#include <string_view>

#include "plantwi/geometry/camera.h"
#include "plantwi/geometry/voxel_grid.h"
#include "plantwi/image.h"

namespace plantwi {

inline constexpr int kTemporalFrames = 5;

BinaryMask FrameInteractionMask(const DepthImage& depth,
                                const CameraIntrinsics& intrinsics,
                                const RigidTransform& pose,
                                const VoxelGrid& grid);

// Throws InvalidInput unless exactly kTemporalFrames masks of equal size are
// given.
BinaryMask TemporalOr(std::span<const BinaryMask> masks);

// M = M' AND (predicted == plant_class). Throws InvalidInput on a size
// mismatch.
BinaryMask FilterTrainingMask(const BinaryMask& interaction_mask,
                              const LabelMap& predicted, int32_t plant_class);

enum class TrainingMaskRule {
  kPredictedPlant,  // M' AND (predicted == plant), as FilterTrainingMask
  kFalseNegative,   // M' AND (predicted != plant)
};

BinaryMask BuildTrainingMask(const BinaryMask& interaction_mask,
                             const LabelMap& predicted, int32_t plant_class,
                             TrainingMaskRule rule);

std::string_view TrainingMaskRuleName(TrainingMaskRule rule);
// Accepts "predicted-plant" or "false-negative"; throws InvalidInput.
TrainingMaskRule ParseTrainingMaskRule(std::string_view name);

}  // namespace plantwi

#endif  // PLANTWI_GEOMETRY_MASKS_H_
