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

#ifndef PLANTWI_GEOMETRY_PIPELINE_H_
#define PLANTWI_GEOMETRY_PIPELINE_H_

#include <cstdint>

#include "plantwi/geometry/masks.h"
#include "plantwi/geometry/scene.h"
#include "plantwi/geometry/voxel_grid.h"

namespace plantwi {

// Renders kTemporalFrames depth observations of the scene with its noise
// model (frame k uses seed frame_seed + k), masks each against the grid and
// ORs them into the interaction mask M'.
BinaryMask SceneInteractionMask(const SyntheticScene& scene,
                                const VoxelGrid& grid, uint64_t frame_seed);

}  // namespace plantwi

#endif  // PLANTWI_GEOMETRY_PIPELINE_H_
