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

#include "plantwi/geometry/pipeline.h"

#include <vector>

namespace plantwi {

BinaryMask SceneInteractionMask(const SyntheticScene& scene,
                                const VoxelGrid& grid, uint64_t frame_seed) {
  std::vector<BinaryMask> frames;
  frames.reserve(kTemporalFrames);
  for (int k = 0; k < kTemporalFrames; ++k) {
    const DepthImage depth =
        RenderDepthFrame(scene.clean_depth, scene.spec.noise, frame_seed + k);
    frames.push_back(
        FrameInteractionMask(depth, scene.intrinsics, scene.camera_pose, grid));
  }
  return TemporalOr(frames);
}

}  // namespace plantwi
