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

// Synthetic greenhouse-aisle RGB-D scenes.
//
// A ray-cast pinhole camera looks down an aisle between two rows of bushes.
// Some bushes carry small shoots that grow into the aisle; a configurable
// fraction of those shoots is labeled "artificial" in the training labels to
// produce a model that misses them. The depth observation carries additive
// Gaussian noise, a random RGB/depth registration shift and pixel dropout.

#ifndef PLANTWI_GEOMETRY_SCENE_H_
#define PLANTWI_GEOMETRY_SCENE_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "plantwi/geometry/camera.h"
#include "plantwi/geometry/voxel_grid.h"
#include "plantwi/image.h"

namespace plantwi {

inline constexpr int32_t kPlantClass = 0;
inline constexpr int32_t kArtificialClass = 1;
inline constexpr int32_t kGroundClass = 2;
inline constexpr int kBaseClassCount = 3;

const std::vector<std::string>& BaseClassNames();

struct NoiseModel {
  double depth_sigma = 0.01;    // meters
  int registration_jitter = 2;  // max |shift| in pixels, per axis
  double dropout = 0.002;       // probability a depth pixel reads 0

  bool noise_free() const {
    return depth_sigma == 0.0 && registration_jitter == 0 && dropout == 0.0;
  }
};

struct SceneSpec {
  int width = 128;
  int height = 128;
  double horizontal_fov = 1.2;  // radians

  // Workspace voxelization.
  Vec3 grid_origin{-4.5, -0.3, -0.5};
  std::array<int, 3> grid_dims{300, 120, 300};
  double voxel_size = kDefaultVoxelSize;

  // Plant rows.
  double row_offset = 0.65;  // lateral distance of each row from the aisle
  double row_length = 6.0;
  double shoot_probability = 0.7;
  double withheld_fraction = 0.8;

  NoiseModel noise;

  // Throws InvalidInput on a degenerate spec.
  void Validate() const;
  VoxelGrid MakeGrid() const;
};

struct SyntheticScene {
  uint64_t seed = 0;
  SceneSpec spec;
  RgbImage rgb;
  DepthImage depth;        // one noisy observation, registered to rgb
  DepthImage clean_depth;  // exact rendered depth
  LabelMap gt_labels;
  LabelMap train_labels;       // gt with withheld shoots relabeled artificial
  BinaryMask plant_withheld;   // pixels relabeled in train_labels
  CameraIntrinsics intrinsics;
  RigidTransform camera_pose;  // world_from_camera
  std::vector<VoxelIndex> plant_voxels;  // voxels holding visible plant points
};

// Deterministic per (seed, spec). Throws InvalidInput on a degenerate spec.
SyntheticScene GenerateScene(uint64_t seed, const SceneSpec& spec);

// One depth observation of the scene: the clean depth shifted by a random
// registration offset, with Gaussian noise and dropout. A noise-free model
// returns clean_depth unchanged.
DepthImage RenderDepthFrame(const DepthImage& clean_depth,
                            const NoiseModel& noise, uint64_t frame_seed);

}  // namespace plantwi

#endif  // PLANTWI_GEOMETRY_SCENE_H_
