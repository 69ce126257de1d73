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

#ifndef PLANTWI_GEOMETRY_TOUCH_H_
#define PLANTWI_GEOMETRY_TOUCH_H_

#include <cstdint>
#include <vector>

#include "plantwi/geometry/camera.h"
#include "plantwi/geometry/scene.h"
#include "plantwi/geometry/voxel_grid.h"
#include "plantwi/image.h"

namespace plantwi {

struct HandSample {
  int frame = 0;
  Vec3 point;
};

struct HandTrajectory {
  std::vector<HandSample> samples;

  bool empty() const { return samples.empty(); }
};

struct TouchOptions {
  int points_per_stroke = 5;
  // Pixel radius searched for the next point of a stroke.
  int step_pixels = 4;
  // Probability that a stroke starts on a withheld (misclassified) shoot.
  double withheld_bias = 0.8;
  // Minimum distance from any visible non-plant surface; keeps the 5 cm
  // sphere plus a voxel half-diagonal on the plant.
  double clearance = kTouchRadius + 0.03;
};

// Simulated hand trajectory of a person touching plant surfaces visible in
// the scene. Points lie on the rendered plant surface; strokes prefer
// withheld shoots. Deterministic per seed. strokes == 0 yields an empty
// trajectory. Throws InvalidInput when the scene shows no plant voxel.
HandTrajectory SimulateTouch(const SyntheticScene& scene, const VoxelGrid& grid,
                             uint64_t seed, int strokes,
                             const TouchOptions& options = {});

// Marks the touch sphere around every trajectory point.
void ApplyTrajectory(const HandTrajectory& trajectory, VoxelGrid& grid,
                     double radius = kTouchRadius);

}  // namespace plantwi

#endif  // PLANTWI_GEOMETRY_TOUCH_H_
