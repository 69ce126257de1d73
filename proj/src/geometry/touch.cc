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

#include "plantwi/geometry/touch.h"

#include <cmath>
#include <random>
#include <unordered_map>

#include "plantwi/error.h"

namespace plantwi {
namespace {

// Hash of 3D points bucketed into cubes of the query radius.
class PointHash {
 public:
  explicit PointHash(double cell) : cell_(cell) {}

  void Insert(const Vec3& p) { buckets_[Key(Cell(p))].push_back(p); }

  bool AnyWithin(const Vec3& p, double radius) const {
    const auto c = Cell(p);
    const double r2 = radius * radius;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          auto it = buckets_.find(Key({c[0] + dx, c[1] + dy, c[2] + dz}));
          if (it == buckets_.end()) continue;
          for (const Vec3& q : it->second) {
            const Vec3 d = q - p;
            if (d.dot(d) < r2) return true;
          }
        }
      }
    }
    return false;
  }

 private:
  std::array<int64_t, 3> Cell(const Vec3& p) const {
    return {static_cast<int64_t>(std::floor(p.x / cell_)),
            static_cast<int64_t>(std::floor(p.y / cell_)),
            static_cast<int64_t>(std::floor(p.z / cell_))};
  }
  static uint64_t Key(const std::array<int64_t, 3>& c) {
    return (static_cast<uint64_t>(c[0] + (1 << 20)) << 42) ^
           (static_cast<uint64_t>(c[1] + (1 << 20)) << 21) ^
           static_cast<uint64_t>(c[2] + (1 << 20));
  }

  double cell_;
  std::unordered_map<uint64_t, std::vector<Vec3>> buckets_;
};

}  // namespace

HandTrajectory SimulateTouch(const SyntheticScene& scene, const VoxelGrid& grid,
                             uint64_t seed, int strokes,
                             const TouchOptions& options) {
  if (strokes < 0) Fail(ErrorCode::kInvalidInput, "stroke count must be >= 0");
  const PointImage cloud =
      Deproject(scene.clean_depth, scene.intrinsics, scene.camera_pose);
  const int height = scene.clean_depth.height();
  const int width = scene.clean_depth.width();

  PointHash obstacles(options.clearance);
  bool any_plant = false;
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      if (!cloud.valid.at(v, u)) continue;
      if (scene.gt_labels.at(v, u) == kPlantClass) {
        any_plant = any_plant || grid.Locate(cloud.points.at(v, u)).has_value();
      } else {
        obstacles.Insert(cloud.points.at(v, u));
      }
    }
  }
  if (!any_plant) {
    Fail(ErrorCode::kInvalidInput, "scene shows no plant voxel to touch");
  }

  // Touchable pixels: visible plant surface clear of every other surface.
  BinaryMask touchable(height, width, 0);
  std::vector<int> all, withheld;
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      if (!cloud.valid.at(v, u) || scene.gt_labels.at(v, u) != kPlantClass) {
        continue;
      }
      const Vec3& p = cloud.points.at(v, u);
      if (!grid.Locate(p) || obstacles.AnyWithin(p, options.clearance)) continue;
      touchable.at(v, u) = 1;
      all.push_back(v * width + u);
      if (scene.plant_withheld.at(v, u)) withheld.push_back(v * width + u);
    }
  }

  HandTrajectory trajectory;
  if (strokes == 0 || all.empty()) return trajectory;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto pick = [&](const std::vector<int>& from) {
    return from[std::uniform_int_distribution<size_t>(0, from.size() - 1)(rng)];
  };
  int frame = 0;
  for (int s = 0; s < strokes; ++s) {
    const bool prefer_withheld =
        !withheld.empty() && unit(rng) < options.withheld_bias;
    int pixel = pick(prefer_withheld ? withheld : all);
    for (int k = 0; k < options.points_per_stroke; ++k) {
      const int v = pixel / width;
      const int u = pixel % width;
      trajectory.samples.push_back({frame++, cloud.points.at(v, u)});
      // Continue the stroke on a nearby touchable pixel.
      std::vector<int> next;
      const int r = options.step_pixels;
      for (int dv = -r; dv <= r; ++dv) {
        for (int du = -r; du <= r; ++du) {
          if ((dv == 0 && du == 0) || !touchable.contains(v + dv, u + du)) {
            continue;
          }
          if (touchable.at(v + dv, u + du)) {
            next.push_back((v + dv) * width + u + du);
          }
        }
      }
      if (next.empty()) break;
      pixel = pick(next);
    }
  }
  return trajectory;
}

void ApplyTrajectory(const HandTrajectory& trajectory, VoxelGrid& grid,
                     double radius) {
  for (const HandSample& sample : trajectory.samples) {
    grid.MarkSphere(sample.point, radius);
  }
}

}  // namespace plantwi
