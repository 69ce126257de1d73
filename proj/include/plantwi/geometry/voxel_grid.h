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

#ifndef PLANTWI_GEOMETRY_VOXEL_GRID_H_
#define PLANTWI_GEOMETRY_VOXEL_GRID_H_

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_set>
#include <vector>

#include "plantwi/geometry/camera.h"

namespace plantwi {

inline constexpr double kDefaultVoxelSize = 0.03;
inline constexpr double kTouchRadius = 0.05;

struct VoxelIndex {
  int x = 0;
  int y = 0;
  int z = 0;

  friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

// Fixed-extent voxelization of the workspace. Voxel (i, j, k) covers
// [origin + (i, j, k) * size, origin + (i + 1, j + 1, k + 1) * size).
// Interaction flags are stored sparsely since a session only ever touches a
// few hundred voxels out of millions.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  // Throws InvalidInput unless voxel_size > 0 and every dim > 0.
  VoxelGrid(const Vec3& origin, double voxel_size,
            const std::array<int, 3>& dims);

  const Vec3& origin() const { return origin_; }
  double voxel_size() const { return voxel_size_; }
  const std::array<int, 3>& dims() const { return dims_; }

  bool Contains(const VoxelIndex& index) const;
  // Index of the voxel holding p, or nullopt outside the grid.
  std::optional<VoxelIndex> Locate(const Vec3& p) const;
  Vec3 Center(const VoxelIndex& index) const;

  // Out-of-grid queries report false.
  bool interacted(const VoxelIndex& index) const;
  bool InteractedAt(const Vec3& p) const;
  void SetInteracted(const VoxelIndex& index);

  // Flags every voxel whose center lies within radius of center. Returns the
  // number of voxels that were newly flagged.
  size_t MarkSphere(const Vec3& center, double radius);

  size_t interacted_count() const { return interacted_.size(); }
  std::vector<VoxelIndex> InteractedVoxels() const;
  void Clear() { interacted_.clear(); }

 private:
  uint64_t Linear(const VoxelIndex& index) const;

  Vec3 origin_;
  double voxel_size_ = kDefaultVoxelSize;
  std::array<int, 3> dims_ = {0, 0, 0};
  std::unordered_set<uint64_t> interacted_;
};

// Functional form of VoxelGrid::MarkSphere. Throws InvalidInput when
// radius <= 0.
VoxelGrid MarkInteracted(VoxelGrid grid, const Vec3& hand,
                         double radius = kTouchRadius);

}  // namespace plantwi

#endif  // PLANTWI_GEOMETRY_VOXEL_GRID_H_
