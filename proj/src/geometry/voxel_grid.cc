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

#include "plantwi/geometry/voxel_grid.h"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "plantwi/error.h"

namespace plantwi {

VoxelGrid::VoxelGrid(const Vec3& origin, double voxel_size,
                     const std::array<int, 3>& dims)
    : origin_(origin), voxel_size_(voxel_size), dims_(dims) {
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    Fail(ErrorCode::kInvalidInput, "voxel size must be positive");
  }
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) {
    Fail(ErrorCode::kInvalidInput, "voxel grid dims must be positive");
  }
}

bool VoxelGrid::Contains(const VoxelIndex& index) const {
  return index.x >= 0 && index.y >= 0 && index.z >= 0 && index.x < dims_[0] &&
         index.y < dims_[1] && index.z < dims_[2];
}

std::optional<VoxelIndex> VoxelGrid::Locate(const Vec3& p) const {
  const double fx = std::floor((p.x - origin_.x) / voxel_size_);
  const double fy = std::floor((p.y - origin_.y) / voxel_size_);
  const double fz = std::floor((p.z - origin_.z) / voxel_size_);
  if (!(fx >= 0 && fy >= 0 && fz >= 0 && fx < dims_[0] && fy < dims_[1] &&
        fz < dims_[2])) {
    return std::nullopt;
  }
  return VoxelIndex{static_cast<int>(fx), static_cast<int>(fy),
                    static_cast<int>(fz)};
}

Vec3 VoxelGrid::Center(const VoxelIndex& index) const {
  return {origin_.x + (index.x + 0.5) * voxel_size_,
          origin_.y + (index.y + 0.5) * voxel_size_,
          origin_.z + (index.z + 0.5) * voxel_size_};
}

uint64_t VoxelGrid::Linear(const VoxelIndex& index) const {
  return (static_cast<uint64_t>(index.z) * dims_[1] + index.y) * dims_[0] +
         index.x;
}

bool VoxelGrid::interacted(const VoxelIndex& index) const {
  return Contains(index) && interacted_.contains(Linear(index));
}

bool VoxelGrid::InteractedAt(const Vec3& p) const {
  const auto index = Locate(p);
  return index && interacted_.contains(Linear(*index));
}

void VoxelGrid::SetInteracted(const VoxelIndex& index) {
  if (!Contains(index)) {
    Fail(ErrorCode::kInvalidInput, "voxel index outside the grid");
  }
  interacted_.insert(Linear(index));
}

size_t VoxelGrid::MarkSphere(const Vec3& center, double radius) {
  if (!(radius > 0.0)) Fail(ErrorCode::kInvalidInput, "radius must be > 0");
  if (!std::isfinite(center.x) || !std::isfinite(center.y) ||
      !std::isfinite(center.z)) {
    Fail(ErrorCode::kInvalidInput, "hand point must be finite");
  }
  // Candidate index range: voxels whose centers can fall inside the sphere.
  auto range = [&](double c, double o, int dim) {
    const int lo = static_cast<int>(
        std::ceil((c - radius - o) / voxel_size_ - 0.5));
    const int hi = static_cast<int>(
        std::floor((c + radius - o) / voxel_size_ - 0.5));
    return std::array<int, 2>{std::max(lo, 0), std::min(hi, dim - 1)};
  };
  const auto rx = range(center.x, origin_.x, dims_[0]);
  const auto ry = range(center.y, origin_.y, dims_[1]);
  const auto rz = range(center.z, origin_.z, dims_[2]);
  const double r2 = radius * radius;
  size_t added = 0;
  for (int z = rz[0]; z <= rz[1]; ++z) {
    for (int y = ry[0]; y <= ry[1]; ++y) {
      for (int x = rx[0]; x <= rx[1]; ++x) {
        const VoxelIndex index{x, y, z};
        const Vec3 d = Center(index) - center;
        if (d.dot(d) <= r2) added += interacted_.insert(Linear(index)).second;
      }
    }
  }
  return added;
}

std::vector<VoxelIndex> VoxelGrid::InteractedVoxels() const {
  std::vector<VoxelIndex> out;
  out.reserve(interacted_.size());
  for (uint64_t linear : interacted_) {
    const int x = static_cast<int>(linear % dims_[0]);
    const uint64_t rest = linear / dims_[0];
    out.push_back({x, static_cast<int>(rest % dims_[1]),
                   static_cast<int>(rest / dims_[1])});
  }
  std::sort(out.begin(), out.end(), [](const VoxelIndex& a, const VoxelIndex& b) {
    return std::tie(a.z, a.y, a.x) < std::tie(b.z, b.y, b.x);
  });
  return out;
}

VoxelGrid MarkInteracted(VoxelGrid grid, const Vec3& hand, double radius) {
  grid.MarkSphere(hand, radius);
  return grid;
}

}  // namespace plantwi
