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

#include "plantwi/geometry/camera.h"

#include "plantwi/error.h"

namespace plantwi {

RigidTransform RigidTransform::FromMatrix(const std::array<double, 16>& m) {
  RigidTransform t;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) t.rotation[r * 3 + c] = m[r * 4 + c];
  }
  t.translation = {m[3], m[7], m[11]};
  return t;
}

std::array<double, 16> RigidTransform::ToMatrix() const {
  std::array<double, 16> m{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m[r * 4 + c] = rotation[r * 3 + c];
  }
  m[3] = translation.x;
  m[7] = translation.y;
  m[11] = translation.z;
  m[15] = 1.0;
  return m;
}

Vec3 RigidTransform::Rotate(const Vec3& v) const {
  const auto& r = rotation;
  return {r[0] * v.x + r[1] * v.y + r[2] * v.z,
          r[3] * v.x + r[4] * v.y + r[5] * v.z,
          r[6] * v.x + r[7] * v.y + r[8] * v.z};
}

Vec3 RigidTransform::Apply(const Vec3& p) const {
  return Rotate(p) + translation;
}

RigidTransform RigidTransform::Inverse() const {
  RigidTransform inv;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) inv.rotation[r * 3 + c] = rotation[c * 3 + r];
  }
  inv.translation = inv.Rotate(translation) * -1.0;
  return inv;
}

void CameraIntrinsics::Validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    Fail(ErrorCode::kInvalidInput, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    Fail(ErrorCode::kInvalidInput, "image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    Fail(ErrorCode::kInvalidInput, "principal point outside the image");
  }
}

std::optional<Vec3> DeprojectPixel(double u, double v, double depth,
                                   const CameraIntrinsics& intrinsics,
                                   const RigidTransform& pose) {
  if (!(depth > 0.0) || !std::isfinite(depth)) return std::nullopt;
  const Vec3 camera{(u - intrinsics.cx) * depth / intrinsics.fx,
                    (v - intrinsics.cy) * depth / intrinsics.fy, depth};
  return pose.Apply(camera);
}

PointImage Deproject(const DepthImage& depth,
                     const CameraIntrinsics& intrinsics,
                     const RigidTransform& pose) {
  intrinsics.Validate();
  if (depth.height() != intrinsics.height || depth.width() != intrinsics.width) {
    Fail(ErrorCode::kInvalidInput, "depth image does not match intrinsics");
  }
  PointImage out{Plane<Vec3>(depth.height(), depth.width()),
                 BinaryMask(depth.height(), depth.width(), 0)};
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      if (auto p = DeprojectPixel(u, v, depth.at(v, u), intrinsics, pose)) {
        out.points.at(v, u) = *p;
        out.valid.at(v, u) = 1;
      }
    }
  }
  return out;
}

}  // namespace plantwi
