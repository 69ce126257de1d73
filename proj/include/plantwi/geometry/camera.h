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

#ifndef PLANTWI_GEOMETRY_CAMERA_H_
#define PLANTWI_GEOMETRY_CAMERA_H_

#include <array>
#include <cmath>
#include <optional>

#include "plantwi/image.h"

namespace plantwi {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

// world_point = rotation * camera_point + translation (rotation row-major).
struct RigidTransform {
  std::array<double, 9> rotation = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  Vec3 translation;

  static RigidTransform Identity() { return {}; }
  // 4x4 homogeneous matrix, row-major.
  static RigidTransform FromMatrix(const std::array<double, 16>& m);
  std::array<double, 16> ToMatrix() const;

  Vec3 Apply(const Vec3& p) const;
  Vec3 Rotate(const Vec3& v) const;
  RigidTransform Inverse() const;

  friend bool operator==(const RigidTransform&,
                         const RigidTransform&) = default;
};

// Pinhole intrinsics in pixels. Pixel (u, v) is column u, row v.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  // Throws InvalidInput unless fx, fy > 0, 0 <= cx < width, 0 <= cy < height.
  void Validate() const;

  friend bool operator==(const CameraIntrinsics&,
                         const CameraIntrinsics&) = default;
};

// World-frame point of pixel (u, v) at depth z; nullopt for invalid depth.
std::optional<Vec3> DeprojectPixel(double u, double v, double depth,
                                   const CameraIntrinsics& intrinsics,
                                   const RigidTransform& pose);

struct PointImage {
  Plane<Vec3> points;
  BinaryMask valid;
};

// Back-projects every pixel with a finite positive depth. Pixels with depth 0
// (or non-finite depth) are marked invalid and carry no point.
PointImage Deproject(const DepthImage& depth,
                     const CameraIntrinsics& intrinsics,
                     const RigidTransform& pose);

}  // namespace plantwi

#endif  // PLANTWI_GEOMETRY_CAMERA_H_
