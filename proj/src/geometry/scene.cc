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

#include "plantwi/geometry/scene.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <tuple>

#include "plantwi/error.h"

namespace plantwi {
namespace {

// World frame: X right, Y up, Z along the aisle. Ground is Y = 0.

struct Material {
  std::array<double, 3> color;
  double texture_amplitude;
  double texture_scale;  // meters per lattice cell
  int32_t label;
};

enum class Shape { kEllipsoid, kBox, kGround };

struct Primitive {
  Shape shape;
  Vec3 a;  // ellipsoid center / box min
  Vec3 b;  // ellipsoid radii / box max
  Material material;
  bool withheld = false;
};

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  const Primitive* primitive = nullptr;
  Vec3 normal;
};

uint64_t SplitMix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double LatticeValue(int64_t i, int64_t j, int64_t k, uint64_t salt) {
  uint64_t h = SplitMix(static_cast<uint64_t>(i) * 73856093ULL ^
                        static_cast<uint64_t>(j) * 19349663ULL ^
                        static_cast<uint64_t>(k) * 83492791ULL ^ salt);
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

// Trilinear value noise in [-1, 1].
double ValueNoise(const Vec3& p, double scale, uint64_t salt) {
  const double x = p.x / scale, y = p.y / scale, z = p.z / scale;
  const double fx = std::floor(x), fy = std::floor(y), fz = std::floor(z);
  const int64_t i = static_cast<int64_t>(fx), j = static_cast<int64_t>(fy),
                k = static_cast<int64_t>(fz);
  const double tx = x - fx, ty = y - fy, tz = z - fz;
  double acc = 0.0;
  for (int di = 0; di < 2; ++di) {
    for (int dj = 0; dj < 2; ++dj) {
      for (int dk = 0; dk < 2; ++dk) {
        const double w = (di ? tx : 1 - tx) * (dj ? ty : 1 - ty) *
                         (dk ? tz : 1 - tz);
        acc += w * LatticeValue(i + di, j + dj, k + dk, salt);
      }
    }
  }
  return acc;
}

void IntersectEllipsoid(const Primitive& prim, const Vec3& o, const Vec3& d,
                        Hit& hit) {
  const Vec3& c = prim.a;
  const Vec3& r = prim.b;
  const Vec3 oc{(o.x - c.x) / r.x, (o.y - c.y) / r.y, (o.z - c.z) / r.z};
  const Vec3 ds{d.x / r.x, d.y / r.y, d.z / r.z};
  const double qa = ds.dot(ds);
  const double qb = 2.0 * oc.dot(ds);
  const double qc = oc.dot(oc) - 1.0;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return;
  const double t = (-qb - std::sqrt(disc)) / (2.0 * qa);
  if (t <= 1e-6 || t >= hit.t) return;
  const Vec3 p = o + d * t;
  Vec3 n{(p.x - c.x) / (r.x * r.x), (p.y - c.y) / (r.y * r.y),
         (p.z - c.z) / (r.z * r.z)};
  hit = {t, &prim, n * (1.0 / n.norm())};
}

void IntersectBox(const Primitive& prim, const Vec3& o, const Vec3& d,
                  Hit& hit) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int axis = 0;
  double sign = 1.0;
  const double lo[3] = {prim.a.x, prim.a.y, prim.a.z};
  const double hi[3] = {prim.b.x, prim.b.y, prim.b.z};
  const double oo[3] = {o.x, o.y, o.z};
  const double dd[3] = {d.x, d.y, d.z};
  for (int k = 0; k < 3; ++k) {
    if (std::abs(dd[k]) < 1e-12) {
      if (oo[k] < lo[k] || oo[k] > hi[k]) return;
      continue;
    }
    double t0 = (lo[k] - oo[k]) / dd[k];
    double t1 = (hi[k] - oo[k]) / dd[k];
    double s = -1.0;
    if (t0 > t1) {
      std::swap(t0, t1);
      s = 1.0;
    }
    if (t0 > t_near) {
      t_near = t0;
      axis = k;
      sign = s;
    }
    t_far = std::min(t_far, t1);
  }
  if (t_near > t_far || t_near <= 1e-6 || t_near >= hit.t) return;
  Vec3 n;
  (axis == 0 ? n.x : axis == 1 ? n.y : n.z) = sign;
  hit = {t_near, &prim, n};
}

void IntersectGround(const Primitive& prim, const Vec3& o, const Vec3& d,
                     Hit& hit) {
  if (d.y >= -1e-12) return;
  const double t = -o.y / d.y;
  if (t <= 1e-6 || t >= hit.t) return;
  hit = {t, &prim, {0.0, 1.0, 0.0}};
}

class SceneBuilder {
 public:
  SceneBuilder(const SceneSpec& spec, std::mt19937_64& rng)
      : spec_(spec), rng_(rng) {}

  double Uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  bool Chance(double p) { return Uniform(0.0, 1.0) < p; }

  std::vector<Primitive> Build() {
    std::vector<Primitive> prims;
    prims.push_back({Shape::kGround, {}, {},
                     {{Uniform(110, 135), Uniform(88, 100), Uniform(62, 75)},
                      22.0, 0.04, kGroundClass}});
    AddStructure(prims);
    for (double side : {-1.0, 1.0}) AddRow(prims, side);
    return prims;
  }

 private:
  Material Artificial(std::array<double, 3> color, double amplitude = 4.0) {
    return {color, amplitude, 0.2, kArtificialClass};
  }

  void AddStructure(std::vector<Primitive>& prims) {
    // Greenhouse walls.
    const Material wall = Artificial({Uniform(185, 210), Uniform(185, 205),
                                      Uniform(175, 195)});
    prims.push_back({Shape::kBox, {-5.0, 0.0, 7.0}, {5.0, 10.0, 7.2}, wall});
    prims.push_back({Shape::kBox, {-3.7, 0.0, -1.0}, {-3.5, 10.0, 7.2}, wall});
    prims.push_back({Shape::kBox, {3.5, 0.0, -1.0}, {3.7, 10.0, 7.2}, wall});
    // Crates left in the aisle.
    const int crates = static_cast<int>(Uniform(0.0, 2.99));
    for (int i = 0; i < crates; ++i) {
      const double size = Uniform(0.25, 0.45);
      const double x = Uniform(-0.3, 0.3 - size);
      const double z = Uniform(2.5, 5.5);
      const std::array<std::array<double, 3>, 3> palette = {
          {{60, 90, 170}, {210, 120, 50}, {225, 225, 220}}};
      prims.push_back({Shape::kBox, {x, 0.0, z}, {x + size, size, z + size},
                       Artificial(palette[static_cast<size_t>(Uniform(0, 2.99))])});
    }
  }

  void AddRow(std::vector<Primitive>& prims, double side) {
    const double row_x = side * (spec_.row_offset + Uniform(-0.05, 0.05));
    const Material metal = Artificial({Uniform(140, 160), Uniform(140, 160),
                                       Uniform(145, 170)});
    // Support posts and a drip pipe behind the row.
    const double post_x = row_x + side * 0.38;
    for (double z = 0.8; z < spec_.row_length; z += Uniform(1.6, 2.2)) {
      prims.push_back({Shape::kBox, {post_x - 0.04, 0.0, z},
                       {post_x + 0.04, 1.3, z + 0.08}, metal});
    }
    prims.push_back({Shape::kBox, {post_x - 0.03, 0.0, 0.3},
                     {post_x + 0.03, 0.06, spec_.row_length},
                     Artificial({70, 70, 75}, 2.0)});

    for (double z = 0.6; z < spec_.row_length; z += Uniform(0.3, 0.45)) {
      const Vec3 radii{Uniform(0.14, 0.22), Uniform(0.18, 0.30),
                       Uniform(0.14, 0.22)};
      const Vec3 center{row_x + Uniform(-0.05, 0.05),
                        radii.y + Uniform(0.10, 0.18), z};
      const Material leaf{{Uniform(40, 70), Uniform(105, 140), Uniform(30, 55)},
                          38.0, 0.025, kPlantClass};
      prims.push_back({Shape::kEllipsoid, center, radii, leaf});
      Material stem = leaf;
      stem.color = {leaf.color[0] * 0.8, leaf.color[1] * 0.75,
                    leaf.color[2] * 0.8};
      stem.texture_amplitude = 10.0;
      prims.push_back({Shape::kBox, {center.x - 0.015, 0.0, z - 0.015},
                       {center.x + 0.015, center.y, z + 0.015}, stem});

      if (!Chance(spec_.shoot_probability)) continue;
      // Shoot growing into the aisle.
      const Vec3 shoot_radii{Uniform(0.06, 0.10), Uniform(0.05, 0.08),
                             Uniform(0.08, 0.12)};
      const Vec3 shoot_center{
          center.x - side * (radii.x + Uniform(0.0, 0.06)),
          center.y + Uniform(-0.08, 0.10), z + Uniform(-0.08, 0.08)};
      const double tint = Uniform(0.0, 1.0);
      const Material shoot{{100 + 70 * tint, 165 + 10 * tint, 70 - 10 * tint},
                           26.0, 0.03, kPlantClass};
      prims.push_back({Shape::kEllipsoid, shoot_center, shoot_radii, shoot,
                       Chance(spec_.withheld_fraction)});
    }
  }

  const SceneSpec& spec_;
  std::mt19937_64& rng_;
};

RigidTransform CameraPose(double x, double height, double pitch, double yaw) {
  // Columns are the camera axes (x right, y down, z forward) in world
  // coordinates for a camera pitched down by `pitch` and yawed about +Y.
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  const double cy = std::cos(yaw), sy = std::sin(yaw);
  auto yawed = [&](Vec3 v) {
    return Vec3{v.x * cy + v.z * sy, v.y, -v.x * sy + v.z * cy};
  };
  const Vec3 ax = yawed({1.0, 0.0, 0.0});
  const Vec3 ay = yawed({0.0, -cp, -sp});
  const Vec3 az = yawed({0.0, -sp, cp});
  RigidTransform pose;
  pose.rotation = {ax.x, ay.x, az.x, ax.y, ay.y, az.y, ax.z, ay.z, az.z};
  pose.translation = {x, height, 0.0};
  return pose;
}

}  // namespace

const std::vector<std::string>& BaseClassNames() {
  static const std::vector<std::string> names = {"plant", "artificial",
                                                 "ground"};
  return names;
}

void SceneSpec::Validate() const {
  if (width < 8 || height < 8) {
    Fail(ErrorCode::kInvalidInput, "scene must be at least 8x8 pixels");
  }
  if (!(horizontal_fov > 0.1 && horizontal_fov < 3.0)) {
    Fail(ErrorCode::kInvalidInput, "horizontal field of view out of range");
  }
  if (!(voxel_size > 0.0) || grid_dims[0] <= 0 || grid_dims[1] <= 0 ||
      grid_dims[2] <= 0) {
    Fail(ErrorCode::kInvalidInput, "degenerate voxel grid");
  }
  if (!(row_offset > 0.3) || !(row_length > 1.0)) {
    Fail(ErrorCode::kInvalidInput, "plant rows need offset > 0.3, length > 1");
  }
  if (!(shoot_probability >= 0.0 && shoot_probability <= 1.0) ||
      !(withheld_fraction >= 0.0 && withheld_fraction <= 1.0)) {
    Fail(ErrorCode::kInvalidInput, "probabilities must lie in [0, 1]");
  }
  if (!(noise.depth_sigma >= 0.0) || noise.registration_jitter < 0 ||
      !(noise.dropout >= 0.0 && noise.dropout < 1.0)) {
    Fail(ErrorCode::kInvalidInput, "invalid noise model");
  }
}

VoxelGrid SceneSpec::MakeGrid() const {
  return VoxelGrid(grid_origin, voxel_size, grid_dims);
}

DepthImage RenderDepthFrame(const DepthImage& clean_depth,
                            const NoiseModel& noise, uint64_t frame_seed) {
  if (noise.noise_free()) return clean_depth;
  std::mt19937_64 rng(frame_seed);
  const int j = noise.registration_jitter;
  std::uniform_int_distribution<int> shift(-j, j);
  const int du = shift(rng);
  const int dv = shift(rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int height = clean_depth.height();
  const int width = clean_depth.width();
  DepthImage out(height, width, 0.0);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const int sv = std::clamp(v + dv, 0, height - 1);
      const int su = std::clamp(u + du, 0, width - 1);
      const double z = clean_depth.at(sv, su);
      const double n = gauss(rng);
      const bool drop = unit(rng) < noise.dropout;
      if (z <= 0.0 || drop) continue;
      out.at(v, u) = std::max(1e-3, z + noise.depth_sigma * n);
    }
  }
  return out;
}

SyntheticScene GenerateScene(uint64_t seed, const SceneSpec& spec) {
  spec.Validate();
  std::mt19937_64 rng(SplitMix(seed ^ 0x5ce9e5eedULL));
  SyntheticScene scene;
  scene.seed = seed;
  scene.spec = spec;

  const int width = spec.width;
  const int height = spec.height;
  const double f = (width / 2.0) / std::tan(spec.horizontal_fov / 2.0);
  scene.intrinsics = {f, f, (width - 1) / 2.0, (height - 1) / 2.0, width,
                      height};

  SceneBuilder builder(spec, rng);
  const std::vector<Primitive> prims = builder.Build();
  scene.camera_pose =
      CameraPose(builder.Uniform(-0.12, 0.12), builder.Uniform(0.9, 1.1),
                 builder.Uniform(0.38, 0.52), builder.Uniform(-0.12, 0.12));
  const uint64_t texture_salt = rng();
  const uint64_t sensor_seed = rng();
  const uint64_t frame_seed = rng();

  scene.rgb = RgbImage(height, width, 3);
  scene.clean_depth = DepthImage(height, width, 0.0);
  scene.gt_labels = LabelMap(height, width, kArtificialClass);
  scene.train_labels = LabelMap(height, width, kArtificialClass);
  scene.plant_withheld = BinaryMask(height, width, 0);

  const Vec3 light = Vec3{0.3, 1.0, -0.4} * (1.0 / Vec3{0.3, 1.0, -0.4}.norm());
  std::mt19937_64 sensor(sensor_seed);
  std::normal_distribution<double> sensor_noise(0.0, 2.5);
  const Vec3 origin = scene.camera_pose.translation;
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const Vec3 ray_camera{(u - scene.intrinsics.cx) / f,
                            (v - scene.intrinsics.cy) / f, 1.0};
      const Vec3 dir = scene.camera_pose.Rotate(ray_camera);
      Hit hit;
      for (const Primitive& prim : prims) {
        switch (prim.shape) {
          case Shape::kEllipsoid:
            IntersectEllipsoid(prim, origin, dir, hit);
            break;
          case Shape::kBox:
            IntersectBox(prim, origin, dir, hit);
            break;
          case Shape::kGround:
            IntersectGround(prim, origin, dir, hit);
            break;
        }
      }
      std::array<double, 3> color = {0, 0, 0};
      if (hit.primitive != nullptr) {
        // The ray's camera-frame z component is 1, so t is the depth.
        scene.clean_depth.at(v, u) = hit.t;
        const Material& m = hit.primitive->material;
        const Vec3 p = origin + dir * hit.t;
        const double shade = 0.55 + 0.45 * std::max(0.0, hit.normal.dot(light));
        const double tex =
            m.texture_amplitude *
            (0.7 * ValueNoise(p, m.texture_scale, texture_salt) +
             0.3 * ValueNoise(p, m.texture_scale * 0.4, texture_salt + 1));
        for (int c = 0; c < 3; ++c) color[c] = m.color[c] * shade + tex;
        scene.gt_labels.at(v, u) = m.label;
        scene.train_labels.at(v, u) =
            hit.primitive->withheld ? kArtificialClass : m.label;
        scene.plant_withheld.at(v, u) = hit.primitive->withheld ? 1 : 0;
      }
      for (int c = 0; c < 3; ++c) {
        scene.rgb.at(v, u, c) = static_cast<uint8_t>(
            std::clamp(std::lround(color[c] + sensor_noise(sensor)), 0L, 255L));
      }
    }
  }

  scene.depth = RenderDepthFrame(scene.clean_depth, spec.noise, frame_seed);

  const VoxelGrid grid = spec.MakeGrid();
  std::set<std::tuple<int, int, int>> plant;
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      if (scene.gt_labels.at(v, u) != kPlantClass) continue;
      const auto p = DeprojectPixel(u, v, scene.clean_depth.at(v, u),
                                    scene.intrinsics, scene.camera_pose);
      if (!p) continue;
      if (const auto index = grid.Locate(*p)) {
        plant.insert({index->z, index->y, index->x});
      }
    }
  }
  for (const auto& [z, y, x] : plant) scene.plant_voxels.push_back({x, y, z});
  return scene;
}

}  // namespace plantwi
