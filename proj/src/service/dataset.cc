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

#include "plantwi/service/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "plantwi/error.h"
#include "plantwi/service/png_io.h"

namespace plantwi {
namespace fs = std::filesystem;
namespace {

LabelMap PlaneToLabels(const Plane<uint8_t>& plane) {
  LabelMap out(plane.height(), plane.width());
  for (size_t i = 0; i < plane.size(); ++i) out[i] = plane[i];
  return out;
}

}  // namespace

nlohmann::json SceneSpecToJson(const SceneSpec& spec) {
  return {
      {"width", spec.width},
      {"height", spec.height},
      {"horizontal_fov", spec.horizontal_fov},
      {"grid_origin", {spec.grid_origin.x, spec.grid_origin.y, spec.grid_origin.z}},
      {"grid_dims", spec.grid_dims},
      {"voxel_size", spec.voxel_size},
      {"row_offset", spec.row_offset},
      {"row_length", spec.row_length},
      {"shoot_probability", spec.shoot_probability},
      {"withheld_fraction", spec.withheld_fraction},
      {"noise",
       {{"depth_sigma", spec.noise.depth_sigma},
        {"registration_jitter", spec.noise.registration_jitter},
        {"dropout", spec.noise.dropout}}},
  };
}

SceneSpec SceneSpecFromJson(const nlohmann::json& json) {
  SceneSpec spec;
  try {
    spec.width = json.value("width", spec.width);
    spec.height = json.value("height", spec.height);
    spec.horizontal_fov = json.value("horizontal_fov", spec.horizontal_fov);
    if (json.contains("grid_origin")) {
      const auto o = json.at("grid_origin").get<std::array<double, 3>>();
      spec.grid_origin = {o[0], o[1], o[2]};
    }
    spec.grid_dims = json.value("grid_dims", spec.grid_dims);
    spec.voxel_size = json.value("voxel_size", spec.voxel_size);
    spec.row_offset = json.value("row_offset", spec.row_offset);
    spec.row_length = json.value("row_length", spec.row_length);
    spec.shoot_probability = json.value("shoot_probability", spec.shoot_probability);
    spec.withheld_fraction = json.value("withheld_fraction", spec.withheld_fraction);
    if (json.contains("noise")) {
      const auto& n = json.at("noise");
      spec.noise.depth_sigma = n.value("depth_sigma", spec.noise.depth_sigma);
      spec.noise.registration_jitter =
          n.value("registration_jitter", spec.noise.registration_jitter);
      spec.noise.dropout = n.value("dropout", spec.noise.dropout);
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kInvalidInput, std::string("scene spec: ") + e.what());
  }
  return spec;
}

void WriteSceneDir(const SyntheticScene& scene, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorCode::kIoError, "cannot create " + dir + ": " + ec.message());

  Plane<uint16_t> depth_mm(scene.clean_depth.height(), scene.clean_depth.width());
  for (size_t i = 0; i < depth_mm.size(); ++i) {
    const double mm = std::round(scene.clean_depth[i] * 1000.0);
    depth_mm[i] = static_cast<uint16_t>(std::clamp(mm, 0.0, 65535.0));
  }
  WriteFileBytes(dir + "/rgb.png", EncodeRgbPng(scene.rgb));
  WriteFileBytes(dir + "/depth.png", EncodeGray16Png(depth_mm));
  WriteFileBytes(dir + "/labels.png", EncodeGray8Png(LabelIndices(scene.gt_labels)));
  WriteFileBytes(dir + "/labels_train.png",
                 EncodeGray8Png(LabelIndices(scene.train_labels)));

  const auto& in = scene.intrinsics;
  nlohmann::json meta = {
      {"intrinsics",
       {{"fx", in.fx}, {"fy", in.fy}, {"cx", in.cx}, {"cy", in.cy},
        {"width", in.width}, {"height", in.height}}},
      {"camera_pose", scene.camera_pose.ToMatrix()},
      {"seed", scene.seed},
      {"spec", SceneSpecToJson(scene.spec)},
  };
  WriteFileBytes(dir + "/meta.json", meta.dump(2) + "\n");
}

SyntheticScene ReadSceneDir(const std::string& dir) {
  SyntheticScene scene;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ReadFileBytes(dir + "/meta.json"));
    const auto& in = meta.at("intrinsics");
    scene.intrinsics = {in.at("fx").get<double>(), in.at("fy").get<double>(),
                        in.at("cx").get<double>(), in.at("cy").get<double>(),
                        in.at("width").get<int>(), in.at("height").get<int>()};
    scene.camera_pose = RigidTransform::FromMatrix(
        meta.at("camera_pose").get<std::array<double, 16>>());
    scene.seed = meta.value("seed", uint64_t{0});
    if (meta.contains("spec")) scene.spec = SceneSpecFromJson(meta.at("spec"));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kIoError, dir + "/meta.json: " + e.what());
  }
  scene.intrinsics.Validate();

  scene.rgb = DecodeRgbPng(ReadFileBytes(dir + "/rgb.png"));
  const Plane<uint16_t> depth_mm = DecodeGray16Png(ReadFileBytes(dir + "/depth.png"));
  scene.clean_depth = DepthImage(depth_mm.height(), depth_mm.width());
  for (size_t i = 0; i < depth_mm.size(); ++i) {
    scene.clean_depth[i] = depth_mm[i] / 1000.0;
  }
  scene.depth = scene.clean_depth;
  scene.gt_labels = PlaneToLabels(DecodeGray8Png(ReadFileBytes(dir + "/labels.png")));
  if (fs::exists(dir + "/labels_train.png")) {
    scene.train_labels =
        PlaneToLabels(DecodeGray8Png(ReadFileBytes(dir + "/labels_train.png")));
  } else {
    scene.train_labels = scene.gt_labels;
  }

  const int h = scene.rgb.height();
  const int w = scene.rgb.width();
  if (scene.clean_depth.height() != h || scene.clean_depth.width() != w ||
      scene.gt_labels.height() != h || scene.gt_labels.width() != w ||
      !scene.gt_labels.same_shape(scene.train_labels) ||
      scene.intrinsics.width != w || scene.intrinsics.height != h) {
    Fail(ErrorCode::kIoError, dir + ": image sizes disagree");
  }
  scene.plant_withheld = BinaryMask(h, w, 0);
  for (size_t i = 0; i < scene.gt_labels.size(); ++i) {
    scene.plant_withheld[i] =
        scene.gt_labels[i] == kPlantClass && scene.train_labels[i] != kPlantClass;
  }
  return scene;
}

std::vector<std::string> ListScenes(const std::string& root) {
  std::error_code ec;
  fs::directory_iterator it(root, ec);
  if (ec) Fail(ErrorCode::kIoError, "cannot list " + root + ": " + ec.message());
  std::vector<std::string> ids;
  for (const auto& entry : it) {
    if (entry.is_directory() && fs::exists(entry.path() / "meta.json")) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<NamedScene> LoadDataset(const std::string& root) {
  std::vector<NamedScene> scenes;
  for (const std::string& id : ListScenes(root)) {
    scenes.push_back({id, ReadSceneDir(root + "/" + id)});
  }
  return scenes;
}

std::vector<std::string> GenerateDataset(const std::string& root, int count,
                                         uint64_t seed, const SceneSpec& spec) {
  if (count <= 0) Fail(ErrorCode::kInvalidInput, "scene count must be positive");
  std::vector<std::string> ids;
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "scene_%04d", i);
    WriteSceneDir(GenerateScene(seed + i, spec), root + "/" + name);
    ids.emplace_back(name);
  }
  return ids;
}

}  // namespace plantwi
