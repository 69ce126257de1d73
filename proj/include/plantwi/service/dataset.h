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

// On-disk scene datasets. A dataset is a directory with one subdirectory per
// scene:
//
//   <id>/rgb.png           8-bit RGB
//   <id>/depth.png         16-bit depth in millimeters (0 = invalid)
//   <id>/labels.png        8-bit ground-truth class indices
//   <id>/labels_train.png  8-bit labels the model is trained on (optional)
//   <id>/meta.json         intrinsics, 4x4 row-major camera pose, generator
//                          seed and spec
//
// depth.png holds the exact rendered depth; noisy observations are produced
// from it with the noise model recorded in meta.json.

#ifndef PLANTWI_SERVICE_DATASET_H_
#define PLANTWI_SERVICE_DATASET_H_

#include <string>
#include <vector>

#include <json.hpp>

#include "plantwi/geometry/scene.h"

namespace plantwi {

nlohmann::json SceneSpecToJson(const SceneSpec& spec);
// Missing keys keep their defaults. Throws InvalidInput on wrong types.
SceneSpec SceneSpecFromJson(const nlohmann::json& json);

// Depth is rounded to whole millimeters.
void WriteSceneDir(const SyntheticScene& scene, const std::string& dir);
// Rebuilds a scene from its directory. clean_depth and depth both hold the
// stored depth; plant_withheld is derived from the two label maps; without
// labels_train.png the training labels equal the ground truth.
SyntheticScene ReadSceneDir(const std::string& dir);

// Sorted names of the scene subdirectories (those holding meta.json).
std::vector<std::string> ListScenes(const std::string& root);

struct NamedScene {
  std::string id;
  SyntheticScene scene;
};
std::vector<NamedScene> LoadDataset(const std::string& root);

// Generates `count` scenes with seeds seed, seed + 1, ... and writes them as
// scene_0000, scene_0001, ... Returns the scene ids.
std::vector<std::string> GenerateDataset(const std::string& root, int count,
                                         uint64_t seed,
                                         const SceneSpec& spec = {});

}  // namespace plantwi

#endif  // PLANTWI_SERVICE_DATASET_H_
