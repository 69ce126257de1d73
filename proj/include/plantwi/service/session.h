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

// Interactive refinement session behind the HTTP API.
//
// The session owns the current model, the pristine model it started from and
// per-scene interaction state (voxel grid, strokes, five-frame depth buffer).
// Strokes mark the touch sphere around the 3D point under each image point;
// the interaction mask M' is the OR of the five frame masks. Imprinting pools
// the training masks of all stroked scenes and appends a new class.
//
// Readers (scene listing, segmentation, metrics) take a shared lock and work
// on an immutable model snapshot; strokes, imprinting and reset are
// serialized. No request path computes gradients.

#ifndef PLANTWI_SERVICE_SESSION_H_
#define PLANTWI_SERVICE_SESSION_H_

#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <vector>

#include "plantwi/eval/metrics.h"
#include "plantwi/geometry/masks.h"
#include "plantwi/geometry/scene.h"
#include "plantwi/imprinting/pooling.h"
#include "plantwi/model/trainer.h"
#include "plantwi/service/dataset.h"

namespace plantwi {

struct SessionOptions {
  TrainingMaskRule mask_rule = TrainingMaskRule::kFalseNegative;
  double touch_radius = kTouchRadius;
};

struct ImagePoint {
  double x = 0.0;  // column
  double y = 0.0;  // row
};

struct StrokeResult {
  BinaryMask interaction_mask;  // M' of the stroked scene
  uint64_t pixel_count = 0;
  int marked_voxels = 0;        // newly marked by this stroke
  std::vector<int> skipped;     // indices of points with invalid depth
};

struct ImprintResult {
  MetricsReport before;  // pristine model
  MetricsReport after;   // model after imprinting
  double elapsed_ms = 0.0;
  int support_images = 0;
  uint64_t training_pixels = 0;
  std::string class_name;
};

struct Segmentation {
  LabelMap labels;  // raw predictions, imprinted classes included
  std::vector<std::string> class_names;
  std::vector<int32_t> folding;
};

class Session {
 public:
  // Throws InvalidInput when there are no scenes or no test scenes.
  Session(Model pristine, std::vector<NamedScene> scenes,
          std::vector<SyntheticScene> test_scenes, SessionOptions options = {});

  const std::string& id() const { return id_; }
  std::vector<std::string> SceneIds() const;
  // Throws InvalidInput for an unknown id.
  const SyntheticScene& scene(const std::string& id) const;

  Segmentation Segment(const std::string& scene_id) const;
  MetricsReport CurrentMetrics() const;
  const MetricsReport& PristineMetrics() const { return pristine_metrics_; }
  std::shared_ptr<const Model> model() const;
  std::string active_scene() const;

  // Throws InvalidInput for an unknown scene or a point outside the image.
  StrokeResult ApplyStroke(const std::string& scene_id,
                           const std::vector<ImagePoint>& points);
  // Throws EmptyMask when no stroked scene yields training pixels.
  ImprintResult Imprint(PoolingMethod method);
  void Reset();

 private:
  struct SceneState {
    VoxelGrid grid;
    std::vector<BinaryMask> frames;  // one per buffered depth frame
    std::vector<DepthImage> depths;
    std::vector<std::vector<ImagePoint>> strokes;
    BinaryMask interaction;
  };

  size_t SceneIndex(const std::string& id) const;
  SceneState& StateFor(size_t index);

  std::string id_ = "default";
  SessionOptions options_;
  Model pristine_;
  std::vector<NamedScene> scenes_;
  std::vector<SyntheticScene> test_scenes_;
  MetricsReport pristine_metrics_;

  mutable std::shared_mutex mutex_;
  std::shared_ptr<const Model> current_;
  std::map<size_t, SceneState> states_;
  std::string active_scene_;
};

}  // namespace plantwi

#endif  // PLANTWI_SERVICE_SESSION_H_
