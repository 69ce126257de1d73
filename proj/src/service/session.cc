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

#include "plantwi/service/session.h"

#include <chrono>
#include <cmath>
#include <mutex>

#include "plantwi/error.h"
#include "plantwi/eval/experiment.h"

namespace plantwi {
namespace {

MetricsReport Evaluate(const Model& model,
                       const std::vector<SyntheticScene>& scenes) {
  return ComputeMetrics(EvaluateModel(model, scenes), BaseClassNames());
}

}  // namespace

Session::Session(Model pristine, std::vector<NamedScene> scenes,
                 std::vector<SyntheticScene> test_scenes,
                 SessionOptions options)
    : options_(options),
      pristine_(std::move(pristine)),
      scenes_(std::move(scenes)),
      test_scenes_(std::move(test_scenes)) {
  if (scenes_.empty()) Fail(ErrorCode::kInvalidInput, "session has no scenes");
  if (test_scenes_.empty()) {
    Fail(ErrorCode::kInvalidInput, "session has no test scenes");
  }
  pristine_.head.Validate();
  pristine_metrics_ = Evaluate(pristine_, test_scenes_);
  current_ = std::make_shared<const Model>(pristine_);
}

std::vector<std::string> Session::SceneIds() const {
  std::vector<std::string> ids;
  for (const NamedScene& s : scenes_) ids.push_back(s.id);
  return ids;
}

size_t Session::SceneIndex(const std::string& id) const {
  for (size_t i = 0; i < scenes_.size(); ++i) {
    if (scenes_[i].id == id) return i;
  }
  Fail(ErrorCode::kInvalidInput, "unknown scene '" + id + "'");
}

const SyntheticScene& Session::scene(const std::string& id) const {
  return scenes_[SceneIndex(id)].scene;
}

std::shared_ptr<const Model> Session::model() const {
  std::shared_lock lock(mutex_);
  return current_;
}

std::string Session::active_scene() const {
  std::shared_lock lock(mutex_);
  return active_scene_;
}

Segmentation Session::Segment(const std::string& scene_id) const {
  const SyntheticScene& s = scene(scene_id);
  const std::shared_ptr<const Model> snapshot = model();
  return {snapshot->Predict(s.rgb), snapshot->head.class_names,
          snapshot->head.FoldingMap()};
}

MetricsReport Session::CurrentMetrics() const {
  return Evaluate(*model(), test_scenes_);
}

Session::SceneState& Session::StateFor(size_t index) {
  auto it = states_.find(index);
  if (it != states_.end()) return it->second;
  const SyntheticScene& s = scenes_[index].scene;
  SceneState state;
  state.grid = s.spec.MakeGrid();
  state.interaction = BinaryMask(s.rgb.height(), s.rgb.width(), 0);
  for (int k = 0; k < kTemporalFrames; ++k) {
    state.depths.push_back(
        RenderDepthFrame(s.clean_depth, s.spec.noise, s.seed * 31 + 1000 + k));
    state.frames.emplace_back(s.rgb.height(), s.rgb.width(), 0);
  }
  return states_.emplace(index, std::move(state)).first->second;
}

StrokeResult Session::ApplyStroke(const std::string& scene_id,
                                  const std::vector<ImagePoint>& points) {
  const size_t index = SceneIndex(scene_id);
  const SyntheticScene& s = scenes_[index].scene;
  for (const ImagePoint& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || p.x < 0 || p.y < 0 ||
        p.x >= s.rgb.width() || p.y >= s.rgb.height()) {
      Fail(ErrorCode::kInvalidInput, "stroke point outside the image");
    }
  }
  std::unique_lock lock(mutex_);
  active_scene_ = scene_id;
  SceneState& state = StateFor(index);
  StrokeResult result;
  for (size_t i = 0; i < points.size(); ++i) {
    const int u = static_cast<int>(points[i].x);
    const int v = static_cast<int>(points[i].y);
    const auto world = DeprojectPixel(u, v, s.clean_depth.at(v, u),
                                      s.intrinsics, s.camera_pose);
    if (!world) {
      result.skipped.push_back(static_cast<int>(i));
      continue;
    }
    result.marked_voxels += static_cast<int>(
        state.grid.MarkSphere(*world, options_.touch_radius));
  }
  if (!points.empty()) {
    state.strokes.push_back(points);
    for (int k = 0; k < kTemporalFrames; ++k) {
      state.frames[k] = FrameInteractionMask(state.depths[k], s.intrinsics,
                                             s.camera_pose, state.grid);
    }
    state.interaction = TemporalOr(state.frames);
  }
  result.interaction_mask = state.interaction;
  result.pixel_count = CountSet(state.interaction);
  return result;
}

ImprintResult Session::Imprint(PoolingMethod method) {
  std::unique_lock lock(mutex_);
  const auto start = std::chrono::steady_clock::now();
  const Model& model = *current_;
  const std::vector<int32_t> folding = model.head.FoldingMap();
  SupportSet support;
  ImprintResult result;
  for (const auto& [index, state] : states_) {
    if (CountSet(state.interaction) == 0) continue;
    const SyntheticScene& s = scenes_[index].scene;
    LabelMap pred = model.Predict(s.rgb);
    for (int32_t& label : pred.data()) label = folding[label];
    BinaryMask training = BuildTrainingMask(state.interaction, pred,
                                            kPlantClass, options_.mask_rule);
    const uint64_t count = CountSet(training);
    if (count == 0) continue;
    result.training_pixels += count;
    support.push_back({s.rgb, std::move(training)});
  }
  if (support.empty()) {
    Fail(ErrorCode::kEmptyMask,
         "no training pixels: the strokes fell only on regions the training "
         "mask rule discards; stroke plant regions the model gets wrong");
  }
  const PooledPrototype proto = PoolSupport(support, model.extractor, method);
  auto refined = std::make_shared<Model>(model);
  refined->head = plantwi::Imprint(model.head, proto, kPlantClass);
  result.support_images = static_cast<int>(support.size());
  result.class_name = refined->head.class_names.back();
  current_ = refined;
  result.elapsed_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  result.before = pristine_metrics_;
  result.after = Evaluate(*refined, test_scenes_);
  return result;
}

void Session::Reset() {
  std::unique_lock lock(mutex_);
  current_ = std::make_shared<const Model>(pristine_);
  states_.clear();
  active_scene_.clear();
}

}  // namespace plantwi
