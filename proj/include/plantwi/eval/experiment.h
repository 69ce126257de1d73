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

// End-to-end refinement experiment at desk scale.
//
//   1. generate training, support and test scenes; hold out a fixed 20% of
//      the training scenes as validation for the distillation baseline
//   2. pretrain on the under-labeled training scenes
//   3. simulate touches on the support scenes and build interaction masks M'
//      and training masks M
//   4. refine with each method and evaluate on the test scenes, folding
//      imprinted classes into their parent class
//
// Method rows: Before, MD (distillation fine-tuning on M'), WI-MAP and
// WI-RAP (imprinting from M).

#ifndef PLANTWI_EVAL_EXPERIMENT_H_
#define PLANTWI_EVAL_EXPERIMENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "plantwi/eval/distill.h"
#include "plantwi/eval/metrics.h"
#include "plantwi/geometry/masks.h"
#include "plantwi/geometry/scene.h"
#include "plantwi/geometry/touch.h"
#include "plantwi/model/trainer.h"

namespace plantwi {

struct ExperimentConfig {
  uint64_t seed = 1;
  int train_scenes = 20;
  int support_count = 5;
  int test_count = 15;
  double validation_fraction = 0.2;
  double margin = kDefaultMargin;
  // Cosine scale used for pretraining. Imprinting needs features that sit
  // close to their class weights, which a moderate scale enforces.
  double scale = 4.0;
  int epochs = 200;
  int strokes = 6;
  TrainingMaskRule mask_rule = TrainingMaskRule::kFalseNegative;
  bool run_distillation = true;
  SceneSpec spec;
  TouchOptions touch;
  DistillConfig distill;
  // When non-empty, prediction PNGs for every method are written here.
  std::string out_dir;
  int images_to_write = 3;
};

struct MethodRow {
  std::string name;
  MetricsReport metrics;
  double seconds = 0.0;           // refinement wall time
  uint64_t backward_passes = 0;   // during refinement
};

struct MaskStats {
  uint64_t interaction_pixels = 0;
  uint64_t interaction_non_plant = 0;
  uint64_t training_pixels = 0;
  uint64_t training_non_plant = 0;
};

struct ExperimentReport {
  ExperimentConfig config;
  double pretrain_seconds = 0.0;
  double final_train_loss = 0.0;
  double train_miou = 0.0;
  MaskStats masks;
  int distill_best_epoch = 0;
  std::vector<MethodRow> rows;  // Before, [MD,] WI-MAP, WI-RAP

  const MethodRow& row(const std::string& name) const;
};

// Scene seeds used by the experiment for a given base seed.
uint64_t TrainSceneSeed(uint64_t seed, int index);
uint64_t SupportSceneSeed(uint64_t seed, int index);
uint64_t TestSceneSeed(uint64_t seed, int index);

// Failures are rethrown with the stage name prepended, keeping the code.
ExperimentReport RunExperiment(const ExperimentConfig& config);

struct SweepReport {
  std::vector<double> margins;
  std::vector<std::string> methods;        // Before, WI-MAP, WI-RAP
  std::vector<std::vector<double>> miou;   // [method][margin]
};

std::vector<double> DefaultSweepMargins();

// Re-runs the experiment (without distillation) for every margin.
SweepReport MarginSweep(const std::vector<double>& margins,
                        const ExperimentConfig& config);

ConfusionMatrix EvaluateModel(const Model& model,
                              const std::vector<SyntheticScene>& scenes,
                              int eval_classes = kBaseClassCount);

nlohmann::json MetricsToJson(const MetricsReport& report);
nlohmann::json ReportToJson(const ExperimentReport& report);
nlohmann::json SweepToJson(const SweepReport& report);

// Aligned plain-text tables: per-class IoU with mIoU, then recall /
// precision per class, then refinement cost.
std::string FormatReport(const ExperimentReport& report);
std::string FormatSweep(const SweepReport& report);
// One line per class: IoU, recall and precision, then the mean IoU.
std::string FormatMetrics(const MetricsReport& report);

}  // namespace plantwi

#endif  // PLANTWI_EVAL_EXPERIMENT_H_
