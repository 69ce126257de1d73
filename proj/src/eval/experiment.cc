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

#include "plantwi/eval/experiment.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "plantwi/error.h"
#include "plantwi/geometry/pipeline.h"
#include "plantwi/imprinting/pooling.h"
#include "plantwi/service/png_io.h"

namespace plantwi {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs fn, prefixing any library error with the stage name.
template <typename Fn>
auto Stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    std::string message = e.what();
    const std::string prefix = std::string(ErrorCodeName(e.code())) + ": ";
    if (message.rfind(prefix, 0) == 0) message.erase(0, prefix.size());
    throw Error(e.code(), std::string(name) + ": " + message);
  }
}

std::string OptionalCell(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * *v);
  return buf;
}

std::string Pad(const std::string& s, size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string PadLeft(const std::string& s, size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

void WritePredictions(const std::string& dir, const std::string& method,
                      const Model& model,
                      const std::vector<SyntheticScene>& scenes, int count) {
  const Palette palette = ClassPalette(model.head.class_count());
  for (int k = 0; k < count && k < static_cast<int>(scenes.size()); ++k) {
    const LabelMap pred = model.Predict(scenes[k].rgb);
    WriteFileBytes(dir + "/pred_" + method + "_" + std::to_string(k) + ".png",
                   EncodePalettePng(LabelIndices(pred), palette));
  }
}

}  // namespace

const MethodRow& ExperimentReport::row(const std::string& name) const {
  for (const MethodRow& r : rows) {
    if (r.name == name) return r;
  }
  Fail(ErrorCode::kInvalidInput, "report has no row " + name);
}

uint64_t TrainSceneSeed(uint64_t seed, int index) {
  return seed * 100000 + static_cast<uint64_t>(index);
}
uint64_t SupportSceneSeed(uint64_t seed, int index) {
  return seed * 100000 + 50000 + static_cast<uint64_t>(index);
}
uint64_t TestSceneSeed(uint64_t seed, int index) {
  return seed * 100000 + 80000 + static_cast<uint64_t>(index);
}

ConfusionMatrix EvaluateModel(const Model& model,
                              const std::vector<SyntheticScene>& scenes,
                              int eval_classes) {
  ConfusionMatrix confusion(eval_classes);
  const std::vector<int32_t> mapping = model.head.FoldingMap();
  for (const SyntheticScene& scene : scenes) {
    confusion.Merge(Confusion(model.Predict(scene.rgb), scene.gt_labels,
                              mapping, eval_classes));
  }
  return confusion;
}

ExperimentReport RunExperiment(const ExperimentConfig& config) {
  if (config.train_scenes < 2 || config.support_count < 1 ||
      config.test_count < 1 || config.strokes < 0 ||
      !(config.validation_fraction > 0.0 && config.validation_fraction < 1.0)) {
    Fail(ErrorCode::kInvalidInput, "invalid experiment configuration");
  }
  ExperimentReport report;
  report.config = config;
  const std::vector<std::string>& names = BaseClassNames();

  // 1. Scenes.
  std::vector<LabeledImage> train;
  std::vector<LabeledImage> validation;
  std::vector<SyntheticScene> support_scenes;
  std::vector<SyntheticScene> test_scenes;
  Stage("generate scenes", [&] {
    const int held_out = std::max(
        1, static_cast<int>(std::lround(config.train_scenes *
                                        config.validation_fraction)));
    for (int i = 0; i < config.train_scenes; ++i) {
      SyntheticScene s = GenerateScene(TrainSceneSeed(config.seed, i), config.spec);
      if (i < config.train_scenes - held_out) {
        train.push_back({std::move(s.rgb), std::move(s.train_labels)});
      } else {
        validation.push_back({std::move(s.rgb), std::move(s.gt_labels)});
      }
    }
    for (int i = 0; i < config.support_count; ++i) {
      support_scenes.push_back(
          GenerateScene(SupportSceneSeed(config.seed, i), config.spec));
    }
    for (int i = 0; i < config.test_count; ++i) {
      test_scenes.push_back(
          GenerateScene(TestSceneSeed(config.seed, i), config.spec));
    }
  });

  // 2. Pretraining.
  const Model model = Stage("pretrain", [&] {
    PretrainConfig pc;
    pc.margin = config.margin;
    pc.scale = config.scale;
    pc.epochs = config.epochs;
    pc.seed = config.seed;
    const auto start = Clock::now();
    PretrainResult result = Pretrain(train, names, pc);
    report.pretrain_seconds = SecondsSince(start);
    report.final_train_loss =
        result.loss_curve.empty() ? NAN : result.loss_curve.back();
    ConfusionMatrix confusion(kBaseClassCount);
    for (const LabeledImage& item : train) {
      confusion.Merge(Confusion(result.model.Predict(item.image), item.labels,
                                IdentityMapping(kBaseClassCount),
                                kBaseClassCount));
    }
    report.train_miou = ComputeMetrics(confusion).mean_iou;
    return result.model;
  });

  // 3. Interaction and training masks.
  SupportSet interaction_support;
  SupportSet training_support;
  Stage("build masks", [&] {
    for (int i = 0; i < config.support_count; ++i) {
      const SyntheticScene& scene = support_scenes[i];
      VoxelGrid grid = scene.spec.MakeGrid();
      const uint64_t base = config.seed * 100000 + 60000 + 10 * i;
      ApplyTrajectory(SimulateTouch(scene, grid, base, config.strokes, config.touch),
                      grid);
      const BinaryMask interaction = SceneInteractionMask(scene, grid, base + 1);
      const BinaryMask training = BuildTrainingMask(
          interaction, model.Predict(scene.rgb), kPlantClass, config.mask_rule);
      for (size_t p = 0; p < interaction.size(); ++p) {
        const bool non_plant = scene.gt_labels[p] != kPlantClass;
        if (interaction[p]) {
          ++report.masks.interaction_pixels;
          report.masks.interaction_non_plant += non_plant;
        }
        if (training[p]) {
          ++report.masks.training_pixels;
          report.masks.training_non_plant += non_plant;
        }
      }
      interaction_support.push_back({scene.rgb, interaction});
      training_support.push_back({scene.rgb, training});
    }
  });

  if (!config.out_dir.empty()) {
    Stage("write images", [&] {
      std::filesystem::create_directories(config.out_dir);
      const Palette palette = ClassPalette(kBaseClassCount);
      for (int k = 0; k < config.images_to_write &&
                      k < static_cast<int>(test_scenes.size());
           ++k) {
        const std::string stem = config.out_dir + "/test_" + std::to_string(k);
        WriteFileBytes(stem + "_rgb.png", EncodeRgbPng(test_scenes[k].rgb));
        WriteFileBytes(stem + "_gt.png",
                       EncodePalettePng(LabelIndices(test_scenes[k].gt_labels),
                                        palette));
      }
      for (size_t i = 0; i < training_support.size(); ++i) {
        Plane<uint8_t> vis(training_support[i].mask.height(),
                           training_support[i].mask.width(), 0);
        for (size_t p = 0; p < vis.size(); ++p) {
          vis[p] = training_support[i].mask[p]      ? 255
                   : interaction_support[i].mask[p] ? 110
                                                    : 0;
        }
        const std::string stem = config.out_dir + "/support_" + std::to_string(i);
        WriteFileBytes(stem + "_rgb.png", EncodeRgbPng(training_support[i].image));
        WriteFileBytes(stem + "_mask.png", EncodeGray8Png(vis));
      }
    });
  }

  auto add_row = [&](const std::string& name, const Model& refined,
                     double seconds, uint64_t passes) {
    MethodRow row;
    row.name = name;
    row.metrics = ComputeMetrics(EvaluateModel(refined, test_scenes), names);
    row.seconds = seconds;
    row.backward_passes = passes;
    report.rows.push_back(std::move(row));
    if (!config.out_dir.empty()) {
      WritePredictions(config.out_dir, name, refined, test_scenes,
                       config.images_to_write);
    }
  };

  // 4. Refinement.
  Stage("evaluate Before", [&] { add_row("Before", model, 0.0, 0); });

  if (config.run_distillation) {
    Stage("MD", [&] {
      DistillConfig dc = config.distill;
      dc.seed = config.seed;
      dc.plant_class = kPlantClass;
      const uint64_t passes = BackwardPassCount();
      const auto start = Clock::now();
      DistillResult result =
          DistillFinetune(model, interaction_support, validation, dc);
      const double seconds = SecondsSince(start);
      report.distill_best_epoch = result.best_epoch;
      add_row("MD", result.model, seconds, BackwardPassCount() - passes);
    });
  }

  for (PoolingMethod method : {PoolingMethod::kMap, PoolingMethod::kRap}) {
    const std::string name =
        method == PoolingMethod::kMap ? "WI-MAP" : "WI-RAP";
    Stage(name.c_str(), [&] {
      const uint64_t passes = BackwardPassCount();
      const auto start = Clock::now();
      const PooledPrototype proto =
          PoolSupport(training_support, model.extractor, method);
      Model refined{model.extractor, Imprint(model.head, proto, kPlantClass)};
      const double seconds = SecondsSince(start);
      add_row(name, refined, seconds, BackwardPassCount() - passes);
    });
  }
  return report;
}

std::vector<double> DefaultSweepMargins() {
  return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
}

SweepReport MarginSweep(const std::vector<double>& margins,
                        const ExperimentConfig& config) {
  if (margins.empty()) Fail(ErrorCode::kInvalidInput, "no margins to sweep");
  SweepReport sweep;
  sweep.margins = margins;
  sweep.methods = {"Before", "WI-MAP", "WI-RAP"};
  sweep.miou.assign(sweep.methods.size(), {});
  for (double margin : margins) {
    ExperimentConfig c = config;
    c.margin = margin;
    c.run_distillation = false;
    c.out_dir.clear();
    const ExperimentReport r = RunExperiment(c);
    for (size_t m = 0; m < sweep.methods.size(); ++m) {
      sweep.miou[m].push_back(r.row(sweep.methods[m]).metrics.mean_iou);
    }
  }
  return sweep;
}

nlohmann::json MetricsToJson(const MetricsReport& report) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json classes = nlohmann::json::array();
  for (size_t c = 0; c < report.per_class.size(); ++c) {
    const ClassMetrics& m = report.per_class[c];
    classes.push_back({{"name", c < report.class_names.size()
                                    ? report.class_names[c]
                                    : std::to_string(c)},
                       {"iou", opt(m.iou)},
                       {"precision", opt(m.precision)},
                       {"recall", opt(m.recall)}});
  }
  return {{"classes", classes},
          {"mean_iou", std::isnan(report.mean_iou)
                           ? nlohmann::json(nullptr)
                           : nlohmann::json(report.mean_iou)}};
}

nlohmann::json ReportToJson(const ExperimentReport& report) {
  const ExperimentConfig& c = report.config;
  nlohmann::json rows = nlohmann::json::array();
  for (const MethodRow& row : report.rows) {
    rows.push_back({{"method", row.name},
                    {"metrics", MetricsToJson(row.metrics)},
                    {"seconds", row.seconds},
                    {"backward_passes", row.backward_passes},
                    {"gradient_free", row.backward_passes == 0}});
  }
  return {
      {"config",
       {{"seed", c.seed},
        {"train_scenes", c.train_scenes},
        {"support_count", c.support_count},
        {"test_count", c.test_count},
        {"margin", c.margin},
        {"scale", c.scale},
        {"epochs", c.epochs},
        {"strokes", c.strokes},
        {"mask_rule", std::string(TrainingMaskRuleName(c.mask_rule))}}},
      {"pretrain",
       {{"seconds", report.pretrain_seconds},
        {"final_loss", report.final_train_loss},
        {"train_miou", report.train_miou}}},
      {"masks",
       {{"interaction_pixels", report.masks.interaction_pixels},
        {"interaction_non_plant", report.masks.interaction_non_plant},
        {"training_pixels", report.masks.training_pixels},
        {"training_non_plant", report.masks.training_non_plant}}},
      {"distill_best_epoch", report.distill_best_epoch},
      {"rows", rows},
  };
}

nlohmann::json SweepToJson(const SweepReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (size_t m = 0; m < report.methods.size(); ++m) {
    rows.push_back({{"method", report.methods[m]}, {"mean_iou", report.miou[m]}});
  }
  return {{"margins", report.margins}, {"rows", rows}};
}

std::string FormatReport(const ExperimentReport& report) {
  std::ostringstream out;
  const std::vector<std::string>& names = BaseClassNames();
  out << "Per-class and mean IoU [%]\n";
  out << Pad("", 10);
  for (const std::string& n : names) out << PadLeft(n, 12);
  out << PadLeft("mIoU", 10) << "\n";
  for (const MethodRow& row : report.rows) {
    out << Pad(row.name, 10);
    for (const ClassMetrics& m : row.metrics.per_class) {
      out << PadLeft(OptionalCell(m.iou), 12);
    }
    out << PadLeft(OptionalCell(std::isnan(row.metrics.mean_iou)
                                    ? std::nullopt
                                    : std::optional(row.metrics.mean_iou)),
                   10)
        << "\n";
  }
  out << "\nRecall / precision [%]\n" << Pad("", 10);
  for (const std::string& n : names) out << PadLeft(n, 16);
  out << "\n";
  for (const MethodRow& row : report.rows) {
    out << Pad(row.name, 10);
    for (const ClassMetrics& m : row.metrics.per_class) {
      out << PadLeft(OptionalCell(m.recall) + " / " + OptionalCell(m.precision), 16);
    }
    out << "\n";
  }
  out << "\nRefinement cost\n"
      << Pad("", 10) << PadLeft("seconds", 12) << PadLeft("backward", 12) << "\n";
  for (const MethodRow& row : report.rows) {
    if (row.name == "Before") continue;
    char secs[32];
    std::snprintf(secs, sizeof(secs), "%.4f", row.seconds);
    out << Pad(row.name, 10) << PadLeft(secs, 12)
        << PadLeft(std::to_string(row.backward_passes), 12) << "\n";
  }
  return out.str();
}

std::string FormatSweep(const SweepReport& report) {
  std::ostringstream out;
  out << "Mean IoU [%] by angular margin\n" << Pad("m", 10);
  for (double m : report.margins) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.1f", m);
    out << PadLeft(buf, 9);
  }
  out << "\n";
  for (size_t r = 0; r < report.methods.size(); ++r) {
    out << Pad(report.methods[r], 10);
    for (double v : report.miou[r]) {
      out << PadLeft(std::isnan(v) ? "n/a" : OptionalCell(v), 9);
    }
    out << "\n";
  }
  return out.str();
}

std::string FormatMetrics(const MetricsReport& report) {
  std::ostringstream out;
  out << Pad("class", 12) << PadLeft("IoU", 9) << PadLeft("recall", 9)
      << PadLeft("precision", 11) << "\n";
  for (size_t c = 0; c < report.per_class.size(); ++c) {
    const ClassMetrics& m = report.per_class[c];
    out << Pad(c < report.class_names.size() ? report.class_names[c]
                                             : std::to_string(c),
               12)
        << PadLeft(OptionalCell(m.iou), 9) << PadLeft(OptionalCell(m.recall), 9)
        << PadLeft(OptionalCell(m.precision), 11) << "\n";
  }
  out << Pad("mIoU", 12)
      << PadLeft(std::isnan(report.mean_iou) ? "n/a"
                                             : OptionalCell(report.mean_iou),
                 9)
      << "\n";
  return out.str();
}

}  // namespace plantwi
