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

// Command-line entry points: data generation, pretraining, imprinting,
// evaluation, the refinement experiments and the HTTP service.

#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "plantwi/error.h"
#include "plantwi/eval/experiment.h"
#include "plantwi/geometry/pipeline.h"
#include "plantwi/geometry/touch.h"
#include "plantwi/imprinting/pooling.h"
#include "plantwi/service/checkpoint.h"
#include "plantwi/service/dataset.h"
#include "plantwi/service/png_io.h"
#include "plantwi/service/server.h"

namespace fs = std::filesystem;
using namespace plantwi;

namespace {

HttpServer* g_server = nullptr;

void HandleSignal(int) {
  if (g_server != nullptr) g_server->Stop();
}

TrainingMaskRule RuleOption(const std::string& name) {
  return ParseTrainingMaskRule(name);
}

void WriteText(const std::string& path, const std::string& text) {
  WriteFileBytes(path, text);
}

int GenData(const std::string& out, int scenes, uint64_t seed, double withheld,
            bool noise_free) {
  SceneSpec spec;
  spec.withheld_fraction = withheld;
  if (noise_free) spec.noise = {0.0, 0, 0.0};
  const auto ids = GenerateDataset(out, scenes, seed, spec);
  std::printf("wrote %zu scenes to %s\n", ids.size(), out.c_str());
  return 0;
}

int PretrainCmd(const std::string& data, double margin, double scale,
                int epochs, uint64_t seed, double lr, const std::string& out) {
  std::vector<LabeledImage> dataset;
  for (NamedScene& s : LoadDataset(data)) {
    dataset.push_back({std::move(s.scene.rgb), std::move(s.scene.train_labels)});
  }
  PretrainConfig config;
  config.margin = margin;
  config.scale = scale;
  config.epochs = epochs;
  config.seed = seed;
  config.lr = lr;
  const auto start = std::chrono::steady_clock::now();
  const PretrainResult result = Pretrain(dataset, BaseClassNames(), config);
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start).count();
  SaveCheckpoint(result.model, out);
  std::printf("pretrained on %zu scenes in %.1f s, loss %.4f -> %.4f\n",
              dataset.size(), secs,
              result.loss_curve.empty() ? 0.0 : result.loss_curve.front(),
              result.loss_curve.empty() ? 0.0 : result.loss_curve.back());
  std::printf("checkpoint written to %s\n", out.c_str());
  return 0;
}

int ImprintCmd(const std::string& ckpt, const std::string& support_dir,
               const std::string& method_name, const std::string& out,
               int strokes, uint64_t seed, const std::string& rule_name) {
  const PoolingMethod method = ParsePoolingMethod(method_name);
  const TrainingMaskRule rule = RuleOption(rule_name);
  const Model model = LoadCheckpoint(ckpt);
  const std::vector<int32_t> folding = model.head.FoldingMap();
  SupportSet support;
  size_t index = 0;
  for (const NamedScene& s : LoadDataset(support_dir)) {
    const std::string dir = support_dir + "/" + s.id;
    BinaryMask interaction;
    if (fs::exists(dir + "/interaction.png")) {
      const Plane<uint8_t> stored = DecodeGray8Png(ReadFileBytes(dir + "/interaction.png"));
      interaction = BinaryMask(stored.height(), stored.width(), 0);
      for (size_t p = 0; p < stored.size(); ++p) interaction[p] = stored[p] != 0;
    } else {
      VoxelGrid grid = s.scene.spec.MakeGrid();
      const uint64_t base = seed * 1000 + 10 * index;
      ApplyTrajectory(SimulateTouch(s.scene, grid, base, strokes), grid);
      interaction = SceneInteractionMask(s.scene, grid, base + 1);
    }
    LabelMap pred = model.Predict(s.scene.rgb);
    for (int32_t& label : pred.data()) label = folding[label];
    BinaryMask training = BuildTrainingMask(interaction, pred, kPlantClass, rule);
    std::printf("%s: interaction %zu px, training %zu px\n", s.id.c_str(),
                CountSet(interaction), CountSet(training));
    support.push_back({s.scene.rgb, std::move(training)});
    ++index;
  }
  const uint64_t passes = BackwardPassCount();
  const auto start = std::chrono::steady_clock::now();
  const PooledPrototype proto = PoolSupport(support, model.extractor, method);
  Model refined{model.extractor, Imprint(model.head, proto, kPlantClass)};
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start).count();
  SaveCheckpoint(refined, out);
  std::printf("imprinted class '%s' (%s) from %zu images in %.1f ms, %llu backward passes\n",
              refined.head.class_names.back().c_str(),
              std::string(PoolingMethodName(method)).c_str(), support.size(), ms,
              static_cast<unsigned long long>(BackwardPassCount() - passes));
  std::printf("checkpoint written to %s\n", out.c_str());
  return 0;
}

int EvalCmd(const std::string& ckpt, const std::string& test, bool as_json) {
  const Model model = LoadCheckpoint(ckpt);
  std::vector<SyntheticScene> scenes;
  for (NamedScene& s : LoadDataset(test)) scenes.push_back(std::move(s.scene));
  if (scenes.empty()) Fail(ErrorCode::kIoError, "no scenes in " + test);
  const MetricsReport report =
      ComputeMetrics(EvaluateModel(model, scenes), BaseClassNames());
  if (as_json) {
    std::cout << MetricsToJson(report).dump(2) << "\n";
  } else {
    std::cout << FormatMetrics(report);
  }
  return 0;
}

int ExperimentCmd(ExperimentConfig config, const std::string& out) {
  fs::create_directories(out);
  config.out_dir = out;
  const ExperimentReport report = RunExperiment(config);
  const std::string text = FormatReport(report);
  WriteText(out + "/report.json", ReportToJson(report).dump(2) + "\n");
  WriteText(out + "/report.txt", text);
  std::cout << text;
  std::printf("\npretraining %.1f s, train mIoU %.2f%%; M' %llu px, M %llu px\n",
              report.pretrain_seconds, 100.0 * report.train_miou,
              static_cast<unsigned long long>(report.masks.interaction_pixels),
              static_cast<unsigned long long>(report.masks.training_pixels));
  return 0;
}

int SweepCmd(const ExperimentConfig& config, const std::string& out) {
  fs::create_directories(out);
  const SweepReport sweep = MarginSweep(DefaultSweepMargins(), config);
  const std::string text = FormatSweep(sweep);
  WriteText(out + "/sweep.json", SweepToJson(sweep).dump(2) + "\n");
  WriteText(out + "/sweep.txt", text);
  std::cout << text;
  return 0;
}

int ServeCmd(const ServeConfig& config) {
  auto session = LoadSession(config);
  HttpServer server(session);
  const int port = server.Bind(config.host, config.port);
  if (port < 0) {
    Fail(ErrorCode::kIoError, "cannot bind " + config.host + ":" +
                                  std::to_string(config.port));
  }
  g_server = &server;
  std::signal(SIGINT, HandleSignal);
  std::signal(SIGTERM, HandleSignal);
  std::printf("serving %zu scenes on http://%s:%d\n", session->SceneIds().size(),
              config.host.c_str(), port);
  std::fflush(stdout);
  const bool ok = server.Run();
  g_server = nullptr;
  return ok ? 0 : 1;
}

void AddExperimentOptions(CLI::App* cmd, ExperimentConfig& config,
                          std::string& rule) {
  cmd->add_option("--seed", config.seed, "Base seed")->capture_default_str();
  cmd->add_option("--epochs", config.epochs, "Pretraining epochs")->capture_default_str();
  cmd->add_option("--scale", config.scale, "Cosine scale s")->capture_default_str();
  cmd->add_option("--train-scenes", config.train_scenes)->capture_default_str();
  cmd->add_option("--support", config.support_count)->capture_default_str();
  cmd->add_option("--test", config.test_count)->capture_default_str();
  cmd->add_option("--strokes", config.strokes, "Touch strokes per support scene")
      ->capture_default_str();
  cmd->add_option("--rule", rule, "Training-mask rule: false-negative | predicted-plant")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Touch-driven refinement of a pixel classifier by weight imprinting"};
  app.require_subcommand(1);

  std::string out, data, ckpt, support, method = "rap", test, rule = "false-negative";
  int scenes = 20, epochs = 200, strokes = 6;
  uint64_t seed = 0;
  double margin = kDefaultMargin, scale = kDefaultScale, lr = 0.01, withheld = 0.8;
  bool noise_free = false, as_json = false;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic scene dataset");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--scenes", scenes)->capture_default_str();
  gen->add_option("--seed", seed)->capture_default_str();
  gen->add_option("--withheld", withheld, "Fraction of shoots labeled artificial")
      ->capture_default_str();
  gen->add_flag("--noise-free", noise_free, "Disable depth noise and jitter");

  auto* pre = app.add_subcommand("pretrain", "Pretrain extractor and head");
  pre->add_option("--data", data)->required();
  pre->add_option("--margin", margin)->capture_default_str();
  pre->add_option("--scale", scale)->capture_default_str();
  pre->add_option("--epochs", epochs)->capture_default_str();
  pre->add_option("--seed", seed)->capture_default_str();
  pre->add_option("--lr", lr)->capture_default_str();
  pre->add_option("--out", out)->required();

  auto* imp = app.add_subcommand("imprint", "Imprint a new class from support scenes");
  imp->add_option("--ckpt", ckpt)->required();
  imp->add_option("--support", support)->required();
  imp->add_option("--method", method, "map | rap")->capture_default_str();
  imp->add_option("--out", out)->required();
  imp->add_option("--strokes", strokes)->capture_default_str();
  imp->add_option("--seed", seed)->capture_default_str();
  imp->add_option("--rule", rule)->capture_default_str();

  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  ev->add_option("--ckpt", ckpt)->required();
  ev->add_option("--test", test)->required();
  ev->add_flag("--json", as_json);

  ExperimentConfig exp_config;
  std::string exp_rule = "false-negative";
  bool no_md = false;
  auto* exp = app.add_subcommand("experiment", "Before / MD / WI-MAP / WI-RAP comparison");
  AddExperimentOptions(exp, exp_config, exp_rule);
  exp->add_option("--margin", exp_config.margin)->capture_default_str();
  exp->add_flag("--no-md", no_md, "Skip the distillation baseline");
  exp->add_option("--out", out)->required();

  ExperimentConfig sweep_config;
  std::string sweep_rule = "false-negative";
  auto* sw = app.add_subcommand("sweep", "Mean IoU over angular margins 0.0..0.5");
  AddExperimentOptions(sw, sweep_config, sweep_rule);
  sw->add_option("--out", out)->required();

  ServeConfig serve_config;
  std::string serve_rule = "false-negative";
  auto* sv = app.add_subcommand("serve", "Run the refinement HTTP service");
  sv->add_option("--port", serve_config.port)->capture_default_str();
  sv->add_option("--host", serve_config.host)->capture_default_str();
  sv->add_option("--data", serve_config.data_dir)->required();
  sv->add_option("--ckpt", serve_config.checkpoint_path)->required();
  sv->add_option("--test", serve_config.test_dir, "Scenes used for metrics");
  sv->add_option("--rule", serve_rule)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return GenData(out, scenes, seed, withheld, noise_free);
    if (*pre) return PretrainCmd(data, margin, scale, epochs, seed, lr, out);
    if (*imp) return ImprintCmd(ckpt, support, method, out, strokes, seed, rule);
    if (*ev) return EvalCmd(ckpt, test, as_json);
    if (*exp) {
      exp_config.mask_rule = RuleOption(exp_rule);
      exp_config.run_distillation = !no_md;
      return ExperimentCmd(exp_config, out);
    }
    if (*sw) {
      sweep_config.mask_rule = RuleOption(sweep_rule);
      return SweepCmd(sweep_config, out);
    }
    if (*sv) {
      serve_config.session.mask_rule = RuleOption(serve_rule);
      return ServeCmd(serve_config);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
