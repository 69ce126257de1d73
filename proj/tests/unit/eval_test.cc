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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.h"
#include "plantwi/error.h"
#include "plantwi/eval/distill.h"
#include "plantwi/eval/metrics.h"

namespace plantwi {
namespace {

using testing::CodeOf;
using testing::RandomImage;
using testing::RandomLabels;
using testing::RandomModel;

LabelMap Labels(std::initializer_list<int32_t> values) {
  LabelMap l(1, static_cast<int>(values.size()));
  std::copy(values.begin(), values.end(), l.data().begin());
  return l;
}

// ------------------------------------------------------------------ metrics

TEST(MetricsTest, HandCountedExample) {
  const ConfusionMatrix c =
      Confusion(Labels({0, 0, 1, 1}), Labels({0, 1, 1, 1}), IdentityMapping(2), 2);
  EXPECT_EQ(c.at(0, 0), 1u);
  EXPECT_EQ(c.at(1, 0), 1u);
  EXPECT_EQ(c.at(1, 1), 2u);
  EXPECT_EQ(c.total(), 4u);
  const MetricsReport r = ComputeMetrics(c);
  EXPECT_DOUBLE_EQ(*r.per_class[0].iou, 0.5);
  EXPECT_DOUBLE_EQ(*r.per_class[1].iou, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*r.per_class[0].precision, 0.5);
  EXPECT_DOUBLE_EQ(*r.per_class[0].recall, 1.0);
  EXPECT_DOUBLE_EQ(*r.per_class[1].precision, 1.0);
  EXPECT_DOUBLE_EQ(*r.per_class[1].recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.mean_iou, (0.5 + 2.0 / 3.0) / 2.0);
}

TEST(MetricsTest, PerfectPredictionAndMapping) {
  const LabelMap gt = Labels({0, 1, 2, 2, 0});
  const MetricsReport r = ComputeMetrics(Confusion(gt, gt, IdentityMapping(3), 3));
  for (const ClassMetrics& m : r.per_class) {
    EXPECT_EQ(*m.iou, 1.0);
    EXPECT_EQ(*m.precision, 1.0);
    EXPECT_EQ(*m.recall, 1.0);
  }
  EXPECT_EQ(r.mean_iou, 1.0);
  // An extra predicted class 3 folded back onto 0.
  const std::vector<int32_t> fold = {0, 1, 2, 0};
  const ConfusionMatrix c = Confusion(Labels({3, 1, 2, 2, 0}), gt, fold, 3);
  EXPECT_EQ(c, Confusion(gt, gt, IdentityMapping(3), 3));
}

TEST(MetricsTest, AbsentClassIsUndefinedAndExcluded) {
  const MetricsReport r = ComputeMetrics(
      Confusion(Labels({0, 0, 1}), Labels({0, 1, 1}), IdentityMapping(3), 3));
  EXPECT_FALSE(r.per_class[2].iou);
  EXPECT_FALSE(r.per_class[2].precision);
  EXPECT_FALSE(r.per_class[2].recall);
  EXPECT_DOUBLE_EQ(r.mean_iou, (0.5 + 0.5) / 2.0);
}

TEST(MetricsTest, ErrorsOnBadInput) {
  EXPECT_EQ(CodeOf([] {
              Confusion(Labels({0, 5}), Labels({0, 1}), IdentityMapping(2), 2);
            }),
            ErrorCode::kInvalidInput);
  EXPECT_EQ(CodeOf([] { Confusion(Labels({0}), Labels({0, 1}), IdentityMapping(2), 2); }),
            ErrorCode::kInvalidInput);
  ConfusionMatrix a(2);
  EXPECT_EQ(CodeOf([&] { a.Merge(ConfusionMatrix(3)); }), ErrorCode::kInvalidInput);
}

TEST(MetricsTest, MatchesBruteForceCounting) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> size(1, 32), kd(2, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = size(rng), w = size(rng), k = kd(rng);
    const LabelMap gt = RandomLabels(rng, h, w, k);
    const LabelMap pred = RandomLabels(rng, h, w, k);
    const MetricsReport r = ComputeMetrics(Confusion(pred, gt, IdentityMapping(k), k));
    double sum = 0.0;
    int defined = 0;
    for (int c = 0; c < k; ++c) {
      uint64_t tp = 0, fp = 0, fn = 0;
      for (size_t p = 0; p < gt.size(); ++p) {
        tp += pred[p] == c && gt[p] == c;
        fp += pred[p] == c && gt[p] != c;
        fn += pred[p] != c && gt[p] == c;
      }
      if (tp + fp + fn == 0) {
        EXPECT_FALSE(r.per_class[c].iou);
        continue;
      }
      const double iou = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
      EXPECT_EQ(*r.per_class[c].iou, iou);
      if (tp + fp) {
        EXPECT_EQ(*r.per_class[c].precision, static_cast<double>(tp) / (tp + fp));
      }
      if (tp + fn) {
        EXPECT_EQ(*r.per_class[c].recall, static_cast<double>(tp) / (tp + fn));
      }
      sum += iou;
      ++defined;
    }
    EXPECT_NEAR(r.mean_iou, sum / defined, 1e-15);
  }
}

TEST(MetricsTest, MeanIouIsPermutationInvariant) {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 4;
    const LabelMap gt = RandomLabels(rng, 16, 16, k);
    const LabelMap pred = RandomLabels(rng, 16, 16, k);
    std::vector<int32_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    LabelMap gt2 = gt, pred2 = pred;
    for (int32_t& v : gt2.data()) v = perm[v];
    for (int32_t& v : pred2.data()) v = perm[v];
    const double a = ComputeMetrics(Confusion(pred, gt, IdentityMapping(k), k)).mean_iou;
    const double b = ComputeMetrics(Confusion(pred2, gt2, IdentityMapping(k), k)).mean_iou;
    EXPECT_NEAR(a, b, 1e-12);
  }
}

// ------------------------------------------------------------- distillation

SupportSet RandomSupport(std::mt19937_64& rng, int count, int size, double fill) {
  SupportSet s;
  for (int i = 0; i < count; ++i) {
    s.push_back({RandomImage(rng, size, size), testing::RandomMask(rng, size, size, fill)});
  }
  return s;
}

TEST(DistillTest, DefaultHyperparameters) {
  const DistillConfig c;
  EXPECT_EQ(c.distill_weight, 0.5);
  EXPECT_EQ(c.temperature, 1.0);
  EXPECT_EQ(c.lr, 1e-4);
  EXPECT_EQ(c.batch, 5);
  EXPECT_EQ(c.epochs, 15);
  DistillConfig bad;
  bad.temperature = 0.0;
  EXPECT_EQ(CodeOf([&] { bad.Validate(); }), ErrorCode::kInvalidInput);
}

TEST(DistillTest, KlTermVanishesWhenStudentIsTeacher) {
  std::mt19937_64 rng(41);
  const Model model = RandomModel(41, 16, 3);
  const SupportSet support = RandomSupport(rng, 2, 6, 0.3);
  DistillConfig with_kl;
  const DistillBatch batch = BuildDistillBatch(model, support, with_kl);
  DistillConfig without_kl = with_kl;
  without_kl.distill_weight = 0.0;
  EXPECT_EQ(DistillLoss(model, batch, with_kl), DistillLoss(model, batch, without_kl));
}

TEST(DistillTest, PseudoLabelsForceMaskedPixelsToPlant) {
  std::mt19937_64 rng(42);
  const Model model = RandomModel(42, 16, 3);
  const SupportSet support = RandomSupport(rng, 1, 7, 0.5);
  const DistillBatch batch = BuildDistillBatch(model, support, DistillConfig{});
  const LabelMap teacher = model.Predict(support[0].image);
  ASSERT_EQ(batch.pixels.size(), 49u);
  for (size_t p = 0; p < 49; ++p) {
    EXPECT_EQ(batch.pixels.labels[p], support[0].mask[p] ? 0 : teacher[p]);
    double sum = 0.0;
    for (int j = 0; j < 3; ++j) sum += batch.teacher_probs[p * 3 + j];
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(DistillTest, SmallStepDecreasesLoss) {
  std::mt19937_64 rng(43);
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const Model teacher = RandomModel(100 + seed, 16, 3);
    const SupportSet support = RandomSupport(rng, 2, 6, 0.4);
    DistillConfig config;
    const DistillBatch batch = BuildDistillBatch(teacher, support, config);
    // Perturb the student so the KL term is active too.
    Model student = teacher;
    ApplySgd(student, DistillGradient(student, batch, config), 1e-2);
    const double before = DistillLoss(student, batch, config);
    ApplySgd(student, DistillGradient(student, batch, config), 1e-6);
    EXPECT_LT(DistillLoss(student, batch, config), before) << "seed " << seed;
  }
}

TEST(DistillTest, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(44);
  const Model teacher = RandomModel(44, 8, 3);
  const SupportSet support = RandomSupport(rng, 1, 3, 0.5);
  DistillConfig config;
  config.temperature = 2.0;
  const DistillBatch batch = BuildDistillBatch(teacher, support, config);
  Model student = teacher;
  ApplySgd(student, DistillGradient(student, batch, config), 5e-2);
  const ModelGradient grad = DistillGradient(student, batch, config);
  double worst = 0.0;
  auto probe = [&](float& p, double analytic) {
    const float saved = p;
    p = static_cast<float>(saved + 1e-3);
    const float hi = p;
    const double up = DistillLoss(student, batch, config);
    p = static_cast<float>(saved - 1e-3);
    const float lo = p;
    const double down = DistillLoss(student, batch, config);
    p = saved;
    const double numeric = (up - down) / (double{hi} - double{lo});
    worst = std::max(worst, std::abs(analytic - numeric) /
                                std::max({std::abs(analytic), std::abs(numeric), 1e-4}));
  };
  for (size_t i = 0; i < student.head.weights.size(); ++i) {
    probe(student.head.weights[i], grad.head[i]);
  }
  for (size_t l = 0; l < student.extractor.layers.size(); ++l) {
    auto& layer = student.extractor.layers[l];
    for (size_t i = 0; i < layer.weight.size(); ++i) {
      probe(layer.weight[i], grad.extractor.layers[l].weight[i]);
    }
  }
  EXPECT_LT(worst, 1e-3);
}

TEST(DistillTest, ZeroWeightWithFullMaskIsCrossEntropyTowardPlant) {
  std::mt19937_64 rng(45);
  const Model model = RandomModel(45, 16, 3);
  const SupportSet support = RandomSupport(rng, 2, 5, 1.0);
  DistillConfig config;
  config.distill_weight = 0.0;
  const DistillBatch batch = BuildDistillBatch(model, support, config);
  double ce = 0.0;
  size_t rows = 0;
  for (const SupportPair& pair : support) {
    const ScoreMap s = model.Scores(pair.image);
    for (size_t p = 0; p < s.pixel_count(); ++p) {
      double sum = 0.0;
      for (double c : s.pixel(p)) sum += std::exp(model.head.scale * c);
      ce += std::log(sum) - model.head.scale * s.pixel(p)[0];
      ++rows;
    }
  }
  EXPECT_NEAR(DistillLoss(model, batch, config), ce / rows, 1e-9);
  // The gradient equals the plain cross-entropy gradient: ArcFace with no
  // margin on the same all-plant labels.
  Model no_margin = model;
  no_margin.head.margin = 0.0;
  const ModelGradient a = DistillGradient(model, batch, config);
  const ModelGradient b = ArcFaceGradient(no_margin, batch.pixels);
  ASSERT_EQ(a.head.size(), b.head.size());
  for (size_t i = 0; i < a.head.size(); ++i) EXPECT_NEAR(a.head[i], b.head[i], 1e-9);
}

TEST(DistillTest, FinetuneCountsBackwardPassesAndPicksBestEpoch) {
  std::mt19937_64 rng(46);
  const Model model = RandomModel(46, 16, 3);
  const SupportSet support = RandomSupport(rng, 7, 6, 0.3);
  std::vector<LabeledImage> validation = {
      {RandomImage(rng, 6, 6), RandomLabels(rng, 6, 6, 3)}};
  DistillConfig config;
  config.epochs = 4;
  const uint64_t before = BackwardPassCount();
  const DistillResult r = DistillFinetune(model, support, validation, config);
  // 7 images in batches of 5 is 2 steps per epoch.
  EXPECT_EQ(BackwardPassCount() - before, 8u);
  ASSERT_EQ(r.val_miou.size(), 4u);
  ASSERT_GE(r.best_epoch, 1);
  ASSERT_LE(r.best_epoch, 4);
  EXPECT_EQ(r.val_miou[r.best_epoch - 1],
            *std::max_element(r.val_miou.begin(), r.val_miou.end()));
  EXPECT_EQ(MeanIoU(r.model, validation, 3), r.val_miou[r.best_epoch - 1]);
  EXPECT_EQ(CodeOf([&] { DistillFinetune(model, {}, validation, config); }),
            ErrorCode::kInvalidInput);
}

}  // namespace
}  // namespace plantwi
