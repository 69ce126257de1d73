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

#include <cmath>
#include <random>

#include "fixtures.h"
#include "plantwi/error.h"
#include "plantwi/eval/metrics.h"
#include "plantwi/geometry/scene.h"
#include "plantwi/model/arcface.h"
#include "plantwi/model/classifier.h"
#include "plantwi/model/extractor.h"
#include "plantwi/model/trainer.h"

namespace plantwi {
namespace {

using testing::RandomImage;
using testing::RandomModel;
using testing::RandomUnit;

// ---------------------------------------------------------------- extractor

TEST(ExtractorTest, ConstantImageGivesIdenticalEmbeddings) {
  const ExtractorParams params = ExtractorParams::Random({}, 3);
  RgbImage image(9, 11, 3);
  for (size_t p = 0; p < image.pixel_count(); ++p) {
    image.pixel(p)[0] = 90;
    image.pixel(p)[1] = 160;
    image.pixel(p)[2] = 40;
  }
  const FeatureMap f = ExtractFeatures(image, params);
  for (size_t p = 1; p < f.pixel_count(); ++p) {
    for (int d = 0; d < f.channels(); ++d) {
      EXPECT_NEAR(f.pixel(p)[d], f.pixel(0)[d], 1e-6);
    }
  }
}

TEST(ExtractorTest, EveryEmbeddingIsUnitNorm) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const ExtractorParams params = ExtractorParams::Random({}, trial);
    const FeatureMap f = ExtractFeatures(RandomImage(rng, 17, 13), params);
    ASSERT_EQ(f.channels(), 16);
    for (size_t p = 0; p < f.pixel_count(); ++p) {
      double sq = 0.0;
      for (double v : f.pixel(p)) sq += v * v;
      EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-6);
    }
  }
}

TEST(ExtractorTest, RepeatedCallsAreBitIdentical) {
  std::mt19937_64 rng(6);
  const ExtractorParams params = ExtractorParams::Random({}, 9);
  const RgbImage image = RandomImage(rng, 12, 12);
  EXPECT_EQ(ExtractFeatures(image, params), ExtractFeatures(image, params));
}

TEST(ExtractorTest, ExtremeInputsStayFinite) {
  const ExtractorParams params = ExtractorParams::Random({}, 2);
  for (uint8_t value : {0, 255}) {
    const FeatureMap f = ExtractFeatures(RgbImage(4, 4, 3, value), params);
    for (double v : f.data()) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST(ExtractorTest, EmptyImageIsRejected) {
  const ExtractorParams params = ExtractorParams::Random({}, 1);
  try {
    ExtractFeatures(RgbImage(0, 0, 3), params);
    FAIL() << "expected InvalidInput";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

TEST(ExtractorTest, RandomInitIsSeedDeterministic) {
  EXPECT_EQ(ExtractorParams::Random({}, 4), ExtractorParams::Random({}, 4));
  EXPECT_NE(ExtractorParams::Random({}, 4), ExtractorParams::Random({}, 5));
}

// --------------------------------------------------------------- classifier

CosineClassifier HeadFromRows(const std::vector<std::vector<double>>& rows) {
  CosineClassifier head;
  head.dim = static_cast<int>(rows[0].size());
  for (size_t j = 0; j < rows.size(); ++j) {
    for (double v : rows[j]) head.weights.push_back(static_cast<float>(v));
    head.class_names.push_back("c" + std::to_string(j));
    head.parent_class.push_back(kNoParent);
  }
  return head;
}

FeatureMap SinglePixel(const std::vector<double>& f) {
  FeatureMap map(1, 1, static_cast<int>(f.size()));
  std::copy(f.begin(), f.end(), map.data().begin());
  return map;
}

TEST(CosineLogitsTest, ScoreExamples) {
  const CosineClassifier head =
      HeadFromRows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
  // Feature equal to W_2.
  EXPECT_NEAR(CosineLogits(SinglePixel({0, 0, 1}), head).at(0, 0, 2), 1.0, 1e-6);
  // Feature orthogonal to W_1.
  EXPECT_NEAR(CosineLogits(SinglePixel({1, 0, 0}), head).at(0, 0, 1), 0.0, 1e-6);
  // Feature equal to -W_0.
  EXPECT_NEAR(CosineLogits(SinglePixel({-1, 0, 0}), head).at(0, 0, 0), -1.0, 1e-6);
}

TEST(CosineLogitsTest, DimensionMismatchIsRejected) {
  const CosineClassifier head = HeadFromRows({{1, 0, 0}, {0, 1, 0}});
  try {
    CosineLogits(SinglePixel({1, 0}), head);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

TEST(CosineLogitsTest, ScoresStayWithinUnitInterval) {
  std::mt19937_64 rng(11);
  const Model model = RandomModel(4, 16, 5);
  const ScoreMap s = model.Scores(RandomImage(rng, 16, 16));
  for (double v : s.data()) {
    EXPECT_GE(v, -1.0 - 1e-6);
    EXPECT_LE(v, 1.0 + 1e-6);
  }
}

TEST(PredictTest, ArgmaxAndTieBreak) {
  ScoreMap s(1, 2, 3);
  const double a[] = {0.9, 0.2, 0.1, 0.5, 0.5, 0.1};
  std::copy(std::begin(a), std::end(a), s.data().begin());
  const LabelMap l = Predict(s);
  EXPECT_EQ(l.at(0, 0), 0);
  EXPECT_EQ(l.at(0, 1), 0);
}

TEST(PredictTest, InvariantToPositiveFeatureScaling) {
  // Raw network outputs z scaled by any lambda > 0 normalize to the same
  // feature, hence the same argmax.
  std::mt19937_64 rng(12);
  const Model model = RandomModel(8, 16, 4);
  const InputMap inputs = PrepareInputs(RandomImage(rng, 6, 6), 1);
  for (size_t p = 0; p < inputs.pixel_count(); ++p) {
    const std::vector<double> z = RawEmbedding(inputs.pixel(p), model.extractor);
    LabelMap reference;
    for (double lambda : {1.0, 1e-3, 7.5, 1e4}) {
      std::vector<double> scaled = z;
      double sq = 0.0;
      for (double& v : scaled) {
        v *= lambda;
        sq += v * v;
      }
      for (double& v : scaled) v /= std::sqrt(sq);
      const LabelMap l = Predict(CosineLogits(SinglePixel(scaled), model.head));
      if (reference.empty()) reference = l;
      EXPECT_EQ(l, reference);
    }
  }
}

TEST(ClassifierTest, ValidateRejectsBadHeads) {
  CosineClassifier head = HeadFromRows({{1, 0}, {0, 1}});
  EXPECT_NO_THROW(head.Validate());
  CosineClassifier one = HeadFromRows({{1, 0}});
  EXPECT_THROW(one.Validate(), Error);
  CosineClassifier wide = head;
  wide.margin = 0.6;
  EXPECT_THROW(wide.Validate(), Error);
  CosineClassifier unscaled = head;
  unscaled.scale = 0.0;
  EXPECT_THROW(unscaled.Validate(), Error);
  CosineClassifier long_row = head;
  long_row.weights[0] = 1.1f;
  EXPECT_THROW(long_row.Validate(), Error);
}

TEST(ClassifierTest, FoldingFollowsParentChains) {
  CosineClassifier head = HeadFromRows({{1, 0}, {0, 1}, {1, 0}, {0, 1}});
  head.parent_class = {kNoParent, kNoParent, 0, 2};
  EXPECT_EQ(head.FoldingMap(), (std::vector<int32_t>{0, 1, 0, 0}));
}

TEST(ClassifierTest, RandomHeadHasUnitRows) {
  const CosineClassifier head = CosineClassifier::Random(16, {"a", "b", "c"}, 1);
  for (int j = 0; j < head.class_count(); ++j) {
    double sq = 0.0;
    for (float v : head.row(j)) sq += double{v} * v;
    EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-6);
  }
  EXPECT_DOUBLE_EQ(head.margin, 0.1);
  EXPECT_DOUBLE_EQ(head.scale, 16.0);
}

// ------------------------------------------------------------------ ArcFace

TEST(ArcFaceTest, SinglePixelWithoutMargin) {
  const std::vector<double> scores = {1.0, -1.0};
  const std::vector<int32_t> labels = {0};
  const double loss = ArcFaceLossRows(scores, labels, 2, 0.0, 1.0);
  EXPECT_NEAR(loss, std::log(1.0 + std::exp(-2.0)), 1e-12);
  EXPECT_NEAR(loss, 0.126928, 1e-6);
}

TEST(ArcFaceTest, SinglePixelWithMargin) {
  const std::vector<double> scores = {1.0, -1.0};
  const std::vector<int32_t> labels = {0};
  const double expected =
      -std::log(std::exp(std::cos(0.1)) / (std::exp(std::cos(0.1)) + std::exp(-1.0)));
  EXPECT_NEAR(ArcFaceLossRows(scores, labels, 2, 0.1, 1.0), expected, 1e-12);
  EXPECT_NEAR(std::cos(0.1), 0.995004, 1e-6);
}

TEST(ArcFaceTest, ZeroMarginEqualsSoftmaxCrossEntropy) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int classes = 2 + trial % 5;
    const int rows = 1 + trial % 7;
    const double scale = 0.5 + trial;
    std::vector<double> scores(rows * classes);
    for (double& s : scores) s = unit(rng);
    std::vector<int32_t> labels(rows);
    for (int32_t& y : labels) y = std::uniform_int_distribution<int>(0, classes - 1)(rng);
    double ce = 0.0;
    for (int r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (int j = 0; j < classes; ++j) sum += std::exp(scale * scores[r * classes + j]);
      ce += -(scale * scores[r * classes + labels[r]] - std::log(sum));
    }
    ce /= rows;
    EXPECT_NEAR(ArcFaceLossRows(scores, labels, classes, 0.0, scale), ce, 1e-9);
  }
}

TEST(ArcFaceTest, MarginPinnedBeyondPi) {
  EXPECT_DOUBLE_EQ(MarginCosine(-1.0, 0.3), -1.0);
  EXPECT_DOUBLE_EQ(MarginCosine(std::cos(M_PI - 0.05), 0.1), -1.0);
  EXPECT_NEAR(MarginCosine(0.5, 0.2), std::cos(std::acos(0.5) + 0.2), 1e-12);
  EXPECT_NEAR(MarginCosine(1.7, 0.1), std::cos(0.1), 1e-12);  // clamped input
}

TEST(ArcFaceTest, LossIsNonNegativeAndLabelsAreChecked) {
  std::mt19937_64 rng(3);
  const Model model = RandomModel(2, 8, 3);
  const RgbImage image = RandomImage(rng, 4, 4);
  const ScoreMap scores = model.Scores(image);
  const LossReport r = ArcFaceLoss(scores, testing::RandomLabels(rng, 4, 4, 3), model.head);
  EXPECT_GE(r.loss, 0.0);
  EXPECT_TRUE(std::isfinite(r.loss));
  EXPECT_EQ(r.pixel_count, 16u);
  LabelMap bad(4, 4, 0);
  bad.at(1, 1) = 3;
  try {
    ArcFaceLoss(scores, bad, model.head);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
}

// Loss of a model on a batch, without touching the backward pass.
double BatchLoss(const Model& model, const PixelBatch& batch) {
  ExtractorTape tape(model.extractor, batch.inputs);
  return ArcFaceLossRows(TapeScores(tape, model.head), batch.labels,
                         model.head.class_count(), model.head.margin,
                         model.head.scale);
}

// Maximum relative error between the analytic gradient and central finite
// differences over every parameter of a random D=8, C=4 model on one random
// 3x3 image.
double GradientCheck(uint64_t seed) {
  std::mt19937_64 rng(seed);
  Model model = RandomModel(seed, 8, 4);
  PixelBatch batch;
  batch.Append(PrepareInputs(RandomImage(rng, 3, 3), 1),
               testing::RandomLabels(rng, 3, 3, 4));
  const ModelGradient grad = ArcFaceGradient(model, batch);
  const double eps = 1e-4;
  double worst = 0.0;
  auto probe = [&](float& p, double analytic) {
    const float saved = p;
    p = static_cast<float>(saved + eps);
    const float hi = p;
    const double up = BatchLoss(model, batch);
    p = static_cast<float>(saved - eps);
    const float lo = p;
    const double down = BatchLoss(model, batch);
    p = saved;
    const double numeric = (up - down) / (double{hi} - double{lo});
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (size_t l = 0; l < model.extractor.layers.size(); ++l) {
    DenseLayer& layer = model.extractor.layers[l];
    for (size_t i = 0; i < layer.weight.size(); ++i) {
      probe(layer.weight[i], grad.extractor.layers[l].weight[i]);
    }
    for (size_t i = 0; i < layer.bias.size(); ++i) {
      probe(layer.bias[i], grad.extractor.layers[l].bias[i]);
    }
  }
  for (size_t i = 0; i < model.head.weights.size(); ++i) {
    probe(model.head.weights[i], grad.head[i]);
  }
  return worst;
}

TEST(GradientTest, MatchesCentralDifferences) {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    EXPECT_LT(GradientCheck(seed), 1e-4) << "seed " << seed;
  }
}

TEST(GradientTest, BackwardPassesAreCounted) {
  std::mt19937_64 rng(1);
  const Model model = RandomModel(1, 8, 3);
  PixelBatch batch;
  batch.Append(PrepareInputs(RandomImage(rng, 3, 3), 1),
               testing::RandomLabels(rng, 3, 3, 3));
  const uint64_t before = BackwardPassCount();
  ArcFaceGradient(model, batch);
  EXPECT_EQ(BackwardPassCount(), before + 1);
}

// ------------------------------------------------------------------ training

TEST(TrainStepTest, ZeroLearningRateLeavesModelUnchanged) {
  std::mt19937_64 rng(4);
  Model model = RandomModel(4, 16, 3);
  const Model original = model;
  const std::vector<RgbImage> images = {RandomImage(rng, 5, 5)};
  const std::vector<LabelMap> labels = {testing::RandomLabels(rng, 5, 5, 3)};
  TrainStep(images, labels, model, 0.0);
  EXPECT_EQ(model, original);
}

TEST(TrainStepTest, RowsStayUnitNormAndLossDrops) {
  std::mt19937_64 rng(5);
  Model model = RandomModel(5, 16, 3);
  const std::vector<RgbImage> images = {RandomImage(rng, 6, 6), RandomImage(rng, 6, 6)};
  const std::vector<LabelMap> labels = {testing::RandomLabels(rng, 6, 6, 3),
                                        testing::RandomLabels(rng, 6, 6, 3)};
  const double first = TrainStep(images, labels, model, 0.05).loss;
  double last = first;
  for (int step = 0; step < 30; ++step) {
    last = TrainStep(images, labels, model, 0.05).loss;
    for (int j = 0; j < model.head.class_count(); ++j) {
      double sq = 0.0;
      for (float v : model.head.row(j)) sq += double{v} * v;
      ASSERT_NEAR(std::sqrt(sq), 1.0, 1e-6);
    }
  }
  EXPECT_LT(last, first);
}

TEST(TrainStepTest, RejectsEmptyBatch) {
  Model model = RandomModel(1, 8, 3);
  EXPECT_THROW(TrainStep({}, {}, model, 0.1), Error);
}

std::vector<LabeledImage> SmallDataset(int count, uint64_t seed) {
  SceneSpec spec;
  spec.width = 48;
  spec.height = 48;
  std::vector<LabeledImage> out;
  for (int i = 0; i < count; ++i) {
    SyntheticScene s = GenerateScene(seed + i, spec);
    out.push_back({std::move(s.rgb), std::move(s.train_labels)});
  }
  return out;
}

TEST(PretrainTest, DefaultsAndDeterminism) {
  PretrainConfig defaults;
  EXPECT_DOUBLE_EQ(defaults.margin, 0.1);
  const auto data = SmallDataset(4, 10);
  PretrainConfig config;
  config.epochs = 3;
  config.seed = 9;
  const PretrainResult a = Pretrain(data, BaseClassNames(), config);
  const PretrainResult b = Pretrain(data, BaseClassNames(), config);
  ASSERT_EQ(a.loss_curve.size(), 3u);
  EXPECT_EQ(a.loss_curve, b.loss_curve);
  EXPECT_EQ(a.model, b.model);
}

TEST(PretrainTest, RejectsEmptyOrIncompleteData) {
  try {
    Pretrain({}, BaseClassNames(), {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidInput);
  }
  std::vector<LabeledImage> one_class = {{RgbImage(4, 4, 3, 10), LabelMap(4, 4, 0)}};
  EXPECT_THROW(Pretrain(one_class, BaseClassNames(), {}), Error);
}

TEST(PretrainTest, FitsTwentySyntheticScenes) {
  // 20 full-size scenes, default settings; training mean IoU must exceed 0.7
  // well within the 200-epoch budget.
  SceneSpec spec;
  std::vector<LabeledImage> data;
  for (int i = 0; i < 20; ++i) {
    SyntheticScene s = GenerateScene(500 + i, spec);
    data.push_back({std::move(s.rgb), std::move(s.train_labels)});
  }
  PretrainConfig config;
  config.epochs = 40;
  const PretrainResult result = Pretrain(data, BaseClassNames(), config);
  ConfusionMatrix confusion(3);
  for (const LabeledImage& item : data) {
    confusion.Merge(Confusion(result.model.Predict(item.image), item.labels,
                              IdentityMapping(3), 3));
  }
  EXPECT_GT(ComputeMetrics(confusion).mean_iou, 0.7);
  EXPECT_LT(result.loss_curve.back(), result.loss_curve.front());
}

}  // namespace
}  // namespace plantwi
