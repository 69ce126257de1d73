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

#include <random>

#include "fixtures.h"
#include "plantwi/error.h"
#include "plantwi/geometry/camera.h"
#include "plantwi/geometry/masks.h"
#include "plantwi/geometry/pipeline.h"
#include "plantwi/geometry/scene.h"
#include "plantwi/geometry/touch.h"
#include "plantwi/geometry/voxel_grid.h"

namespace plantwi {
namespace {

using testing::CodeOf;
using testing::RandomMask;

CameraIntrinsics TestIntrinsics() {
  return CameraIntrinsics{100.0, 120.0, 32.0, 24.0, 64, 48};
}

// -------------------------------------------------------------- deprojection

TEST(DeprojectTest, PinholeExamples) {
  const CameraIntrinsics k = TestIntrinsics();
  const auto I = RigidTransform::Identity();
  const auto center = DeprojectPixel(k.cx, k.cy, 2.5, k, I);
  ASSERT_TRUE(center);
  EXPECT_EQ(*center, (Vec3{0, 0, 2.5}));
  const auto right = DeprojectPixel(k.cx + k.fx, k.cy, 1.5, k, I);
  ASSERT_TRUE(right);
  EXPECT_NEAR(right->x, 1.5, 1e-12);
  EXPECT_NEAR(right->y, 0.0, 1e-12);
  EXPECT_NEAR(right->z, 1.5, 1e-12);
  EXPECT_FALSE(DeprojectPixel(3, 4, 0.0, k, I));
}

TEST(DeprojectTest, MatchesScalarOracleUnderPose) {
  const CameraIntrinsics k = TestIntrinsics();
  RigidTransform pose;
  pose.rotation = {0, -1, 0, 1, 0, 0, 0, 0, 1};  // 90 degrees about z
  pose.translation = {0.5, -1.0, 2.0};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> z(0.2, 5.0);
  DepthImage depth(k.height, k.width);
  for (double& d : depth.data()) d = z(rng);
  depth.at(5, 7) = 0.0;
  const PointImage points = Deproject(depth, k, pose);
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const double d = depth.at(v, u);
      if (d == 0.0) {
        EXPECT_FALSE(points.valid.at(v, u));
        continue;
      }
      const double xc = (u - k.cx) * d / k.fx, yc = (v - k.cy) * d / k.fy;
      const Vec3 expected{-yc + 0.5, xc - 1.0, d + 2.0};
      ASSERT_TRUE(points.valid.at(v, u));
      EXPECT_NEAR((points.points.at(v, u) - expected).norm(), 0.0, 1e-12);
    }
  }
}

TEST(DeprojectTest, IntrinsicsValidation) {
  EXPECT_NO_THROW(TestIntrinsics().Validate());
  CameraIntrinsics bad = TestIntrinsics();
  bad.fx = 0;
  EXPECT_EQ(CodeOf([&] { bad.Validate(); }), ErrorCode::kInvalidInput);
  bad = TestIntrinsics();
  bad.cx = 64;
  EXPECT_EQ(CodeOf([&] { bad.Validate(); }), ErrorCode::kInvalidInput);
}

TEST(RigidTransformTest, MatrixRoundTripAndInverse) {
  RigidTransform pose;
  pose.rotation = {0, 0, 1, 0, 1, 0, -1, 0, 0};
  pose.translation = {1, 2, 3};
  EXPECT_EQ(RigidTransform::FromMatrix(pose.ToMatrix()), pose);
  const Vec3 p{0.3, -0.7, 4.0};
  EXPECT_NEAR((pose.Inverse().Apply(pose.Apply(p)) - p).norm(), 0.0, 1e-12);
}

// ---------------------------------------------------------------- voxel grid

VoxelGrid SmallGrid() { return VoxelGrid({-0.3, -0.3, -0.3}, 0.03, {20, 20, 20}); }

TEST(VoxelGridTest, SphereExamples) {
  VoxelGrid grid = SmallGrid();
  const VoxelIndex idx{10, 10, 10};
  grid.MarkSphere(grid.Center(idx), kTouchRadius);
  EXPECT_TRUE(grid.interacted(idx));
  const Vec3 far = grid.Center(idx) + Vec3{0.08, 0.0, 0.0};
  const auto far_idx = grid.Locate(far);
  ASSERT_TRUE(far_idx);
  EXPECT_FALSE(grid.interacted(*far_idx));
  // Idempotent.
  const size_t count = grid.interacted_count();
  EXPECT_EQ(grid.MarkSphere(grid.Center(idx), kTouchRadius), 0u);
  EXPECT_EQ(grid.interacted_count(), count);
}

TEST(VoxelGridTest, SphereMatchesBruteForceScan) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coord(-0.5, 0.5), radius(0.01, 0.12);
  for (int trial = 0; trial < 100; ++trial) {
    VoxelGrid grid = SmallGrid();
    const Vec3 c{coord(rng), coord(rng), coord(rng)};
    const double r = radius(rng);
    grid.MarkSphere(c, r);
    size_t expected = 0;
    for (int x = 0; x < 20; ++x) {
      for (int y = 0; y < 20; ++y) {
        for (int z = 0; z < 20; ++z) {
          const VoxelIndex i{x, y, z};
          const bool inside = (grid.Center(i) - c).norm() <= r;
          expected += inside;
          ASSERT_EQ(grid.interacted(i), inside) << trial;
        }
      }
    }
    EXPECT_EQ(grid.interacted_count(), expected);
  }
}

TEST(VoxelGridTest, TwoPointsMarkTheUnion) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> coord(-0.2, 0.2);
  for (int trial = 0; trial < 30; ++trial) {
    const Vec3 a{coord(rng), coord(rng), coord(rng)};
    const Vec3 b{coord(rng), coord(rng), coord(rng)};
    const VoxelGrid ga = MarkInteracted(SmallGrid(), a);
    const VoxelGrid gb = MarkInteracted(SmallGrid(), b);
    const VoxelGrid gab = MarkInteracted(MarkInteracted(SmallGrid(), a), b);
    for (int x = 0; x < 20; ++x) {
      for (int y = 0; y < 20; ++y) {
        for (int z = 0; z < 20; ++z) {
          const VoxelIndex i{x, y, z};
          ASSERT_EQ(gab.interacted(i), ga.interacted(i) || gb.interacted(i));
        }
      }
    }
  }
}

TEST(VoxelGridTest, OutOfBoundsQueriesAreFalse) {
  VoxelGrid grid = SmallGrid();
  grid.MarkSphere({0, 0, 0}, 0.5);
  EXPECT_FALSE(grid.interacted({-1, 0, 0}));
  EXPECT_FALSE(grid.interacted({0, 20, 0}));
  EXPECT_FALSE(grid.InteractedAt({5.0, 0.0, 0.0}));
  EXPECT_FALSE(grid.Locate({0.0, -0.31, 0.0}));
  EXPECT_EQ(CodeOf([] { VoxelGrid({0, 0, 0}, 0.0, {1, 1, 1}); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(CodeOf([] { VoxelGrid({0, 0, 0}, 0.1, {1, 0, 1}); }), ErrorCode::kInvalidInput);
}

TEST(VoxelGridTest, DeprojectedPixelsRoundTripToTheirVoxel) {
  const SceneSpec spec;
  const SyntheticScene scene = GenerateScene(3, spec);
  const VoxelGrid grid = spec.MakeGrid();
  const PointImage pts = Deproject(scene.clean_depth, scene.intrinsics, scene.camera_pose);
  size_t located = 0;
  for (size_t p = 0; p < pts.points.size(); ++p) {
    if (!pts.valid[p]) continue;
    const auto idx = grid.Locate(pts.points[p]);
    if (!idx) continue;
    ++located;
    const Vec3 c = grid.Center(*idx);
    const double half = grid.voxel_size() / 2 + 1e-12;
    EXPECT_LE(std::abs(pts.points[p].x - c.x), half);
    EXPECT_LE(std::abs(pts.points[p].y - c.y), half);
    EXPECT_LE(std::abs(pts.points[p].z - c.z), half);
    EXPECT_EQ(grid.Locate(c), idx);
  }
  EXPECT_GT(located, pts.points.size() / 2);
}

// --------------------------------------------------------------------- masks

TEST(FrameMaskTest, MarksExactlyPixelsInInteractedVoxels) {
  const SceneSpec spec;
  const SyntheticScene scene = GenerateScene(4, spec);
  VoxelGrid grid = spec.MakeGrid();
  const HandTrajectory hand = SimulateTouch(scene, grid, 11, 3);
  ApplyTrajectory(hand, grid);
  DepthImage depth = scene.clean_depth;
  depth[0] = 0.0;
  const BinaryMask mask =
      FrameInteractionMask(depth, scene.intrinsics, scene.camera_pose, grid);
  const PointImage pts = Deproject(depth, scene.intrinsics, scene.camera_pose);
  size_t set = 0;
  for (size_t p = 0; p < mask.size(); ++p) {
    const bool expected = pts.valid[p] && grid.InteractedAt(pts.points[p]);
    ASSERT_EQ(static_cast<bool>(mask[p]), expected);
    set += expected;
  }
  EXPECT_EQ(mask[0], 0);
  EXPECT_GT(set, 0u);
}

TEST(TemporalOrTest, OrSemantics) {
  std::mt19937_64 rng(12);
  const BinaryMask a = RandomMask(rng, 7, 9, 0.3);
  const BinaryMask zero(7, 9, 0);
  std::vector<BinaryMask> frames = {a, zero, zero, zero, zero};
  EXPECT_EQ(TemporalOr(frames), a);
  for (auto& f : frames) f = RandomMask(rng, 7, 9, 0.2);
  const BinaryMask out = TemporalOr(frames);
  for (size_t p = 0; p < out.size(); ++p) {
    bool any = false;
    for (const auto& f : frames) {
      any = any || f[p];
      if (f[p]) {
        EXPECT_TRUE(out[p]);
      }
    }
    EXPECT_EQ(static_cast<bool>(out[p]), any);
  }
}

TEST(TemporalOrTest, RequiresFiveEqualFrames) {
  const std::vector<BinaryMask> four(4, BinaryMask(2, 2, 0));
  EXPECT_EQ(CodeOf([&] { TemporalOr(four); }), ErrorCode::kInvalidInput);
  std::vector<BinaryMask> ragged(5, BinaryMask(2, 2, 0));
  ragged[3] = BinaryMask(2, 3, 0);
  EXPECT_EQ(CodeOf([&] { TemporalOr(ragged); }), ErrorCode::kInvalidInput);
}

TEST(TrainingMaskTest, PredictedPlantFilterExamples) {
  BinaryMask m(1, 3, 0);
  m[0] = 1;
  m[1] = 1;
  LabelMap pred(1, 3, kPlantClass);
  pred[1] = kGroundClass;
  const BinaryMask out = FilterTrainingMask(m, pred, kPlantClass);
  EXPECT_EQ(out[0], 1);  // touched and predicted plant
  EXPECT_EQ(out[1], 0);  // touched but predicted ground
  EXPECT_EQ(out[2], 0);  // not touched
}

TEST(TrainingMaskTest, RulesPartitionTheInteractionMask) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const BinaryMask m = RandomMask(rng, 6, 6, 0.5);
    const LabelMap pred = testing::RandomLabels(rng, 6, 6, 3);
    const BinaryMask keep =
        BuildTrainingMask(m, pred, kPlantClass, TrainingMaskRule::kPredictedPlant);
    const BinaryMask missed =
        BuildTrainingMask(m, pred, kPlantClass, TrainingMaskRule::kFalseNegative);
    EXPECT_EQ(keep, FilterTrainingMask(m, pred, kPlantClass));
    for (size_t p = 0; p < m.size(); ++p) {
      EXPECT_LE(keep[p], m[p]);
      EXPECT_LE(missed[p], m[p]);
      EXPECT_EQ(keep[p] + missed[p], m[p]);
      if (missed[p]) {
        EXPECT_NE(pred[p], kPlantClass);
      }
    }
  }
  EXPECT_EQ(ParseTrainingMaskRule("false-negative"), TrainingMaskRule::kFalseNegative);
  EXPECT_EQ(ParseTrainingMaskRule(TrainingMaskRuleName(TrainingMaskRule::kPredictedPlant)),
            TrainingMaskRule::kPredictedPlant);
  EXPECT_EQ(CodeOf([] { ParseTrainingMaskRule("plant"); }), ErrorCode::kInvalidInput);
  EXPECT_EQ(CodeOf([] {
              FilterTrainingMask(BinaryMask(2, 2, 1), LabelMap(2, 3, 0), 0);
            }),
            ErrorCode::kInvalidInput);
}

// -------------------------------------------------------------------- scenes

TEST(SceneTest, DeterministicPerSeed) {
  const SceneSpec spec;
  const SyntheticScene a = GenerateScene(17, spec);
  const SyntheticScene b = GenerateScene(17, spec);
  EXPECT_EQ(a.rgb, b.rgb);
  EXPECT_EQ(a.depth, b.depth);
  EXPECT_EQ(a.gt_labels, b.gt_labels);
  EXPECT_EQ(a.train_labels, b.train_labels);
  EXPECT_NE(GenerateScene(18, spec).rgb, a.rgb);
}

TEST(SceneTest, ContainsAllClassesAndConsistentShapes) {
  const SyntheticScene s = GenerateScene(2, SceneSpec{});
  std::array<size_t, 3> counts{};
  for (int32_t l : s.gt_labels.data()) {
    ASSERT_GE(l, 0);
    ASSERT_LT(l, 3);
    ++counts[l];
  }
  for (size_t c : counts) EXPECT_GT(c, 0u);
  EXPECT_EQ(s.rgb.height(), s.depth.height());
  EXPECT_EQ(s.rgb.width(), s.depth.width());
  for (double d : s.depth.data()) {
    EXPECT_TRUE(std::isfinite(d));
    EXPECT_GE(d, 0.0);
  }
  for (size_t p = 0; p < s.plant_withheld.size(); ++p) {
    if (s.plant_withheld[p]) {
      EXPECT_EQ(s.gt_labels[p], kPlantClass);
      EXPECT_EQ(s.train_labels[p], kArtificialClass);
    } else {
      EXPECT_EQ(s.gt_labels[p], s.train_labels[p]);
    }
  }
}

TEST(SceneTest, ZeroWithheldFractionKeepsLabels) {
  SceneSpec spec;
  spec.withheld_fraction = 0.0;
  const SyntheticScene s = GenerateScene(5, spec);
  EXPECT_EQ(s.gt_labels, s.train_labels);
  EXPECT_EQ(CountSet(s.plant_withheld), 0u);
}

TEST(SceneTest, DegenerateSpecIsRejected) {
  SceneSpec spec;
  spec.width = 0;
  EXPECT_EQ(CodeOf([&] { GenerateScene(1, spec); }), ErrorCode::kInvalidInput);
  spec = SceneSpec{};
  spec.withheld_fraction = 1.5;
  EXPECT_EQ(CodeOf([&] { GenerateScene(1, spec); }), ErrorCode::kInvalidInput);
}

// --------------------------------------------------------------------- touch

TEST(TouchTest, PointsLieNearPlantVoxels) {
  const SceneSpec spec;
  for (uint64_t seed : {1, 2, 3}) {
    const SyntheticScene scene = GenerateScene(seed, spec);
    const VoxelGrid grid = spec.MakeGrid();
    const HandTrajectory hand = SimulateTouch(scene, grid, seed * 7, 6);
    ASSERT_FALSE(hand.empty());
    for (const HandSample& s : hand.samples) {
      double best = 1e9;
      for (const VoxelIndex& v : scene.plant_voxels) {
        best = std::min(best, (grid.Center(v) - s.point).norm());
      }
      EXPECT_LE(best, 0.05);
    }
    const HandTrajectory again = SimulateTouch(scene, grid, seed * 7, 6);
    ASSERT_EQ(again.samples.size(), hand.samples.size());
    for (size_t i = 0; i < hand.samples.size(); ++i) {
      EXPECT_EQ(again.samples[i].point, hand.samples[i].point);
    }
  }
}

TEST(TouchTest, ZeroStrokesLeadToEmptyMask) {
  const SceneSpec spec;
  const SyntheticScene scene = GenerateScene(1, spec);
  VoxelGrid grid = spec.MakeGrid();
  const HandTrajectory hand = SimulateTouch(scene, grid, 1, 0);
  EXPECT_TRUE(hand.empty());
  ApplyTrajectory(hand, grid);
  EXPECT_EQ(CountSet(SceneInteractionMask(scene, grid, 5)), 0u);
}

TEST(TouchTest, SceneWithoutPlantsIsRejected) {
  const SceneSpec spec;
  SyntheticScene scene = GenerateScene(1, spec);
  scene.plant_voxels.clear();
  for (int32_t& l : scene.gt_labels.data()) {
    if (l == kPlantClass) l = kGroundClass;
  }
  EXPECT_EQ(CodeOf([&] { SimulateTouch(scene, spec.MakeGrid(), 1, 3); }),
            ErrorCode::kInvalidInput);
}

// ------------------------------------------------------------- full pipeline

BinaryMask PipelineMask(const SyntheticScene& scene, uint64_t seed) {
  VoxelGrid grid = scene.spec.MakeGrid();
  ApplyTrajectory(SimulateTouch(scene, grid, seed, 6), grid);
  return SceneInteractionMask(scene, grid, seed + 1);
}

TEST(PipelineTest, NoiseFreeMasksStayOnPlants) {
  SceneSpec spec;
  spec.noise = NoiseModel{0.0, 0, 0.0};
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const SyntheticScene scene = GenerateScene(seed, spec);
    const BinaryMask m = PipelineMask(scene, seed);
    ASSERT_GT(CountSet(m), 0u);
    for (size_t p = 0; p < m.size(); ++p) {
      if (m[p]) {
        ASSERT_EQ(scene.gt_labels[p], kPlantClass) << "seed " << seed;
      }
    }
  }
}

TEST(PipelineTest, NoisyMasksIncludeNonPlantPixels) {
  size_t stray = 0, total = 0;
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const SyntheticScene scene = GenerateScene(seed, SceneSpec{});
    const BinaryMask m = PipelineMask(scene, seed);
    for (size_t p = 0; p < m.size(); ++p) {
      total += m[p];
      stray += m[p] && scene.gt_labels[p] != kPlantClass;
    }
  }
  ASSERT_GT(total, 0u);
  EXPECT_GT(stray, 0u);
}

TEST(PipelineTest, TrainingMaskInclusionChain) {
  const SyntheticScene scene = GenerateScene(6, SceneSpec{});
  VoxelGrid grid = scene.spec.MakeGrid();
  ApplyTrajectory(SimulateTouch(scene, grid, 6, 6), grid);
  std::vector<BinaryMask> frames;
  for (int k = 0; k < kTemporalFrames; ++k) {
    frames.push_back(FrameInteractionMask(RenderDepthFrame(scene.clean_depth,
                                                           scene.spec.noise, 40 + k),
                                          scene.intrinsics, scene.camera_pose, grid));
  }
  const BinaryMask prime = TemporalOr(frames);
  for (auto rule : {TrainingMaskRule::kPredictedPlant, TrainingMaskRule::kFalseNegative}) {
    const BinaryMask m = BuildTrainingMask(prime, scene.train_labels, kPlantClass, rule);
    for (size_t p = 0; p < m.size(); ++p) {
      bool any = false;
      for (const auto& f : frames) any = any || f[p];
      EXPECT_LE(m[p], prime[p]);
      EXPECT_EQ(static_cast<bool>(prime[p]), any);
    }
  }
}

}  // namespace
}  // namespace plantwi
