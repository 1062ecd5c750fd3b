// Copyright 2026 The soundsal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "soundsal/masker.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "soundsal/error.h"
#include "soundsal/metrics.h"
#include "test_util.h"

namespace soundsal {
namespace {

using ::soundsal::testing::CentralDifferences;
using ::soundsal::testing::MaxRelativeError;
using ::soundsal::testing::RandomGrid;
using ::soundsal::testing::RandomModel;
using ::soundsal::testing::ToVector;

LabeledDataset RandomPool(int count, int h, int w, std::uint64_t seed,
                          double hi = 1.0) {
  RandomStream stream(seed, 99);
  LabeledDataset pool;
  pool.height = h;
  pool.width = w;
  pool.class_count = 1;
  for (int k = 0; k < count; ++k) {
    pool.images.push_back(RandomGrid(h, w, stream, 0.0, hi));
    pool.labels.push_back(0);
  }
  return pool;
}

TEST(CompositeTest, AllOnesKeepsInputExactly) {
  RandomStream stream(1, 0);
  const Image x = RandomGrid(4, 5, stream);
  const LabeledDataset pool = RandomPool(3, 4, 5, 2);
  for (const FillStrategy& fill : {FillStrategy(GrayFill{0.3}),
                                   FillStrategy(RandomImageFill{&pool, {}}),
                                   FillStrategy(BlurFill{1.0})}) {
    EXPECT_EQ(Composite(x, Grid(4, 5, 1.0), fill, stream), x);
  }
}

TEST(CompositeTest, AllZerosWithGrayIsConstant) {
  RandomStream stream(2, 0);
  const Image out = Composite(RandomGrid(3, 3, stream), Grid(3, 3, 0.0), GrayFill{0.5}, stream);
  for (double v : out.values()) EXPECT_EQ(v, 0.5);
}

TEST(CompositeTest, HalfMaskWithHalfGray) {
  RandomStream stream(3, 0);
  const Image x = RandomGrid(3, 4, stream);
  const Image out = Composite(x, Grid(3, 4, 0.5), GrayFill{0.5}, stream);
  for (std::size_t k = 0; k < x.size(); ++k) EXPECT_DOUBLE_EQ(out[k], 0.5 * x[k] + 0.25);
}

TEST(CompositeTest, OutputLiesBetweenImageAndFill) {
  RandomStream stream(4, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const Image x = RandomGrid(4, 4, stream);
    const Image fill = RandomGrid(4, 4, stream);
    const Grid m = RandomGrid(4, 4, stream);
    const Image out = CompositeWith(x, m, fill);
    for (std::size_t k = 0; k < x.size(); ++k) {
      EXPECT_GE(out[k], std::min(x[k], fill[k]));
      EXPECT_LE(out[k], std::max(x[k], fill[k]));
    }
  }
}

TEST(CompositeTest, RandomImageFillNeverDrawsExcludedImage) {
  const LabeledDataset pool = RandomPool(3, 2, 2, 5);
  RandomStream stream(5, 0);
  for (int k = 0; k < 300; ++k) {
    const Image drawn = DrawFill(pool.images[1], RandomImageFill{&pool, 1}, stream);
    EXPECT_NE(drawn, pool.images[1]);
  }
}

TEST(CompositeTest, RejectsEmptyPoolsAndShapeMismatch) {
  RandomStream stream(6, 0);
  LabeledDataset empty;
  EXPECT_THROW(DrawFill(Grid(2, 2), RandomImageFill{&empty, {}}, stream), InvalidArgument);
  const LabeledDataset one = RandomPool(1, 2, 2, 6);
  EXPECT_THROW(DrawFill(Grid(2, 2), RandomImageFill{&one, 0}, stream), InvalidArgument);
  EXPECT_THROW(Composite(Grid(2, 2), Grid(2, 3), GrayFill{}, stream), DimensionError);
}

TEST(HeatmapTest, NormalizationRangeAndConstantCase) {
  RandomStream stream(7, 0);
  const Heatmap h(RandomGrid(5, 5, stream, -3, 8));
  const Grid n = h.Normalized();
  EXPECT_EQ(Min(n), 0.0);
  EXPECT_EQ(Max(n), 1.0);
  const Grid c = Heatmap(Grid(3, 3, 4.2)).Normalized();
  for (double v : c.values()) EXPECT_EQ(v, 0.5);
}

// Finite-difference check of the full penalized objective with respect to W.
void CheckObjectiveGradient(int scale, std::uint64_t seed) {
  RandomStream stream(seed, 0);
  const MlpClassifier model = RandomModel(16, 6, 3, stream);
  const Image x = RandomGrid(4, 4, stream);
  std::vector<Image> fills;
  for (int k = 0; k < 3; ++k) fills.push_back(RandomGrid(4, 4, stream));
  MaskConfig cfg;
  cfg.lambda_tv = 0.05 + 0.1 * stream.NextReal();
  cfg.lambda_l1 = 0.01 + 0.05 * stream.NextReal();
  cfg.scale = scale;
  const int label = static_cast<int>(stream.NextBelow(3));
  const MaskObjective objective(model, x, label, cfg);
  const int low = 4 / scale;
  const Grid weights = RandomGrid(low, low, stream, -2, 2);
  Grid analytic;
  objective.Evaluate(weights, fills, &analytic);
  const auto numeric = CentralDifferences(ToVector(weights), [&](const std::vector<double>& v) {
    return objective.Evaluate(Grid(low, low, v), fills, nullptr).total;
  });
  EXPECT_LT(MaxRelativeError(ToVector(analytic), numeric), 1e-4) << "seed " << seed;
}

TEST(MaskObjectiveTest, GradientMatchesFiniteDifferencesFullResolution) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) CheckObjectiveGradient(1, seed);
}

TEST(MaskObjectiveTest, GradientMatchesFiniteDifferencesUpsampled) {
  for (std::uint64_t seed = 100; seed < 110; ++seed) CheckObjectiveGradient(2, seed);
}

TEST(MaskObjectiveTest, PenaltiesUseUpsampledMask) {
  RandomStream stream(8, 0);
  const MlpClassifier model = RandomModel(16, 4, 2, stream);
  MaskConfig cfg;
  cfg.lambda_tv = 0.3;
  cfg.lambda_l1 = 0.2;
  cfg.scale = 2;
  const MaskObjective objective(model, RandomGrid(4, 4, stream), 0, cfg);
  const Grid w = RandomGrid(2, 2, stream, -1, 1);
  const std::vector<Image> fills = {Grid(4, 4, 0.5)};
  const auto v = objective.Evaluate(w, fills, nullptr);
  const Grid up = BilinearUpsample(SigmoidMask(w), 2);
  EXPECT_NEAR(v.tv_term, 0.3 * TotalVariation(up), 1e-15);
  EXPECT_NEAR(v.l1_term, 0.2 * Sum(up), 1e-15);
}

TEST(LearnMaskTest, LargeL1DrivesMaskToZero) {
  RandomStream stream(9, 0);
  const MlpClassifier model = RandomModel(64, 8, 3, stream);
  const LabeledDataset pool = RandomPool(20, 8, 8, 9);
  MaskConfig cfg;
  cfg.lambda_tv = 0.0;
  cfg.lambda_l1 = 1e3;
  cfg.steps = 2000;
  cfg.fill = RandomImageFill{&pool, {}};
  const MaskResult r = LearnMask(model, RandomGrid(8, 8, stream), 1, cfg);
  EXPECT_LT(Mean(r.heatmap.raw()), 0.01);
  EXPECT_GT(Min(r.heatmap.raw()), 0.0);
}

TEST(LearnMaskTest, RecoversRegionOfLinearRegionModel) {
  // Class 0's logit is 4 * (sum of the pixels in a 3x3 region), through one
  // hidden unit that stays active on non-negative inputs.
  constexpr int kSide = 8;
  MlpClassifier model = MlpClassifier::Zeros(kSide * kSide, 1, 2);
  std::set<int> region;
  for (int i = 2; i < 5; ++i)
    for (int j = 3; j < 6; ++j) region.insert(i * kSide + j);
  for (int p : region) model.w1[p] = 1.0;
  model.w2 = {4.0, 0.0};
  RandomStream stream(10, 0);
  Image x = RandomGrid(kSide, kSide, stream, 0.0, 0.3);
  for (int p : region) x[p] = 1.0;
  const LabeledDataset pool = RandomPool(30, kSide, kSide, 10, 0.5);
  MaskConfig cfg;
  cfg.lambda_tv = 0.0;
  cfg.lambda_l1 = 0.05;
  cfg.steps = 500;
  cfg.fill = RandomImageFill{&pool, {}};
  const MaskResult r = LearnMask(model, x, 0, cfg);
  const Grid top = TopSBinarize(r.heatmap.raw(), static_cast<int>(region.size()));
  int both = 0;
  int either = 0;
  for (int p = 0; p < kSide * kSide; ++p) {
    const bool in_top = top[p] > 0.5;
    const bool in_region = region.contains(p);
    both += in_top && in_region;
    either += in_top || in_region;
  }
  EXPECT_GE(static_cast<double>(both) / either, 0.8);
}

TEST(LearnMaskTest, DeterministicAndObjectiveDecreases) {
  RandomStream stream(11, 0);
  const MlpClassifier model = RandomModel(64, 8, 3, stream, 1.0);
  const LabeledDataset pool = RandomPool(20, 8, 8, 11);
  MaskConfig cfg;
  cfg.steps = 300;
  cfg.trace_every = 50;
  cfg.fill = RandomImageFill{&pool, {}};
  const Image x = RandomGrid(8, 8, stream);
  const MaskResult a = LearnMask(model, x, 2, cfg, 5);
  const MaskResult b = LearnMask(model, x, 2, cfg, 5);
  EXPECT_EQ(a.heatmap, b.heatmap);
  EXPECT_EQ(a.heldout_objective, b.heldout_objective);
  EXPECT_NE(LearnMask(model, x, 2, cfg, 6).heatmap, a.heatmap);
  ASSERT_EQ(a.trace_steps.front(), 0);
  ASSERT_EQ(a.trace_steps.back(), 300);
  EXPECT_LT(a.heldout_objective.back(), a.heldout_objective.front());
  for (double v : a.heatmap.raw().values()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
}

TEST(LearnMaskTest, UpsampledMaskHasImageShape) {
  RandomStream stream(12, 0);
  const MlpClassifier model = RandomModel(64, 8, 2, stream);
  MaskConfig cfg;
  cfg.steps = 20;
  cfg.scale = 4;
  cfg.fill = GrayFill{};
  const MaskResult r = LearnMask(model, RandomGrid(8, 8, stream), 0, cfg);
  EXPECT_EQ(r.weights.height(), 2);
  EXPECT_EQ(r.heatmap.raw().height(), 8);
  cfg.scale = 3;
  EXPECT_THROW(LearnMask(model, RandomGrid(8, 8, stream), 0, cfg), DimensionError);
}

TEST(LearnMaskTest, DivergenceIsReported) {
  RandomStream stream(13, 0);
  MlpClassifier model = RandomModel(16, 4, 2, stream);
  model.b2[0] = std::nan("");
  MaskConfig cfg;
  cfg.steps = 5;
  cfg.fill = GrayFill{};
  EXPECT_THROW(LearnMask(model, RandomGrid(4, 4, stream, 0.5, 1.0), 1, cfg), NumericalError);
}

TEST(LearnMasksAllLabelsTest, SingleClassEqualsLearnMask) {
  RandomStream stream(14, 0);
  const MlpClassifier model = RandomModel(16, 4, 1, stream);
  MaskConfig cfg;
  cfg.steps = 50;
  cfg.fill = BlurFill{1.0};
  const Image x = RandomGrid(4, 4, stream);
  const auto all = LearnMasksAllLabels(model, x, cfg, 3);
  ASSERT_EQ(all.size(), 1u);
  EXPECT_EQ(all[0].heatmap, LearnMask(model, x, 0, cfg, LabelTaskId(3, 0)).heatmap);
}

TEST(LearnMasksAllLabelsTest, ParallelEqualsSequential) {
  RandomStream stream(15, 0);
  const MlpClassifier model = RandomModel(64, 8, 4, stream);
  const LabeledDataset pool = RandomPool(10, 8, 8, 15);
  MaskConfig cfg;
  cfg.steps = 60;
  cfg.fill = RandomImageFill{&pool, {}};
  const Image x = RandomGrid(8, 8, stream);
  const auto sequential = LearnMasksAllLabels(model, x, cfg, 8, 1);
  const auto parallel = LearnMasksAllLabels(model, x, cfg, 8, 4);
  for (int a = 0; a < 4; ++a) EXPECT_EQ(sequential[a].heatmap, parallel[a].heatmap);
  EXPECT_NE(sequential[0].heatmap, sequential[1].heatmap);
}

TEST(GradientInputMapTest, ZeroImageNormalizesToHalf) {
  RandomStream stream(16, 0);
  const MlpClassifier model = RandomModel(9, 4, 2, stream);
  const Heatmap h = GradientInputMap(model, Grid(3, 3, 0.0), 1);
  for (double v : h.raw().values()) EXPECT_EQ(v, 0.0);
  const Grid normalized = h.Normalized();
  for (double v : normalized.values()) EXPECT_EQ(v, 0.5);
}

TEST(GradientInputMapTest, LinearRegimeIsWeightTimesInput) {
  MlpClassifier model = MlpClassifier::Zeros(4, 2, 2);
  model.w1 = {0.5, 0.1, 0.2, 0.3, 0.4, 0.0, 0.6, 0.2};
  model.b1 = {0.1, 0.1};
  model.w2 = {1.0, -2.0, 0.5, 0.5};
  const Image x = Grid::FromRows({{0.2, 0.4}, {0.6, 0.8}});
  // Row for class 0: 1.0 * w1[0,:] - 2.0 * w1[1,:].
  const double row[4] = {0.5 - 0.8, 0.1 - 0.0, 0.2 - 1.2, 0.3 - 0.4};
  const Heatmap h = GradientInputMap(model, x, 0);
  for (int p = 0; p < 4; ++p) EXPECT_NEAR(h.raw()[p], row[p] * x[p], 1e-15);
  EXPECT_EQ(GradientInputMap(model, x, 0), h);
}

TEST(RandomMapTest, DeterministicPerStreamAndNormalized) {
  RandomStream a(17, 1);
  RandomStream b(17, 1);
  RandomStream c(17, 2);
  const Heatmap ha = RandomMap(6, 6, a);
  EXPECT_EQ(ha, RandomMap(6, 6, b));
  EXPECT_NE(ha, RandomMap(6, 6, c));
  const Grid n = ha.Normalized();
  for (double v : n.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(CenteredGaussianMapTest, PeakSymmetryAndDecay) {
  const Heatmap h = CenteredGaussianMap(8, 8, 0.25);
  const Grid& g = h.raw();
  const double peak = Max(g);
  for (int i : {3, 4})
    for (int j : {3, 4}) EXPECT_EQ(g(i, j), peak);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      EXPECT_DOUBLE_EQ(g(i, j), g(7 - i, j));
      EXPECT_DOUBLE_EQ(g(i, j), g(i, 7 - j));
      EXPECT_DOUBLE_EQ(g(i, j), g(j, i));
    }
  }
  for (int j = 4; j + 1 < 8; ++j) EXPECT_GT(g(4, j), g(4, j + 1));
  const Heatmap odd = CenteredGaussianMap(5, 5, 0.3);
  EXPECT_EQ(odd.raw()(2, 2), 1.0);
}

TEST(CheatingVariantTest, CopiesPredictedMapEverywhere) {
  RandomStream stream(18, 0);
  std::vector<Heatmap> maps;
  for (int a = 0; a < 4; ++a) maps.emplace_back(RandomGrid(3, 3, stream));
  const auto cheat = CheatingVariant(maps, 2);
  for (const Heatmap& h : cheat) EXPECT_EQ(h, maps[2]);
  EXPECT_EQ(CheatingVariant(cheat, 2), cheat);
  EXPECT_THROW(CheatingVariant(maps, 4), InvalidArgument);
}

}  // namespace
}  // namespace soundsal
