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

#include "soundsal/dataset.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "soundsal/error.h"

namespace soundsal {
namespace {

ShapesConfig SmallConfig(int samples = 200) {
  ShapesConfig c;
  c.samples = samples;
  c.seed = 77;
  return c;
}

TEST(GenerateShapesTest, DeterministicGivenSeed) {
  const LabeledDataset a = GenerateShapes(SmallConfig());
  const LabeledDataset b = GenerateShapes(SmallConfig());
  EXPECT_EQ(a.images, b.images);
  EXPECT_EQ(a.labels, b.labels);
  ShapesConfig other = SmallConfig();
  other.seed = 78;
  EXPECT_NE(GenerateShapes(other).images, a.images);
}

TEST(GenerateShapesTest, SplitsDiffer) {
  ShapesConfig test = SmallConfig();
  test.split = Split::kTest;
  EXPECT_NE(GenerateShapes(test).images, GenerateShapes(SmallConfig()).images);
}

TEST(GenerateShapesTest, ZeroNoiseLeavesBackgroundExactlyZero) {
  ShapesConfig c = SmallConfig(50);
  c.noise_amplitude = 0.0;
  const LabeledDataset d = GenerateShapes(c);
  for (std::size_t k = 0; k < d.size(); ++k) {
    const std::set<int> shape(d.shape_pixels[k][0].begin(), d.shape_pixels[k][0].end());
    for (std::size_t p = 0; p < d.images[k].size(); ++p) {
      if (!shape.contains(static_cast<int>(p))) EXPECT_EQ(d.images[k][p], 0.0);
    }
  }
}

TEST(GenerateShapesTest, ShapePixelsAreExactlyTheForegroundPixels) {
  const ShapesConfig c = SmallConfig();
  const LabeledDataset d = GenerateShapes(c);
  ValidateDataset(d);
  for (std::size_t k = 0; k < d.size(); ++k) {
    const std::set<int> shape(d.shape_pixels[k][0].begin(), d.shape_pixels[k][0].end());
    double intensity = -1.0;
    for (std::size_t p = 0; p < d.images[k].size(); ++p) {
      const double v = d.images[k][p];
      if (shape.contains(static_cast<int>(p))) {
        EXPECT_GE(v, static_cast<float>(c.foreground_min));
        EXPECT_LE(v, c.foreground_max);
        if (intensity < 0) intensity = v;
        EXPECT_EQ(v, intensity);  // one intensity per shape
      } else {
        EXPECT_LE(v, c.noise_amplitude);
      }
    }
  }
}

TEST(GenerateShapesTest, ClassBalanceWithinBinomialBounds) {
  const LabeledDataset d = GenerateShapes(SmallConfig(4000));
  std::array<int, 4> counts{};
  for (int label : d.labels) ++counts[label];
  for (int c : counts) {
    EXPECT_GE(c, 900);
    EXPECT_LE(c, 1100);
  }
}

TEST(GenerateShapesTest, RejectsInfeasibleConfigs) {
  ShapesConfig tiny = SmallConfig();
  tiny.height = 3;
  EXPECT_THROW(GenerateShapes(tiny), DimensionError);
  ShapesConfig overlap = SmallConfig();
  overlap.foreground_min = 0.2;
  EXPECT_THROW(GenerateShapes(overlap), InvalidArgument);
  ShapesConfig many = SmallConfig();
  many.class_count = kMaxShapeClasses + 1;
  EXPECT_THROW(GenerateShapes(many), InvalidArgument);
}

TEST(GenerateTwoObjectTest, ShapesAreDisjointAndDistinct) {
  const LabeledDataset d = GenerateTwoObject(SmallConfig(300));
  ValidateDataset(d);
  for (std::size_t k = 0; k < d.size(); ++k) {
    ASSERT_EQ(d.shape_pixels[k].size(), 2u);
    std::vector<int> both;
    std::set_intersection(d.shape_pixels[k][0].begin(), d.shape_pixels[k][0].end(),
                          d.shape_pixels[k][1].begin(), d.shape_pixels[k][1].end(),
                          std::back_inserter(both));
    EXPECT_TRUE(both.empty());
  }
  const LabeledDataset again = GenerateTwoObject(SmallConfig(300));
  EXPECT_EQ(again.images, d.images);
  EXPECT_EQ(again.labels, d.labels);
}

TEST(GenerateTwoObjectTest, ReportsPlacementFailure) {
  ShapesConfig cramped = SmallConfig(20);
  cramped.height = 5;
  cramped.width = 6;
  EXPECT_THROW(GenerateTwoObject(cramped), NumericalError);
}

TEST(DatasetFileTest, RoundTripIsExact) {
  const LabeledDataset d = GenerateShapes(SmallConfig(64));
  const std::string bytes = EncodeDataset(d);
  EXPECT_EQ(bytes.size(), 4 + 4 + 4 + 3 * 2 + 64 * (1 + 4 * 256));
  const LabeledDataset back = DecodeDataset(bytes, "mem", Split::kTrain);
  EXPECT_EQ(back.images, d.images);
  EXPECT_EQ(back.labels, d.labels);
  EXPECT_EQ(back.class_count, d.class_count);
  EXPECT_EQ(back.height, d.height);
  EXPECT_EQ(back.width, d.width);
  EXPECT_EQ(EncodeDataset(back), bytes);
}

TEST(DatasetFileTest, EmptyDatasetRoundTrips) {
  LabeledDataset empty;
  empty.height = 16;
  empty.width = 16;
  empty.class_count = 4;
  const LabeledDataset back = DecodeDataset(EncodeDataset(empty), "mem");
  EXPECT_TRUE(back.empty());
  EXPECT_EQ(back.height, 16);
}

TEST(DatasetFileTest, SaveAndLoadThroughDisk) {
  const LabeledDataset d = GenerateShapes(SmallConfig(10));
  const auto path = std::filesystem::temp_directory_path() / "soundsal_dataset_test.ssds";
  SaveDataset(d, path.string());
  const LabeledDataset back = LoadDataset(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(back.images, d.images);
  EXPECT_THROW(LoadDataset("/nonexistent/dir/file.ssds"), IoError);
}

TEST(DatasetFileTest, CorruptionIsAStructuredError) {
  const std::string bytes = EncodeDataset(GenerateShapes(SmallConfig(4)));
  std::string magic = bytes;
  magic[1] = 'Z';
  EXPECT_THROW(DecodeDataset(magic, "mem"), FormatError);
  EXPECT_THROW(DecodeDataset(bytes.substr(0, bytes.size() - 1), "mem"), FormatError);
  std::string version = bytes;
  version[4] = 2;
  EXPECT_THROW(DecodeDataset(version, "mem"), FormatError);
  std::string label = bytes;
  label[18] = 9;  // first sample's label byte
  EXPECT_THROW(DecodeDataset(label, "mem"), FormatError);
}

}  // namespace
}  // namespace soundsal
