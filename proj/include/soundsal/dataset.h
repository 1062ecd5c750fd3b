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

#ifndef SOUNDSAL_DATASET_H_
#define SOUNDSAL_DATASET_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "soundsal/grid.h"

namespace soundsal {

enum class Split { kUnspecified, kTrain, kTest, kHoldout };

std::string_view SplitName(Split split);

// A set of labeled grayscale images with values in [0, 1].
//
// `shape_pixels` holds, per image, the flat pixel indices of every shape that
// was drawn (one set for single-object images, two for two-object images).
// It is ground truth for diagnostics only: saliency methods and metrics never
// read it. It is not persisted.
struct LabeledDataset {
  int height = 0;
  int width = 0;
  int class_count = 0;
  Split split = Split::kUnspecified;
  std::vector<Image> images;
  std::vector<int> labels;
  std::vector<std::vector<std::vector<int>>> shape_pixels;

  std::size_t size() const { return images.size(); }
  bool empty() const { return images.empty(); }
};

// Throws InvalidArgument if sizes, pixel ranges or labels are inconsistent.
void ValidateDataset(const LabeledDataset& dataset);

// Shape classes in label order. Only the first `class_count` are used.
inline constexpr int kMaxShapeClasses = 6;
std::string_view ShapeName(int label);

struct ShapesConfig {
  int height = 16;
  int width = 16;
  int class_count = 4;
  int samples = 4000;
  Split split = Split::kTrain;
  double foreground_min = 0.6;
  double foreground_max = 1.0;
  double noise_amplitude = 0.3;
  std::uint64_t seed = 1;
};

// Throws InvalidArgument on an inconsistent config and DimensionError when a
// shape does not fit on the canvas.
void ValidateShapesConfig(const ShapesConfig& config);

// One shape per image at a uniformly random position, drawn with a single
// foreground intensity over uniform background noise. The split is part of
// the random stream identity, so train and test never coincide.
LabeledDataset GenerateShapes(const ShapesConfig& config);

// Two shapes of distinct classes per image, with disjoint bounding boxes. The
// label is the class of the first shape. Throws NumericalError if a placement
// cannot be found within the retry budget.
LabeledDataset GenerateTwoObject(const ShapesConfig& config,
                                 int max_placement_attempts = 1000);

// Binary "SSDS" format, version 1. Pixels are stored as 32-bit floats;
// generated datasets are already float-representable so the round trip is
// exact. Ground-truth shape sets and the split tag are not stored.
void SaveDataset(const LabeledDataset& dataset, const std::string& path);
LabeledDataset LoadDataset(const std::string& path,
                           Split split = Split::kUnspecified);

std::string EncodeDataset(const LabeledDataset& dataset);
LabeledDataset DecodeDataset(std::string bytes, const std::string& source,
                             Split split = Split::kUnspecified);

}  // namespace soundsal

#endif  // SOUNDSAL_DATASET_H_
