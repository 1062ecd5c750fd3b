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
#include <cmath>
#include <utility>

#include "binary_io.h"
#include "soundsal/error.h"
#include "soundsal/random.h"

namespace soundsal {

namespace {

constexpr char kDatasetMagic[] = "SSDS";
constexpr std::uint32_t kDatasetVersion = 1;

struct ShapeTemplate {
  std::string_view name;
  int height;
  int width;
  std::vector<std::pair<int, int>> cells;
};

const std::vector<ShapeTemplate>& Templates() {
  static const std::vector<ShapeTemplate> templates = [] {
    std::vector<ShapeTemplate> t;
    ShapeTemplate square{"square", 4, 4, {}};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) square.cells.emplace_back(i, j);
    ShapeTemplate cross{"cross", 5, 5, {}};
    for (int k = 0; k < 5; ++k) {
      cross.cells.emplace_back(2, k);
      if (k != 2) cross.cells.emplace_back(k, 2);
    }
    ShapeTemplate diagonal{"diagonal", 5, 5, {}};
    for (int k = 0; k < 5; ++k) diagonal.cells.emplace_back(k, k);
    ShapeTemplate ring{"ring", 5, 5, {}};
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (i == 0 || i == 4 || j == 0 || j == 4) ring.cells.emplace_back(i, j);
    ShapeTemplate anti{"anti_diagonal", 5, 5, {}};
    for (int k = 0; k < 5; ++k) anti.cells.emplace_back(k, 4 - k);
    ShapeTemplate bar{"bar", 2, 6, {}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 6; ++j) bar.cells.emplace_back(i, j);
    t = {square, cross, diagonal, ring, anti, bar};
    return t;
  }();
  return templates;
}

std::uint64_t SplitTag(Split split) { return static_cast<std::uint64_t>(split); }

float ToStored(double v) { return static_cast<float>(v); }

struct Placement {
  int row;
  int col;
};

Placement RandomPlacement(const ShapeTemplate& shape, int height, int width,
                          RandomStream& stream) {
  const int rows = height - shape.height + 1;
  const int cols = width - shape.width + 1;
  return {static_cast<int>(stream.NextBelow(rows)),
          static_cast<int>(stream.NextBelow(cols))};
}

Image NoiseBackground(const ShapesConfig& config, RandomStream& stream) {
  Image image(config.height, config.width);
  for (double& v : image.values()) {
    v = static_cast<double>(ToStored(config.noise_amplitude * stream.NextReal()));
  }
  return image;
}

std::vector<int> DrawShape(const ShapeTemplate& shape, Placement at,
                           double intensity, Image& image) {
  std::vector<int> pixels;
  pixels.reserve(shape.cells.size());
  for (const auto& [di, dj] : shape.cells) {
    const int i = at.row + di;
    const int j = at.col + dj;
    image(i, j) = intensity;
    pixels.push_back(i * image.width() + j);
  }
  std::sort(pixels.begin(), pixels.end());
  return pixels;
}

double DrawIntensity(const ShapesConfig& config, RandomStream& stream) {
  const double v = config.foreground_min +
                   (config.foreground_max - config.foreground_min) *
                       stream.NextReal();
  return static_cast<double>(ToStored(v));
}

}  // namespace

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kTest:
      return "test";
    case Split::kHoldout:
      return "holdout";
    case Split::kUnspecified:
      break;
  }
  return "unspecified";
}

std::string_view ShapeName(int label) {
  if (label < 0 || label >= kMaxShapeClasses) {
    throw InvalidArgument("no shape for label " + std::to_string(label));
  }
  return Templates()[label].name;
}

void ValidateDataset(const LabeledDataset& dataset) {
  if (dataset.images.size() != dataset.labels.size()) {
    throw InvalidArgument("dataset has " +
                          std::to_string(dataset.images.size()) + " images but " +
                          std::to_string(dataset.labels.size()) + " labels");
  }
  for (std::size_t k = 0; k < dataset.size(); ++k) {
    const Image& image = dataset.images[k];
    if (image.height() != dataset.height || image.width() != dataset.width) {
      throw DimensionError("image " + std::to_string(k) +
                           " does not match dataset dimensions");
    }
    for (double v : image.values()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidArgument("image " + std::to_string(k) +
                              " has a pixel outside [0, 1]");
      }
    }
    if (dataset.labels[k] < 0 || dataset.labels[k] >= dataset.class_count) {
      throw InvalidArgument("label " + std::to_string(dataset.labels[k]) +
                            " out of range for " +
                            std::to_string(dataset.class_count) + " classes");
    }
  }
}

void ValidateShapesConfig(const ShapesConfig& config) {
  if (config.class_count < 1 || config.class_count > kMaxShapeClasses) {
    throw InvalidArgument("class_count must be in [1, " +
                          std::to_string(kMaxShapeClasses) + "]");
  }
  if (config.samples < 0) throw InvalidArgument("samples must be >= 0");
  if (!(config.noise_amplitude >= 0.0) ||
      !(config.foreground_min > config.noise_amplitude) ||
      !(config.foreground_max >= config.foreground_min) ||
      !(config.foreground_max <= 1.0)) {
    throw InvalidArgument(
        "foreground range must lie in (noise_amplitude, 1] and be ordered");
  }
  for (int c = 0; c < config.class_count; ++c) {
    const ShapeTemplate& shape = Templates()[c];
    if (shape.height > config.height || shape.width > config.width) {
      throw DimensionError(std::string("shape '") + std::string(shape.name) +
                           "' does not fit on a " +
                           std::to_string(config.height) + "x" +
                           std::to_string(config.width) + " canvas");
    }
  }
}

LabeledDataset GenerateShapes(const ShapesConfig& config) {
  ValidateShapesConfig(config);
  LabeledDataset out;
  out.height = config.height;
  out.width = config.width;
  out.class_count = config.class_count;
  out.split = config.split;
  out.images.reserve(config.samples);
  for (int k = 0; k < config.samples; ++k) {
    RandomStream stream(config.seed,
                        CombineIds(SplitTag(config.split), static_cast<std::uint64_t>(k)));
    const int label = static_cast<int>(stream.NextBelow(config.class_count));
    const ShapeTemplate& shape = Templates()[label];
    const Placement at = RandomPlacement(shape, config.height, config.width, stream);
    const double intensity = DrawIntensity(config, stream);
    Image image = NoiseBackground(config, stream);
    out.shape_pixels.push_back({DrawShape(shape, at, intensity, image)});
    out.images.push_back(std::move(image));
    out.labels.push_back(label);
  }
  return out;
}

LabeledDataset GenerateTwoObject(const ShapesConfig& config,
                                 int max_placement_attempts) {
  ValidateShapesConfig(config);
  if (config.class_count < 2) {
    throw InvalidArgument("two-object images need at least two classes");
  }
  LabeledDataset out;
  out.height = config.height;
  out.width = config.width;
  out.class_count = config.class_count;
  out.split = config.split;
  // Distinct task namespace from the single-object generator.
  constexpr std::uint64_t kTwoObjectTag = 0x2000;
  for (int k = 0; k < config.samples; ++k) {
    RandomStream stream(config.seed,
                        CombineIds(kTwoObjectTag + SplitTag(config.split),
                                   static_cast<std::uint64_t>(k)));
    const int first = static_cast<int>(stream.NextBelow(config.class_count));
    int second = static_cast<int>(stream.NextBelow(config.class_count - 1));
    if (second >= first) ++second;
    const ShapeTemplate& a = Templates()[first];
    const ShapeTemplate& b = Templates()[second];
    const Placement pa = RandomPlacement(a, config.height, config.width, stream);
    Placement pb{};
    bool placed = false;
    for (int attempt = 0; attempt < max_placement_attempts; ++attempt) {
      pb = RandomPlacement(b, config.height, config.width, stream);
      const bool apart = pb.row >= pa.row + a.height ||
                         pa.row >= pb.row + b.height ||
                         pb.col >= pa.col + a.width ||
                         pa.col >= pb.col + b.width;
      if (apart) {
        placed = true;
        break;
      }
    }
    if (!placed) {
      throw NumericalError("could not place two disjoint shapes for sample " +
                           std::to_string(k) + " after " +
                           std::to_string(max_placement_attempts) + " attempts");
    }
    const double ia = DrawIntensity(config, stream);
    const double ib = DrawIntensity(config, stream);
    Image image = NoiseBackground(config, stream);
    std::vector<int> set_a = DrawShape(a, pa, ia, image);
    std::vector<int> set_b = DrawShape(b, pb, ib, image);
    out.shape_pixels.push_back({std::move(set_a), std::move(set_b)});
    out.images.push_back(std::move(image));
    out.labels.push_back(first);
  }
  return out;
}

std::string EncodeDataset(const LabeledDataset& dataset) {
  ValidateDataset(dataset);
  if (dataset.class_count > 255 || dataset.height > 65535 ||
      dataset.width > 65535) {
    throw InvalidArgument("dataset dimensions exceed the file format limits");
  }
  internal::ByteWriter writer;
  writer.Bytes(std::string_view(kDatasetMagic, 4));
  writer.Put<std::uint32_t>(kDatasetVersion);
  writer.Put<std::uint32_t>(static_cast<std::uint32_t>(dataset.size()));
  writer.Put<std::uint16_t>(static_cast<std::uint16_t>(dataset.height));
  writer.Put<std::uint16_t>(static_cast<std::uint16_t>(dataset.width));
  writer.Put<std::uint16_t>(static_cast<std::uint16_t>(dataset.class_count));
  for (std::size_t k = 0; k < dataset.size(); ++k) {
    writer.Put<std::uint8_t>(static_cast<std::uint8_t>(dataset.labels[k]));
    for (double v : dataset.images[k].values()) writer.Put<float>(ToStored(v));
  }
  return writer.buffer();
}

LabeledDataset DecodeDataset(std::string bytes, const std::string& source,
                             Split split) {
  internal::ByteReader reader(std::move(bytes), source);
  if (reader.remaining() < 4 || reader.Bytes(4) != std::string_view(kDatasetMagic, 4)) {
    throw FormatError(source + ": bad magic (expected SSDS)");
  }
  const auto version = reader.Get<std::uint32_t>();
  if (version != kDatasetVersion) {
    throw FormatError(source + ": unsupported dataset version " +
                      std::to_string(version));
  }
  LabeledDataset out;
  const auto count = reader.Get<std::uint32_t>();
  out.height = reader.Get<std::uint16_t>();
  out.width = reader.Get<std::uint16_t>();
  out.class_count = reader.Get<std::uint16_t>();
  out.split = split;
  const std::size_t pixels = static_cast<std::size_t>(out.height) * out.width;
  if (reader.remaining() != static_cast<std::size_t>(count) * (1 + 4 * pixels)) {
    throw FormatError(source + ": payload size does not match header (" +
                      std::to_string(count) + " samples of " +
                      std::to_string(out.height) + "x" +
                      std::to_string(out.width) + ")");
  }
  out.images.reserve(count);
  out.labels.reserve(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    out.labels.push_back(reader.Get<std::uint8_t>());
    std::vector<double> values(pixels);
    for (double& v : values) v = static_cast<double>(reader.Get<float>());
    out.images.emplace_back(out.height, out.width, std::move(values));
  }
  try {
    ValidateDataset(out);
  } catch (const Error& e) {
    throw FormatError(source + ": " + e.what());
  }
  return out;
}

void SaveDataset(const LabeledDataset& dataset, const std::string& path) {
  internal::WriteWholeFile(path, EncodeDataset(dataset));
}

LabeledDataset LoadDataset(const std::string& path, Split split) {
  return DecodeDataset(internal::ReadWholeFile(path), path, split);
}

}  // namespace soundsal
