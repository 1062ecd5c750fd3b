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

#include "soundsal/heatmap_io.h"

#include <charconv>
#include <cmath>
#include <sstream>
#include <vector>

#include "binary_io.h"
#include "soundsal/error.h"

namespace soundsal {

std::string EncodePgm(const Heatmap& map) {
  const Grid normalized = map.Normalized();
  std::string out = "P5\n" + std::to_string(normalized.width()) + " " +
                    std::to_string(normalized.height()) + "\n255\n";
  out.reserve(out.size() + normalized.size());
  for (double v : normalized.values()) {
    out.push_back(static_cast<char>(
        static_cast<unsigned char>(std::lround(v * 255.0))));
  }
  return out;
}

void WritePgm(const Heatmap& map, const std::string& path) {
  internal::WriteWholeFile(path, EncodePgm(map));
}

std::string EncodeGridCsv(const Grid& grid) {
  std::string out;
  char buffer[64];
  for (int i = 0; i < grid.height(); ++i) {
    for (int j = 0; j < grid.width(); ++j) {
      if (j > 0) out.push_back(',');
      const auto res = std::to_chars(buffer, buffer + sizeof(buffer), grid(i, j));
      out.append(buffer, res.ptr);
    }
    out.push_back('\n');
  }
  return out;
}

Grid DecodeGridCsv(const std::string& text, const std::string& source) {
  std::vector<double> values;
  int height = 0;
  int width = -1;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int count = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      double v;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw FormatError(source + ": bad number on row " + std::to_string(height));
      }
      values.push_back(v);
      ++count;
      p = res.ptr;
      if (p == end) break;
      if (*p != ',') {
        throw FormatError(source + ": expected ',' on row " + std::to_string(height));
      }
      ++p;
    }
    if (width >= 0 && count != width) {
      throw FormatError(source + ": ragged row " + std::to_string(height));
    }
    width = count;
    ++height;
  }
  if (height == 0) throw FormatError(source + ": empty grid file");
  return Grid(height, width, std::move(values));
}

void WriteGridCsv(const Grid& grid, const std::string& path) {
  internal::WriteWholeFile(path, EncodeGridCsv(grid));
}

Grid ReadGridCsv(const std::string& path) {
  return DecodeGridCsv(internal::ReadWholeFile(path), path);
}

}  // namespace soundsal
