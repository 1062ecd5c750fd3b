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

#ifndef SOUNDSAL_HEATMAP_IO_H_
#define SOUNDSAL_HEATMAP_IO_H_

#include <string>

#include "soundsal/grid.h"
#include "soundsal/masker.h"

namespace soundsal {

// 8-bit binary PGM (P5, maxval 255) of the normalized map.
std::string EncodePgm(const Heatmap& map);
void WritePgm(const Heatmap& map, const std::string& path);

// Raw values, one grid row per line, shortest round-trip decimal form.
std::string EncodeGridCsv(const Grid& grid);
Grid DecodeGridCsv(const std::string& text, const std::string& source);
void WriteGridCsv(const Grid& grid, const std::string& path);
Grid ReadGridCsv(const std::string& path);

}  // namespace soundsal

#endif  // SOUNDSAL_HEATMAP_IO_H_
