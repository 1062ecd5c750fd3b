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

#ifndef SOUNDSAL_GRID_H_
#define SOUNDSAL_GRID_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace soundsal {

// Dense row-major 2-D grid of doubles. Used for images, heatmaps and mask
// parameters alike.
class Grid {
 public:
  Grid() = default;
  Grid(int height, int width, double fill = 0.0);
  Grid(int height, int width, std::vector<double> values);

  static Grid FromRows(std::initializer_list<std::initializer_list<double>> rows);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(int row, int col) {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }
  double operator()(int row, int col) const {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }
  double& operator[](std::size_t flat) { return values_[flat]; }
  double operator[](std::size_t flat) const { return values_[flat]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool SameShape(const Grid& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  bool operator==(const Grid& other) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

using Image = Grid;

// Throws DimensionError unless both grids have the same shape.
void CheckSameShape(const Grid& a, const Grid& b, const char* what);

bool AllFinite(const Grid& grid);
double Sum(const Grid& grid);
double Mean(const Grid& grid);
double Min(const Grid& grid);
double Max(const Grid& grid);
Grid Transpose(const Grid& grid);

// Upsamples by an integer factor. Low-resolution cell k has its center at
// output coordinate (k + 0.5) * factor - 0.5; outputs outside the lattice of
// centers are clamped to the border cells. factor == 1 is the identity.
Grid BilinearUpsample(const Grid& low, int factor);

// Adjoint (transpose) of BilinearUpsample: maps a gradient with respect to the
// upsampled grid to a gradient with respect to the low-resolution grid.
Grid BilinearUpsampleAdjoint(const Grid& high_gradient, int factor);

// Resizes to an arbitrary shape with the same half-pixel center convention.
// For integer factors this agrees with BilinearUpsample.
Grid ResizeBilinear(const Grid& grid, int height, int width);

// Anisotropic total variation: sum of absolute horizontal and vertical
// neighbor differences.
double TotalVariation(const Grid& grid);

// A subgradient of TotalVariation. Ties (equal neighbors) contribute 0.
Grid TotalVariationSubgradient(const Grid& grid);

// Separable Gaussian blur, radius ceil(3 sigma), symmetric reflection at the
// borders, kernel normalized to sum to one.
Grid GaussianBlur(const Grid& grid, double sigma);

// The normalized 1-D kernel used by GaussianBlur, of length 2*radius+1.
std::vector<double> GaussianKernel(double sigma);

}  // namespace soundsal

#endif  // SOUNDSAL_GRID_H_
