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

#include "soundsal/grid.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "soundsal/error.h"

namespace soundsal {

namespace {

// Per output coordinate: the two low-resolution taps and the weight of the
// second one.
struct Tap {
  int lo;
  int hi;
  double t;
};

std::vector<Tap> InterpolationTaps(int out_len, int in_len) {
  std::vector<Tap> taps(out_len);
  const double scale = static_cast<double>(in_len) / out_len;
  for (int i = 0; i < out_len; ++i) {
    double u = (i + 0.5) * scale - 0.5;
    u = std::clamp(u, 0.0, static_cast<double>(in_len - 1));
    const int lo = static_cast<int>(std::floor(u));
    const int hi = std::min(lo + 1, in_len - 1);
    taps[i] = {lo, hi, u - lo};
  }
  return taps;
}

int Reflect(int index, int len) {
  const int period = 2 * len;
  index %= period;
  if (index < 0) index += period;
  return index < len ? index : period - 1 - index;
}

}  // namespace

Grid::Grid(int height, int width, double fill)
    : height_(height), width_(width) {
  if (height < 0 || width < 0) {
    throw DimensionError("grid dimensions must be non-negative");
  }
  values_.assign(static_cast<std::size_t>(height) * width, fill);
}

Grid::Grid(int height, int width, std::vector<double> values)
    : height_(height), width_(width), values_(std::move(values)) {
  if (height < 0 || width < 0 ||
      values_.size() != static_cast<std::size_t>(height) * width) {
    throw DimensionError("grid value count does not match " +
                         std::to_string(height) + "x" + std::to_string(width));
  }
}

Grid Grid::FromRows(std::initializer_list<std::initializer_list<double>> rows) {
  const int height = static_cast<int>(rows.size());
  const int width = height == 0 ? 0 : static_cast<int>(rows.begin()->size());
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(height) * width);
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != width) {
      throw DimensionError("ragged rows");
    }
    values.insert(values.end(), row.begin(), row.end());
  }
  return Grid(height, width, std::move(values));
}

void CheckSameShape(const Grid& a, const Grid& b, const char* what) {
  if (!a.SameShape(b)) {
    throw DimensionError(std::string(what) + ": shape " +
                         std::to_string(a.height()) + "x" +
                         std::to_string(a.width()) + " vs " +
                         std::to_string(b.height()) + "x" +
                         std::to_string(b.width()));
  }
}

bool AllFinite(const Grid& grid) {
  return std::all_of(grid.values().begin(), grid.values().end(),
                     [](double v) { return std::isfinite(v); });
}

double Sum(const Grid& grid) {
  double total = 0.0;
  for (double v : grid.values()) total += v;
  return total;
}

double Mean(const Grid& grid) {
  return grid.empty() ? 0.0 : Sum(grid) / static_cast<double>(grid.size());
}

double Min(const Grid& grid) {
  return *std::min_element(grid.values().begin(), grid.values().end());
}

double Max(const Grid& grid) {
  return *std::max_element(grid.values().begin(), grid.values().end());
}

Grid Transpose(const Grid& grid) {
  Grid out(grid.width(), grid.height());
  for (int i = 0; i < grid.height(); ++i) {
    for (int j = 0; j < grid.width(); ++j) out(j, i) = grid(i, j);
  }
  return out;
}

Grid ResizeBilinear(const Grid& grid, int height, int width) {
  if (grid.empty() || height <= 0 || width <= 0) {
    throw DimensionError("cannot resize an empty grid");
  }
  const auto rows = InterpolationTaps(height, grid.height());
  const auto cols = InterpolationTaps(width, grid.width());
  Grid out(height, width);
  for (int i = 0; i < height; ++i) {
    const Tap& r = rows[i];
    for (int j = 0; j < width; ++j) {
      const Tap& c = cols[j];
      // std::lerp keeps constants exact and outputs inside [min, max].
      const double top = std::lerp(grid(r.lo, c.lo), grid(r.lo, c.hi), c.t);
      const double bottom = std::lerp(grid(r.hi, c.lo), grid(r.hi, c.hi), c.t);
      out(i, j) = std::lerp(top, bottom, r.t);
    }
  }
  return out;
}

Grid BilinearUpsample(const Grid& low, int factor) {
  if (factor < 1) throw InvalidArgument("upsampling factor must be >= 1");
  if (factor == 1) return low;
  return ResizeBilinear(low, low.height() * factor, low.width() * factor);
}

Grid BilinearUpsampleAdjoint(const Grid& high_gradient, int factor) {
  if (factor < 1) throw InvalidArgument("upsampling factor must be >= 1");
  if (high_gradient.height() % factor != 0 ||
      high_gradient.width() % factor != 0) {
    throw DimensionError("grid size " + std::to_string(high_gradient.height()) +
                         "x" + std::to_string(high_gradient.width()) +
                         " not divisible by factor " + std::to_string(factor));
  }
  if (factor == 1) return high_gradient;
  const int low_h = high_gradient.height() / factor;
  const int low_w = high_gradient.width() / factor;
  const auto rows = InterpolationTaps(high_gradient.height(), low_h);
  const auto cols = InterpolationTaps(high_gradient.width(), low_w);
  Grid out(low_h, low_w);
  for (int i = 0; i < high_gradient.height(); ++i) {
    const Tap& r = rows[i];
    for (int j = 0; j < high_gradient.width(); ++j) {
      const Tap& c = cols[j];
      const double g = high_gradient(i, j);
      out(r.lo, c.lo) += (1.0 - r.t) * (1.0 - c.t) * g;
      out(r.lo, c.hi) += (1.0 - r.t) * c.t * g;
      out(r.hi, c.lo) += r.t * (1.0 - c.t) * g;
      out(r.hi, c.hi) += r.t * c.t * g;
    }
  }
  return out;
}

double TotalVariation(const Grid& grid) {
  double tv = 0.0;
  for (int i = 0; i < grid.height(); ++i) {
    for (int j = 0; j + 1 < grid.width(); ++j) {
      tv += std::abs(grid(i, j + 1) - grid(i, j));
    }
  }
  for (int i = 0; i + 1 < grid.height(); ++i) {
    for (int j = 0; j < grid.width(); ++j) {
      tv += std::abs(grid(i + 1, j) - grid(i, j));
    }
  }
  return tv;
}

Grid TotalVariationSubgradient(const Grid& grid) {
  auto sign = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
  Grid out(grid.height(), grid.width());
  for (int i = 0; i < grid.height(); ++i) {
    for (int j = 0; j + 1 < grid.width(); ++j) {
      const double s = sign(grid(i, j + 1) - grid(i, j));
      out(i, j + 1) += s;
      out(i, j) -= s;
    }
  }
  for (int i = 0; i + 1 < grid.height(); ++i) {
    for (int j = 0; j < grid.width(); ++j) {
      const double s = sign(grid(i + 1, j) - grid(i, j));
      out(i + 1, j) += s;
      out(i, j) -= s;
    }
  }
  return out;
}

std::vector<double> GaussianKernel(double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("blur sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    kernel[t + radius] = std::exp(-(t * t) / (2.0 * sigma * sigma));
    total += kernel[t + radius];
  }
  for (double& k : kernel) k /= total;
  return kernel;
}

Grid GaussianBlur(const Grid& grid, double sigma) {
  const std::vector<double> kernel = GaussianKernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  Grid horizontal(grid.height(), grid.width());
  for (int i = 0; i < grid.height(); ++i) {
    for (int j = 0; j < grid.width(); ++j) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        acc += kernel[t + radius] * grid(i, Reflect(j + t, grid.width()));
      }
      horizontal(i, j) = acc;
    }
  }
  Grid out(grid.height(), grid.width());
  for (int i = 0; i < grid.height(); ++i) {
    for (int j = 0; j < grid.width(); ++j) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        acc += kernel[t + radius] * horizontal(Reflect(i + t, grid.height()), j);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace soundsal
