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

#ifndef SOUNDSAL_TESTS_TEST_UTIL_H_
#define SOUNDSAL_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "soundsal/grid.h"
#include "soundsal/mlp.h"
#include "soundsal/random.h"

namespace soundsal::testing {

// Central finite differences of a scalar function of a flat parameter vector.
// Independent of every analytic gradient in the library.
inline std::vector<double> CentralDifferences(
    std::vector<double> point,
    const std::function<double(const std::vector<double>&)>& fn,
    double step = 1e-5) {
  std::vector<double> out(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) {
    const double saved = point[i];
    point[i] = saved + step;
    const double up = fn(point);
    point[i] = saved - step;
    const double down = fn(point);
    point[i] = saved;
    out[i] = (up - down) / (2.0 * step);
  }
  return out;
}

// Largest entrywise |a - b| / max(|a|, |b|, floor).
inline double MaxRelativeError(const std::vector<double>& a,
                               const std::vector<double>& b,
                               double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

inline Grid RandomGrid(int h, int w, RandomStream& stream, double lo = 0.0,
                       double hi = 1.0) {
  Grid g(h, w);
  for (double& v : g.values()) v = lo + (hi - lo) * stream.NextReal();
  return g;
}

inline MlpClassifier RandomModel(int input_dim, int hidden, int classes,
                                 RandomStream& stream, double scale = 0.5) {
  MlpClassifier m = MlpClassifier::Zeros(input_dim, hidden, classes);
  for (auto* t : {&m.w1, &m.b1, &m.w2, &m.b2}) {
    for (double& v : *t) v = scale * stream.NextGaussian();
  }
  return m;
}

inline std::vector<double> ToVector(const Grid& g) {
  return std::vector<double>(g.values().begin(), g.values().end());
}

}  // namespace soundsal::testing

#endif  // SOUNDSAL_TESTS_TEST_UTIL_H_
