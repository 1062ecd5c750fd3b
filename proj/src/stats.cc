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

#include "soundsal/stats.h"

#include <cmath>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "soundsal/error.h"

namespace soundsal {

MeanInterval MeanConfidenceInterval(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw InvalidArgument("confidence interval needs at least two values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  return {mean, mean - t * se, mean + t * se, n};
}

MeanInterval PairedDifference(std::span<const double> before,
                              std::span<const double> after) {
  if (before.size() != after.size()) {
    throw DimensionError("paired samples differ in length");
  }
  std::vector<double> diff(before.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = after[i] - before[i];
  return MeanConfidenceInterval(diff);
}

}  // namespace soundsal
