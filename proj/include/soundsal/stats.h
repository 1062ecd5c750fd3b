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

#ifndef SOUNDSAL_STATS_H_
#define SOUNDSAL_STATS_H_

#include <cstddef>
#include <span>

namespace soundsal {

struct MeanInterval {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t count = 0;

  bool ExcludesZero() const { return ci_low > 0.0 || ci_high < 0.0; }
};

// Student-t 95% interval for the mean of `values`. Needs at least two values.
MeanInterval MeanConfidenceInterval(std::span<const double> values);

// Interval for the mean of after[i] - before[i].
MeanInterval PairedDifference(std::span<const double> before,
                              std::span<const double> after);

}  // namespace soundsal

#endif  // SOUNDSAL_STATS_H_
