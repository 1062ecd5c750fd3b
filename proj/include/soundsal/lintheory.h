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

#ifndef SOUNDSAL_LINTHEORY_H_
#define SOUNDSAL_LINTHEORY_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "soundsal/random.h"

namespace soundsal {

// A linear classifier x -> sign(w . x) and one labeled input. Both vectors
// have unit norm and coordinates bounded by 10 / sqrt(d); gamma = y (w . x)
// is the realized margin.
struct LinearInstance {
  std::vector<double> w;
  std::vector<double> x;
  int y = 1;
  double gamma = 0.0;

  int dimension() const { return static_cast<int>(w.size()); }
};

// Throws InvalidArgument if any LinearInstance invariant fails.
void ValidateInstance(const LinearInstance& instance);

struct SampledInstance {
  LinearInstance instance;
  std::uint64_t attempts = 0;
};

// Normalized Gaussian w and x, resampled until the coordinate bound holds and
// |w . x| >= gamma_target; y is the sign of w . x. Throws NumericalError when
// the attempt budget runs out.
SampledInstance SampleInstance(int dimension, double gamma_target,
                               RandomStream& stream,
                               std::uint64_t max_attempts = 1'000'000);

// Applies one uniformly random permutation to w and x jointly.
LinearInstance ShuffleCoords(const LinearInstance& instance, RandomStream& stream);

// Contiguous, non-wrapping coordinate block [start, start + length).
struct IntervalMask {
  int start = 0;
  int length = 0;

  bool operator==(const IntervalMask&) const = default;
};

// First interval of the given length (ascending start) whose contribution
// a * sum_{i in S} w_i x_i is positive, or nothing. `label` is +1 or -1.
std::optional<IntervalMask> IntervalCertify(const LinearInstance& instance,
                                            int label, int length);

struct GreedyCertificate {
  std::vector<int> indices;  // ascending
  bool certified = false;
};

// The `length` coordinates with the largest a * w_i * x_i (ties by ascending
// index); certified when their sum is positive.
GreedyCertificate GreedyCertify(const LinearInstance& instance, int label,
                                int length);

struct Proportion {
  double value = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Wilson score interval at 95%.
Proportion WilsonInterval(std::uint64_t successes, std::uint64_t trials);

struct TheoremRow {
  int length = 0;
  Proportion completeness;         // interval certifies the true label
  Proportion soundness_violation;  // interval certifies the wrong label
  Proportion greedy_violation;     // greedy set certifies the wrong label
};

struct TheoremExperimentResult {
  std::vector<TheoremRow> rows;
  std::uint64_t sampling_attempts = 0;  // total rejection-sampler draws
  std::uint64_t trials = 0;
};

// Each trial samples an instance, shuffles its coordinates and tests every
// interval length, using the stream (master_seed, trial). Results do not
// depend on the thread count.
TheoremExperimentResult TheoremExperiment(int dimension, double gamma,
                                          std::span<const int> lengths,
                                          std::uint64_t trials,
                                          std::uint64_t master_seed,
                                          int threads = 1);

}  // namespace soundsal

#endif  // SOUNDSAL_LINTHEORY_H_
