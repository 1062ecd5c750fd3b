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

#include "soundsal/lintheory.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "soundsal/error.h"
#include "soundsal/parallel.h"

namespace soundsal {

namespace {

constexpr double kNormTolerance = 1e-9;

void CheckLabel(int label) {
  if (label != 1 && label != -1) throw InvalidArgument("label must be +1 or -1");
}

void CheckLength(const LinearInstance& instance, int length) {
  if (length < 1 || length > instance.dimension()) {
    throw InvalidArgument("interval length " + std::to_string(length) +
                          " outside [1, " + std::to_string(instance.dimension()) + "]");
  }
}

double Norm(std::span<const double> v) {
  double ss = 0.0;
  for (double e : v) ss += e * e;
  return std::sqrt(ss);
}

double CoordinateBound(int dimension) { return 10.0 / std::sqrt(dimension); }

bool Normalize(std::vector<double>& v, double bound) {
  const double n = Norm(v);
  if (n == 0.0) return false;
  for (double& e : v) {
    e /= n;
    if (std::abs(e) > bound) return false;
  }
  return true;
}

}  // namespace

void ValidateInstance(const LinearInstance& inst) {
  const int d = inst.dimension();
  if (d < 1 || inst.x.size() != inst.w.size()) {
    throw InvalidArgument("w and x must be non-empty and of equal length");
  }
  if (std::abs(Norm(inst.w) - 1.0) > kNormTolerance ||
      std::abs(Norm(inst.x) - 1.0) > kNormTolerance) {
    throw InvalidArgument("w and x must have unit norm");
  }
  const double bound = CoordinateBound(d);
  for (int i = 0; i < d; ++i) {
    if (std::abs(inst.w[i]) > bound || std::abs(inst.x[i]) > bound) {
      throw InvalidArgument("coordinate exceeds 10/sqrt(d)");
    }
  }
  CheckLabel(inst.y);
  if (!(inst.gamma > 0.0)) throw InvalidArgument("margin must be positive");
}

SampledInstance SampleInstance(int dimension, double gamma_target,
                               RandomStream& stream, std::uint64_t max_attempts) {
  if (dimension < 1) throw InvalidArgument("dimension must be positive");
  if (!(gamma_target > 0.0)) throw InvalidArgument("target margin must be positive");
  const double bound = CoordinateBound(dimension);
  SampledInstance out;
  LinearInstance& inst = out.instance;
  inst.w.resize(dimension);
  inst.x.resize(dimension);
  while (out.attempts < max_attempts) {
    ++out.attempts;
    for (double& e : inst.w) e = stream.NextGaussian();
    for (double& e : inst.x) e = stream.NextGaussian();
    if (!Normalize(inst.w, bound) || !Normalize(inst.x, bound)) continue;
    const double score = std::inner_product(inst.w.begin(), inst.w.end(),
                                            inst.x.begin(), 0.0);
    if (std::abs(score) < gamma_target) continue;
    inst.y = score > 0.0 ? 1 : -1;
    inst.gamma = std::abs(score);
    return out;
  }
  throw NumericalError("no instance with margin " + std::to_string(gamma_target) +
                       " in dimension " + std::to_string(dimension) + " after " +
                       std::to_string(max_attempts) + " attempts");
}

LinearInstance ShuffleCoords(const LinearInstance& instance, RandomStream& stream) {
  LinearInstance out = instance;
  for (std::size_t i = out.w.size(); i > 1; --i) {
    const std::size_t j = stream.NextBelow(i);
    std::swap(out.w[i - 1], out.w[j]);
    std::swap(out.x[i - 1], out.x[j]);
  }
  return out;
}

std::optional<IntervalMask> IntervalCertify(const LinearInstance& instance,
                                            int label, int length) {
  CheckLabel(label);
  CheckLength(instance, length);
  const int d = instance.dimension();
  auto term = [&](int i) { return label * instance.w[i] * instance.x[i]; };
  double window = 0.0;
  for (int i = 0; i < length; ++i) window += term(i);
  for (int start = 0;; ++start) {
    if (window > 0.0) return IntervalMask{start, length};
    if (start + length >= d) return std::nullopt;
    window += term(start + length) - term(start);
  }
}

GreedyCertificate GreedyCertify(const LinearInstance& instance, int label,
                                int length) {
  CheckLabel(label);
  CheckLength(instance, length);
  std::vector<int> order(instance.dimension());
  std::iota(order.begin(), order.end(), 0);
  auto term = [&](int i) { return label * instance.w[i] * instance.x[i]; };
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return term(a) > term(b); });
  GreedyCertificate out;
  out.indices.assign(order.begin(), order.begin() + length);
  double total = 0.0;
  for (int i : out.indices) total += term(i);
  std::sort(out.indices.begin(), out.indices.end());
  out.certified = total > 0.0;
  return out;
}

Proportion WilsonInterval(std::uint64_t successes, std::uint64_t trials) {
  if (trials == 0) throw InvalidArgument("proportion of zero trials");
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  // The bounds at p = 0 and p = 1 are exactly 0 and 1; rounding would
  // otherwise leave them a few ulps inside.
  const double low = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double high = successes == trials ? 1.0 : std::min(1.0, center + half);
  return {p, low, high};
}

TheoremExperimentResult TheoremExperiment(int dimension, double gamma,
                                          std::span<const int> lengths,
                                          std::uint64_t trials,
                                          std::uint64_t master_seed, int threads) {
  if (trials == 0) throw InvalidArgument("theorem experiment needs trials > 0");
  if (lengths.empty()) throw InvalidArgument("no interval lengths given");
  for (int length : lengths) {
    if (length < 1 || length > dimension) {
      throw InvalidArgument("interval length " + std::to_string(length) +
                            " outside [1, " + std::to_string(dimension) + "]");
    }
  }
  struct TrialOutcome {
    std::vector<char> complete;
    std::vector<char> violated;
    std::vector<char> greedy;
    std::uint64_t attempts = 0;
  };
  std::vector<TrialOutcome> outcomes(trials);
  ParallelFor(trials, threads, [&](std::size_t t) {
    RandomStream stream(master_seed, t);
    SampledInstance sampled = SampleInstance(dimension, gamma, stream);
    const LinearInstance shuffled = ShuffleCoords(sampled.instance, stream);
    TrialOutcome& out = outcomes[t];
    out.attempts = sampled.attempts;
    for (int length : lengths) {
      out.complete.push_back(IntervalCertify(shuffled, shuffled.y, length).has_value());
      out.violated.push_back(IntervalCertify(shuffled, -shuffled.y, length).has_value());
      out.greedy.push_back(GreedyCertify(shuffled, -shuffled.y, length).certified);
    }
  });

  TheoremExperimentResult result;
  result.trials = trials;
  for (const TrialOutcome& o : outcomes) result.sampling_attempts += o.attempts;
  for (std::size_t k = 0; k < lengths.size(); ++k) {
    std::uint64_t complete = 0;
    std::uint64_t violated = 0;
    std::uint64_t greedy = 0;
    for (const TrialOutcome& o : outcomes) {
      complete += o.complete[k];
      violated += o.violated[k];
      greedy += o.greedy[k];
    }
    result.rows.push_back({lengths[k], WilsonInterval(complete, trials),
                           WilsonInterval(violated, trials),
                           WilsonInterval(greedy, trials)});
  }
  return result;
}

}  // namespace soundsal
