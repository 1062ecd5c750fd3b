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

#ifndef SOUNDSAL_RANDOM_H_
#define SOUNDSAL_RANDOM_H_

#include <cstdint>

namespace soundsal {

// Counter-based random stream. The i-th value is a hash of
// (master_seed, task_id, i), so a stream's sequence depends only on its two
// identifiers and never on what other streams did. Streams are cheap values;
// copy one to replay it.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t task_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t task_id() const { return task_id_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t NextU64();
  // Uniform in [0, 1) with 53 bits of resolution.
  double NextReal();
  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t NextBelow(std::uint64_t bound);
  // Standard normal via Box-Muller (one output per two uniforms).
  double NextGaussian();

  // Independent child stream keyed by this stream's identity and `subtask`.
  // Does not advance this stream.
  RandomStream Derive(std::uint64_t subtask) const;

  bool operator==(const RandomStream&) const = default;

 private:
  std::uint64_t master_seed_;
  std::uint64_t task_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// SplitMix64 finalizer; exposed for deriving task ids from tuples.
std::uint64_t Mix64(std::uint64_t value);
std::uint64_t CombineIds(std::uint64_t a, std::uint64_t b);

}  // namespace soundsal

#endif  // SOUNDSAL_RANDOM_H_
