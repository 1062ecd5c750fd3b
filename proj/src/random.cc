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

#include "soundsal/random.h"

#include <cmath>
#include <numbers>

#include "soundsal/error.h"

namespace soundsal {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}  // namespace

std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t CombineIds(std::uint64_t a, std::uint64_t b) {
  return Mix64(a * kGolden + Mix64(b + 0x632be59bd9b4e019ULL));
}

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t task_id)
    : master_seed_(master_seed),
      task_id_(task_id),
      key_(CombineIds(master_seed, task_id)) {}

std::uint64_t RandomStream::NextU64() {
  ++counter_;
  // Two rounds so that nearby keys do not produce shifted copies of each
  // other's sequences.
  return Mix64(Mix64(key_ + counter_ * kGolden) ^ key_);
}

double RandomStream::NextReal() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::NextBelow(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("NextBelow bound must be positive");
  // Lemire's multiply-shift with rejection of the biased low range.
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const unsigned __int128 product =
        static_cast<unsigned __int128>(NextU64()) * bound;
    if (static_cast<std::uint64_t>(product) >= threshold) {
      return static_cast<std::uint64_t>(product >> 64);
    }
  }
}

double RandomStream::NextGaussian() {
  const double u1 = 1.0 - NextReal();  // (0, 1]
  const double u2 = NextReal();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

RandomStream RandomStream::Derive(std::uint64_t subtask) const {
  return RandomStream(key_, subtask);
}

}  // namespace soundsal
