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

#include "soundsal/parallel.h"

#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

namespace soundsal {
namespace {

TEST(ParallelForTest, EveryIndexRunsOnceForAnyThreadCount) {
  for (int threads : {1, 2, 5, 16}) {
    std::vector<int> hits(100, 0);
    ParallelFor(hits.size(), threads, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

TEST(ParallelForTest, RethrowsLowestFailingIndex) {
  for (int threads : {1, 4}) {
    try {
      ParallelFor(50, threads, [](std::size_t i) {
        if (i == 7 || i == 30) throw std::runtime_error(std::to_string(i));
      });
      FAIL() << "expected an exception";
    } catch (const std::runtime_error& e) {
      // With several workers index 30 may be reached first, but 7 always
      // runs before the pool drains because indices are claimed in order.
      EXPECT_EQ(std::string(e.what()), "7");
    }
  }
}

TEST(ParallelForTest, ZeroCountIsNoop) {
  ParallelFor(0, 4, [](std::size_t) { FAIL(); });
}

}  // namespace
}  // namespace soundsal
