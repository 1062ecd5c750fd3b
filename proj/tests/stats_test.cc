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

#include <gtest/gtest.h>

#include "soundsal/error.h"

namespace soundsal {
namespace {

// t(0.975, 4) = 2.776445; sd of 1..5 is sqrt(2.5).
TEST(MeanConfidenceInterval, MatchesTableQuantile) {
  const std::vector<double> v = {1, 2, 3, 4, 5};
  const MeanInterval m = MeanConfidenceInterval(v);
  EXPECT_DOUBLE_EQ(m.mean, 3.0);
  EXPECT_NEAR(m.ci_low, 3.0 - 2.776445 * std::sqrt(2.5 / 5.0), 1e-6);
  EXPECT_NEAR(m.ci_high, 3.0 + 2.776445 * std::sqrt(2.5 / 5.0), 1e-6);
  EXPECT_EQ(m.count, 5u);
  EXPECT_TRUE(m.ExcludesZero());
}

TEST(MeanConfidenceInterval, ConstantSampleHasZeroWidth) {
  const std::vector<double> v(4, 0.25);
  const MeanInterval m = MeanConfidenceInterval(v);
  EXPECT_DOUBLE_EQ(m.ci_low, 0.25);
  EXPECT_DOUBLE_EQ(m.ci_high, 0.25);
}

TEST(MeanConfidenceInterval, StraddlingZero) {
  const std::vector<double> v = {-1, 1, -2, 2};
  EXPECT_FALSE(MeanConfidenceInterval(v).ExcludesZero());
}

TEST(PairedDifference, IsAfterMinusBefore) {
  const std::vector<double> before = {1, 2, 3};
  const std::vector<double> after = {2, 4, 6};
  const MeanInterval d = PairedDifference(before, after);
  EXPECT_DOUBLE_EQ(d.mean, 2.0);
  // differences 1,2,3: t(0.975, 2) = 4.302653, sd 1
  EXPECT_NEAR(d.ci_low, 2.0 - 4.302653 / std::sqrt(3.0), 1e-6);
}

TEST(Stats, Errors) {
  const std::vector<double> one = {1.0};
  EXPECT_THROW(MeanConfidenceInterval(one), InvalidArgument);
  const std::vector<double> a = {1, 2};
  const std::vector<double> b = {1, 2, 3};
  EXPECT_THROW(PairedDifference(a, b), DimensionError);
}

}  // namespace
}  // namespace soundsal
