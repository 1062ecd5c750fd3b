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

#include "soundsal/kernels.h"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "soundsal/error.h"
#include "soundsal/random.h"

namespace soundsal::kernels {
namespace {

std::vector<double> RandomVector(std::size_t n, RandomStream& stream) {
  std::vector<double> v(n);
  for (double& e : v) e = 2.0 * stream.NextReal() - 1.0;
  return v;
}

// Lengths cover the unrolled body, the 4-wide remainder loop and the scalar
// tail of the vector kernels.
const std::size_t kLengths[] = {0, 1, 3, 4, 5, 8, 15, 16, 17, 31, 64, 256, 1023};

TEST(KernelsTest, ScalarBackendAlwaysAvailable) {
  EXPECT_TRUE(BackendAvailable(Backend::kScalar));
  EXPECT_EQ(ParseBackend("scalar"), Backend::kScalar);
  EXPECT_EQ(ParseBackend("auto"), BestBackend());
  EXPECT_FALSE(ParseBackend("sse9").has_value());
}

TEST(KernelsTest, ScalarDotMatchesNaiveSum) {
  RandomStream stream(1, 0);
  const auto a = RandomVector(37, stream);
  const auto b = RandomVector(37, stream);
  long double expected = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) expected += static_cast<long double>(a[i]) * b[i];
  EXPECT_NEAR(scalar::Dot(a, b), static_cast<double>(expected), 1e-14);
}

#ifdef SOUNDSAL_HAVE_AVX2
class Avx2EquivalenceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!BackendAvailable(Backend::kAvx2)) GTEST_SKIP() << "CPU lacks AVX2/FMA";
  }
};

TEST_F(Avx2EquivalenceTest, DotAgreesWithScalar) {
  RandomStream stream(2, 0);
  for (std::size_t n : kLengths) {
    const auto a = RandomVector(n, stream);
    const auto b = RandomVector(n, stream);
    double magnitude = 0.0;
    for (std::size_t i = 0; i < n; ++i) magnitude += std::abs(a[i] * b[i]);
    EXPECT_NEAR(avx2::Dot(a, b), scalar::Dot(a, b), 1e-15 * (1.0 + magnitude))
        << "n=" << n;
  }
}

TEST_F(Avx2EquivalenceTest, AxpyAgreesWithScalar) {
  RandomStream stream(3, 0);
  for (std::size_t n : kLengths) {
    const auto x = RandomVector(n, stream);
    auto y_vec = RandomVector(n, stream);
    auto y_ref = y_vec;
    avx2::Axpy(-0.75, x, y_vec);
    scalar::Axpy(-0.75, x, y_ref);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y_vec[i], y_ref[i], 1e-15);
  }
}

TEST_F(Avx2EquivalenceTest, BlendAgreesWithScalarAndStaysBetweenInputs) {
  RandomStream stream(4, 0);
  for (std::size_t n : kLengths) {
    auto mask = RandomVector(n, stream);
    for (double& m : mask) m = std::abs(m);
    const auto x = RandomVector(n, stream);
    const auto fill = RandomVector(n, stream);
    std::vector<double> out_vec(n), out_ref(n);
    avx2::Blend(mask, x, fill, out_vec);
    scalar::Blend(mask, x, fill, out_ref);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(out_vec[i], out_ref[i], 1e-15);
      EXPECT_GE(out_vec[i], std::min(x[i], fill[i]));
      EXPECT_LE(out_vec[i], std::max(x[i], fill[i]));
    }
  }
}

TEST_F(Avx2EquivalenceTest, BlendEndpointsAreExact) {
  RandomStream stream(5, 0);
  const auto x = RandomVector(19, stream);
  const auto fill = RandomVector(19, stream);
  std::vector<double> ones(19, 1.0), zeros(19, 0.0), out(19);
  avx2::Blend(ones, x, fill, out);
  EXPECT_EQ(out, x);
  avx2::Blend(zeros, x, fill, out);
  EXPECT_EQ(out, fill);
}

TEST_F(Avx2EquivalenceTest, DispatchFollowsActiveBackend) {
  RandomStream stream(6, 0);
  const auto a = RandomVector(255, stream);
  const auto b = RandomVector(255, stream);
  const Backend saved = ActiveBackend();
  SetBackend(Backend::kScalar);
  EXPECT_EQ(Dot(a, b), scalar::Dot(a, b));
  SetBackend(Backend::kAvx2);
  EXPECT_EQ(Dot(a, b), avx2::Dot(a, b));
  SetBackend(saved);
}
#endif

}  // namespace
}  // namespace soundsal::kernels
