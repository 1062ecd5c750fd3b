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

#ifndef SOUNDSAL_KERNELS_H_
#define SOUNDSAL_KERNELS_H_

#include <optional>
#include <span>
#include <string_view>

namespace soundsal::kernels {

// The dense inner loops (network matrix-vector products and the composite
// blend) exist in a portable scalar form and an AVX2+FMA form. The scalar
// form is the reference; the vector form is selected at startup when the CPU
// supports it. Results agree to rounding, not bit-for-bit, so a run is only
// reproducible under the same backend.
enum class Backend { kScalar, kAvx2 };

bool BackendAvailable(Backend backend);
Backend ActiveBackend();
// Throws InvalidArgument if the backend is not available on this CPU.
void SetBackend(Backend backend);
std::string_view BackendName(Backend backend);
std::optional<Backend> ParseBackend(std::string_view name);
// Widest available backend.
Backend BestBackend();

// Dispatching entry points.
double Dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
// out = mask * x + (1 - mask) * fill, clamped to the [x, fill] interval.
void Blend(std::span<const double> mask, std::span<const double> x,
           std::span<const double> fill, std::span<double> out);

namespace scalar {
double Dot(std::span<const double> a, std::span<const double> b);
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
void Blend(std::span<const double> mask, std::span<const double> x,
           std::span<const double> fill, std::span<double> out);
}  // namespace scalar

#ifdef SOUNDSAL_HAVE_AVX2
namespace avx2 {
double Dot(std::span<const double> a, std::span<const double> b);
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
void Blend(std::span<const double> mask, std::span<const double> x,
           std::span<const double> fill, std::span<double> out);
}  // namespace avx2
#endif

}  // namespace soundsal::kernels

#endif  // SOUNDSAL_KERNELS_H_
