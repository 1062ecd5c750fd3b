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

#include <algorithm>
#include <atomic>

#include "soundsal/error.h"

namespace soundsal::kernels {

namespace scalar {

double Dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void Blend(std::span<const double> mask, std::span<const double> x,
           std::span<const double> fill, std::span<double> out) {
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const double v = mask[i] * x[i] + (1.0 - mask[i]) * fill[i];
    out[i] = std::clamp(v, std::min(x[i], fill[i]), std::max(x[i], fill[i]));
  }
}

}  // namespace scalar

namespace {

std::atomic<Backend>& ActiveSlot() {
  static std::atomic<Backend> slot{BestBackend()};
  return slot;
}

}  // namespace

bool BackendAvailable(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if defined(SOUNDSAL_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Backend BestBackend() {
  return BackendAvailable(Backend::kAvx2) ? Backend::kAvx2 : Backend::kScalar;
}

Backend ActiveBackend() { return ActiveSlot().load(std::memory_order_relaxed); }

void SetBackend(Backend backend) {
  if (!BackendAvailable(backend)) {
    throw InvalidArgument(std::string("kernel backend '") +
                          std::string(BackendName(backend)) +
                          "' is not supported on this CPU");
  }
  ActiveSlot().store(backend, std::memory_order_relaxed);
}

std::string_view BackendName(Backend backend) {
  return backend == Backend::kAvx2 ? "avx2" : "scalar";
}

std::optional<Backend> ParseBackend(std::string_view name) {
  if (name == "scalar") return Backend::kScalar;
  if (name == "avx2") return Backend::kAvx2;
  if (name == "auto") return BestBackend();
  return std::nullopt;
}

double Dot(std::span<const double> a, std::span<const double> b) {
#ifdef SOUNDSAL_HAVE_AVX2
  if (ActiveBackend() == Backend::kAvx2) return avx2::Dot(a, b);
#endif
  return scalar::Dot(a, b);
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
#ifdef SOUNDSAL_HAVE_AVX2
  if (ActiveBackend() == Backend::kAvx2) return avx2::Axpy(alpha, x, y);
#endif
  scalar::Axpy(alpha, x, y);
}

void Blend(std::span<const double> mask, std::span<const double> x,
           std::span<const double> fill, std::span<double> out) {
#ifdef SOUNDSAL_HAVE_AVX2
  if (ActiveBackend() == Backend::kAvx2) return avx2::Blend(mask, x, fill, out);
#endif
  scalar::Blend(mask, x, fill, out);
}

}  // namespace soundsal::kernels
