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

// Compiled with -mavx2 -mfma. Nothing in here may run unless
// BackendAvailable(Backend::kAvx2) returned true.

#include <immintrin.h>

#include <algorithm>

#include "soundsal/kernels.h"

namespace soundsal::kernels::avx2 {

double Dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4),
                           _mm256_loadu_pd(pb + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 8),
                           _mm256_loadu_pd(pb + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 12),
                           _mm256_loadu_pd(pb + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
  }
  const __m256d sum = _mm256_add_pd(_mm256_add_pd(acc0, acc1),
                                    _mm256_add_pd(acc2, acc3));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, sum);
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) total += pa[i] * pb[i];
  return total;
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const double* px = x.data();
  double* py = y.data();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(py + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(px + i),
                                             _mm256_loadu_pd(py + i)));
    _mm256_storeu_pd(py + i + 4,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(px + i + 4),
                                     _mm256_loadu_pd(py + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(py + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(px + i),
                                             _mm256_loadu_pd(py + i)));
  }
  for (; i < n; ++i) py[i] += alpha * px[i];
}

void Blend(std::span<const double> mask, std::span<const double> x,
           std::span<const double> fill, std::span<double> out) {
  const std::size_t n = mask.size();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d m = _mm256_loadu_pd(mask.data() + i);
    const __m256d vx = _mm256_loadu_pd(x.data() + i);
    const __m256d vf = _mm256_loadu_pd(fill.data() + i);
    const __m256d keep = _mm256_mul_pd(_mm256_sub_pd(one, m), vf);
    __m256d v = _mm256_fmadd_pd(m, vx, keep);
    v = _mm256_max_pd(v, _mm256_min_pd(vx, vf));
    v = _mm256_min_pd(v, _mm256_max_pd(vx, vf));
    _mm256_storeu_pd(out.data() + i, v);
  }
  for (; i < n; ++i) {
    const double v = mask[i] * x[i] + (1.0 - mask[i]) * fill[i];
    out[i] = std::clamp(v, std::min(x[i], fill[i]), std::max(x[i], fill[i]));
  }
}

}  // namespace soundsal::kernels::avx2
