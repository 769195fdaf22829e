// Copyright 2026 The cbq Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <limits>

#include "cbq/kernels.h"

#define CBQ_AVX2 __attribute__((target("avx2")))

namespace cbq::kernels::avx2 {

CBQ_AVX2 void WalshHadamard(std::span<double> data) {
  const std::size_t n = data.size();
  double* d = data.data();
  if (n < 4) {
    scalar::WalshHadamard(data);
    return;
  }
  // h = 1 and h = 2 stay inside one 256-bit register.
  for (std::size_t i = 0; i < n; i += 4) {
    __m256d v = _mm256_loadu_pd(d + i);
    __m256d sw = _mm256_permute_pd(v, 0b0101);
    v = _mm256_blend_pd(_mm256_add_pd(v, sw), _mm256_sub_pd(sw, v), 0b1010);
    sw = _mm256_permute2f128_pd(v, v, 0x01);
    v = _mm256_blend_pd(_mm256_add_pd(v, sw), _mm256_sub_pd(sw, v), 0b1100);
    _mm256_storeu_pd(d + i, v);
  }
  for (std::size_t h = 4; h < n; h *= 2) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      for (std::size_t j = i; j < i + h; j += 4) {
        const __m256d a = _mm256_loadu_pd(d + j);
        const __m256d b = _mm256_loadu_pd(d + j + h);
        _mm256_storeu_pd(d + j, _mm256_add_pd(a, b));
        _mm256_storeu_pd(d + j + h, _mm256_sub_pd(a, b));
      }
    }
  }
}

CBQ_AVX2 double Dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p =
        _mm256_mul_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
    acc = _mm256_add_pd(acc, p);
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  double s = (lane[0] + lane[1]) + (lane[2] + lane[3]);
  for (; i < n; ++i) {
    const double p = a[i] * b[i];
    s = s + p;
  }
  return s;
}

CBQ_AVX2 void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d p = _mm256_mul_pd(va, _mm256_loadu_pd(x.data() + i));
    _mm256_storeu_pd(y.data() + i, _mm256_add_pd(_mm256_loadu_pd(y.data() + i), p));
  }
  for (; i < n; ++i) {
    const double p = alpha * x[i];
    y[i] = y[i] + p;
  }
}

CBQ_AVX2 double MaxAbs(std::span<const double> a) {
  const std::size_t n = a.size();
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(a.data() + i)));
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, m);
  double r = std::max(std::max(lane[0], lane[1]), std::max(lane[2], lane[3]));
  for (; i < n; ++i) r = std::max(r, std::fabs(a[i]));
  return r;
}

CBQ_AVX2 double MaxStep(std::span<const double> x, std::span<const double> dx) {
  const std::size_t n = x.size();
  const double inf = std::numeric_limits<double>::infinity();
  const __m256d vinf = _mm256_set1_pd(inf);
  const __m256d zero = _mm256_setzero_pd();
  __m256d m = vinf;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vd = _mm256_loadu_pd(dx.data() + i);
    const __m256d neg = _mm256_cmp_pd(vd, zero, _CMP_LT_OQ);
    const __m256d ratio = _mm256_div_pd(_mm256_sub_pd(zero, _mm256_loadu_pd(x.data() + i)), vd);
    m = _mm256_min_pd(m, _mm256_blendv_pd(vinf, ratio, neg));
  }
  alignas(32) double lane[4];
  _mm256_store_pd(lane, m);
  double r = std::min(std::min(lane[0], lane[1]), std::min(lane[2], lane[3]));
  for (; i < n; ++i) {
    if (dx[i] < 0.0) r = std::min(r, (0.0 - x[i]) / dx[i]);
  }
  return r;
}

}  // namespace cbq::kernels::avx2
