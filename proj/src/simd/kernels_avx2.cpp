// Copyright 2026 The Overair Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "overair/simd.hpp"

#ifdef OVERAIR_HAVE_AVX2_KERNELS

#include <immintrin.h>

namespace overair::simd::avx2 {

namespace {

inline double HorizontalSum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

double Dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double sum = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void Axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d scale = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d updated = _mm256_fmadd_pd(scale, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, updated);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double SumSquares(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d v0 = _mm256_loadu_pd(x + i);
    const __m256d v1 = _mm256_loadu_pd(x + i + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  double sum = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) sum += x[i] * x[i];
  return sum;
}

void ComplexMultiply(const Complex* a, const Complex* b, Complex* out,
                     std::size_t n, bool conjugate_b) {
  // Two complex values per register, interleaved (re, im, re, im).
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  double* po = reinterpret_cast<double*>(out);
  const __m256d flip_imag = _mm256_setr_pd(0.0, -0.0, 0.0, -0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    if (conjugate_b) vb = _mm256_xor_pd(vb, flip_imag);
    const __m256d b_re = _mm256_movedup_pd(vb);        // br br
    const __m256d b_im = _mm256_permute_pd(vb, 0xF);   // bi bi
    const __m256d a_swap = _mm256_permute_pd(va, 0x5); // ai ar
    // (ar*br - ai*bi, ai*br + ar*bi)
    const __m256d result =
        _mm256_fmaddsub_pd(va, b_re, _mm256_mul_pd(a_swap, b_im));
    _mm256_storeu_pd(po + 2 * i, result);
  }
  if (i < n) scalar::ComplexMultiply(a + i, b + i, out + i, n - i, conjugate_b);
}

}  // namespace overair::simd::avx2

#endif  // OVERAIR_HAVE_AVX2_KERNELS
