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

#include "overair/simd.hpp"

#ifdef OVERAIR_HAVE_NEON_KERNELS

#include <arm_neon.h>

namespace overair::simd::neon {

double Dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

void Axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t scale = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), scale, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

double SumSquares(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(x + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) sum += x[i] * x[i];
  return sum;
}

void ComplexMultiply(const Complex* a, const Complex* b, Complex* out,
                     std::size_t n, bool conjugate_b) {
  const double* pa = reinterpret_cast<const double*>(a);
  const double* pb = reinterpret_cast<const double*>(b);
  double* po = reinterpret_cast<double*>(out);
  const double sign = conjugate_b ? -1.0 : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const float64x2_t va = vld1q_f64(pa + 2 * i);           // ar ai
    const double br = pb[2 * i];
    const double bi = sign * pb[2 * i + 1];
    const float64x2_t swapped = vextq_f64(va, va, 1);       // ai ar
    const float64x2_t prod_re = vmulq_n_f64(va, br);        // ar*br ai*br
    const float64x2_t signs = {-bi, bi};
    vst1q_f64(po + 2 * i, vfmaq_f64(prod_re, swapped, signs));
  }
}

}  // namespace overair::simd::neon

#endif  // OVERAIR_HAVE_NEON_KERNELS
