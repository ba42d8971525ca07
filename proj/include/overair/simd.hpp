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

#pragma once

// Data-parallel inner loops shared by convolution, the acoustic model and the
// mel filterbank. Every kernel has a scalar reference implementation; wider
// variants are selected once at runtime and must agree with the reference to
// rounding (see tests/simd_test.cpp).

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace overair::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view IsaName(Isa isa);

// True when the running CPU can execute kernels built for `isa`.
bool IsaSupported(Isa isa);

// The ISA used by the dispatching entry points below. Chosen on first use:
// the widest supported ISA, unless OVERAIR_SIMD=scalar is set.
Isa ActiveIsa();

// Overrides the dispatch choice. Unsupported requests fall back to scalar.
// Not thread-safe with respect to concurrent kernel calls.
void ForceIsa(Isa isa);

using Complex = std::complex<double>;

double Dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void Axpy(double alpha, std::span<const double> x, std::span<double> y);
double SumSquares(std::span<const double> x);
// out[i] = a[i] * b[i], or a[i] * conj(b[i]) when conjugate_b is set.
void ComplexMultiply(std::span<const Complex> a, std::span<const Complex> b,
                     std::span<Complex> out, bool conjugate_b);

// Per-ISA implementations, exposed for equivalence testing. Sizes are checked
// by the dispatching wrappers, not here.
namespace scalar {
double Dot(const double* a, const double* b, std::size_t n);
void Axpy(double alpha, const double* x, double* y, std::size_t n);
double SumSquares(const double* x, std::size_t n);
void ComplexMultiply(const Complex* a, const Complex* b, Complex* out,
                     std::size_t n, bool conjugate_b);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define OVERAIR_HAVE_AVX2_KERNELS 1
namespace avx2 {
double Dot(const double* a, const double* b, std::size_t n);
void Axpy(double alpha, const double* x, double* y, std::size_t n);
double SumSquares(const double* x, std::size_t n);
void ComplexMultiply(const Complex* a, const Complex* b, Complex* out,
                     std::size_t n, bool conjugate_b);
}  // namespace avx2
#endif

#if defined(__ARM_NEON) || defined(__aarch64__)
#define OVERAIR_HAVE_NEON_KERNELS 1
namespace neon {
double Dot(const double* a, const double* b, std::size_t n);
void Axpy(double alpha, const double* x, double* y, std::size_t n);
double SumSquares(const double* x, std::size_t n);
void ComplexMultiply(const Complex* a, const Complex* b, Complex* out,
                     std::size_t n, bool conjugate_b);
}  // namespace neon
#endif

}  // namespace overair::simd
