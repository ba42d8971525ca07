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

#include <atomic>
#include <cstdlib>
#include <string>

#include "overair/error.hpp"
#include "overair/simd.hpp"

namespace overair::simd {

namespace {

Isa DetectWidest() {
#ifdef OVERAIR_HAVE_AVX2_KERNELS
  if (IsaSupported(Isa::kAvx2)) return Isa::kAvx2;
#endif
#ifdef OVERAIR_HAVE_NEON_KERNELS
  if (IsaSupported(Isa::kNeon)) return Isa::kNeon;
#endif
  return Isa::kScalar;
}

Isa InitialIsa() {
  if (const char* env = std::getenv("OVERAIR_SIMD")) {
    const std::string value(env);
    if (value == "scalar") return Isa::kScalar;
    if (value == "avx2" && IsaSupported(Isa::kAvx2)) return Isa::kAvx2;
    if (value == "neon" && IsaSupported(Isa::kNeon)) return Isa::kNeon;
  }
  return DetectWidest();
}

std::atomic<Isa>& Current() {
  static std::atomic<Isa> isa{InitialIsa()};
  return isa;
}

void CheckSameSize(std::size_t a, std::size_t b, const char* op) {
  Require(a == b, ErrorKind::kInvalidInput,
          std::string(op) + ": operand sizes differ");
}

}  // namespace

std::string_view IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar: return "scalar";
    case Isa::kAvx2: return "avx2";
    case Isa::kNeon: return "neon";
  }
  return "unknown";
}

bool IsaSupported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#ifdef OVERAIR_HAVE_AVX2_KERNELS
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::kNeon:
#ifdef OVERAIR_HAVE_NEON_KERNELS
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa ActiveIsa() { return Current().load(std::memory_order_relaxed); }

void ForceIsa(Isa isa) {
  Current().store(IsaSupported(isa) ? isa : Isa::kScalar,
                  std::memory_order_relaxed);
}

double Dot(std::span<const double> a, std::span<const double> b) {
  CheckSameSize(a.size(), b.size(), "Dot");
  switch (ActiveIsa()) {
#ifdef OVERAIR_HAVE_AVX2_KERNELS
    case Isa::kAvx2: return avx2::Dot(a.data(), b.data(), a.size());
#endif
#ifdef OVERAIR_HAVE_NEON_KERNELS
    case Isa::kNeon: return neon::Dot(a.data(), b.data(), a.size());
#endif
    default: return scalar::Dot(a.data(), b.data(), a.size());
  }
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  CheckSameSize(x.size(), y.size(), "Axpy");
  switch (ActiveIsa()) {
#ifdef OVERAIR_HAVE_AVX2_KERNELS
    case Isa::kAvx2: return avx2::Axpy(alpha, x.data(), y.data(), x.size());
#endif
#ifdef OVERAIR_HAVE_NEON_KERNELS
    case Isa::kNeon: return neon::Axpy(alpha, x.data(), y.data(), x.size());
#endif
    default: return scalar::Axpy(alpha, x.data(), y.data(), x.size());
  }
}

double SumSquares(std::span<const double> x) {
  switch (ActiveIsa()) {
#ifdef OVERAIR_HAVE_AVX2_KERNELS
    case Isa::kAvx2: return avx2::SumSquares(x.data(), x.size());
#endif
#ifdef OVERAIR_HAVE_NEON_KERNELS
    case Isa::kNeon: return neon::SumSquares(x.data(), x.size());
#endif
    default: return scalar::SumSquares(x.data(), x.size());
  }
}

void ComplexMultiply(std::span<const Complex> a, std::span<const Complex> b,
                     std::span<Complex> out, bool conjugate_b) {
  CheckSameSize(a.size(), b.size(), "ComplexMultiply");
  CheckSameSize(a.size(), out.size(), "ComplexMultiply");
  switch (ActiveIsa()) {
#ifdef OVERAIR_HAVE_AVX2_KERNELS
    case Isa::kAvx2:
      return avx2::ComplexMultiply(a.data(), b.data(), out.data(), a.size(),
                                   conjugate_b);
#endif
#ifdef OVERAIR_HAVE_NEON_KERNELS
    case Isa::kNeon:
      return neon::ComplexMultiply(a.data(), b.data(), out.data(), a.size(),
                                   conjugate_b);
#endif
    default:
      return scalar::ComplexMultiply(a.data(), b.data(), out.data(), a.size(),
                                     conjugate_b);
  }
}

}  // namespace overair::simd
