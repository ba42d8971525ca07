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

#include "overair/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "overair/error.hpp"

namespace overair {

namespace {

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

// Plans live for the life of the process.
PlanPair GetPlans(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, PlanPair> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  std::vector<double> real(n);
  std::vector<Complex> spectrum(n / 2 + 1);
  auto* cplx = reinterpret_cast<fftw_complex*>(spectrum.data());
  const int size = static_cast<int>(n);
  PlanPair plans;
  plans.forward = fftw_plan_dft_r2c_1d(size, real.data(), cplx,
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.inverse = fftw_plan_dft_c2r_1d(
      size, cplx, real.data(),
      FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
  Require(plans.forward && plans.inverse, ErrorKind::kNumeric,
          "FFTW could not create a plan for size " + std::to_string(n));
  cache.emplace(n, plans);
  return plans;
}

}  // namespace

RealFft::RealFft(std::size_t size) : size_(size) {
  Require(size >= 2, ErrorKind::kInvalidInput, "FFT size must be >= 2");
  const PlanPair plans = GetPlans(size);
  forward_plan_ = plans.forward;
  inverse_plan_ = plans.inverse;
}

void RealFft::Forward(std::span<const double> in, std::span<Complex> out) const {
  Require(in.size() == size_ && out.size() == bins(), ErrorKind::kInvalidInput,
          "RealFft::Forward: buffer size mismatch");
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_),
                       const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void RealFft::Inverse(std::span<const Complex> in, std::span<double> out) const {
  Require(in.size() == bins() && out.size() == size_, ErrorKind::kInvalidInput,
          "RealFft::Inverse: buffer size mismatch");
  fftw_execute_dft_c2r(
      static_cast<fftw_plan>(inverse_plan_),
      reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
      out.data());
}

std::size_t NextFastFftSize(std::size_t n) {
  if (n <= 2) return 2;
  for (std::size_t candidate = n;; ++candidate) {
    std::size_t m = candidate;
    for (std::size_t p : {2u, 3u, 5u}) {
      while (m % p == 0) m /= p;
    }
    if (m == 1) return candidate;
  }
}

}  // namespace overair
