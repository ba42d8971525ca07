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

// Real-input FFT over FFTW with a process-wide plan cache. Plans are created
// under a lock with FFTW_ESTIMATE | FFTW_UNALIGNED, so execution is
// deterministic and safe from any thread.

#include <complex>
#include <cstddef>
#include <span>

namespace overair {

using Complex = std::complex<double>;

class RealFft {
 public:
  explicit RealFft(std::size_t size);

  std::size_t size() const { return size_; }
  std::size_t bins() const { return size_ / 2 + 1; }

  // out[k] = sum_n in[n] exp(-2 pi i k n / N), k = 0..N/2.
  void Forward(std::span<const double> in, std::span<Complex> out) const;
  // Unnormalized inverse of a Hermitian half-spectrum:
  // out[n] = sum_{k=0}^{N-1} X[k] exp(+2 pi i k n / N). Input is preserved.
  void Inverse(std::span<const Complex> in, std::span<double> out) const;

 private:
  std::size_t size_;
  void* forward_plan_;
  void* inverse_plan_;
};

// Smallest n' >= n of the form 2^a 3^b 5^c.
std::size_t NextFastFftSize(std::size_t n);

}  // namespace overair
