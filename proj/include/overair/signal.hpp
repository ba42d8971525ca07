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

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "overair/fft.hpp"

namespace overair {

inline constexpr int kSampleRate = 16000;

// Mono audio at a fixed rate. Samples are checked finite on construction.
class Waveform {
 public:
  Waveform() = default;
  explicit Waveform(std::vector<double> samples, int sample_rate = kSampleRate);

  std::span<const double> samples() const { return samples_; }
  const std::vector<double>& vector() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  int sample_rate() const { return sample_rate_; }
  double duration_seconds() const {
    return static_cast<double>(samples_.size()) / sample_rate_;
  }

  double operator[](std::size_t i) const { return samples_[i]; }

 private:
  std::vector<double> samples_;
  int sample_rate_ = kSampleRate;
};

enum class WindowType { kHann, kRectangular };

struct StftConfig {
  std::size_t window_len = 512;
  std::size_t hop = 256;
  WindowType window = WindowType::kHann;

  // Throws kInvalidInput unless window_len is a power of two, hop divides it,
  // and the window/hop pair leaves no zero in the summed squared window.
  void Validate() const;
  std::size_t bins() const { return window_len / 2 + 1; }
  // Number of frames for a signal of `length` samples; the last frame is
  // zero-padded past the end of the signal.
  std::size_t FrameCount(std::size_t length) const;
};

// Periodic window of cfg.window_len samples.
std::vector<double> MakeWindow(const StftConfig& cfg);

struct Spectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t signal_length = 0;
  double bin_hz = 0.0;
  double frame_s = 0.0;
  std::vector<Complex> data;  // row-major, frames x bins

  Complex& at(std::size_t frame, std::size_t bin) { return data[frame * bins + bin]; }
  const Complex& at(std::size_t frame, std::size_t bin) const {
    return data[frame * bins + bin];
  }
  std::span<Complex> frame(std::size_t f) { return {data.data() + f * bins, bins}; }
  std::span<const Complex> frame(std::size_t f) const {
    return {data.data() + f * bins, bins};
  }
};

Spectrogram Stft(std::span<const double> signal, const StftConfig& cfg,
                 int sample_rate = kSampleRate);
inline Spectrogram Stft(const Waveform& w, const StftConfig& cfg) {
  return Stft(w.samples(), cfg, w.sample_rate());
}

// Weighted overlap-add inverse, normalized by the summed squared window.
Waveform Istft(const Spectrogram& spec, const StftConfig& cfg,
               int sample_rate = kSampleRate);

// Adjoint of Stft. `grad` holds dL/dRe(X) + i dL/dIm(X) per cell; returns
// dL/dsignal with length grad.signal_length.
std::vector<double> StftAdjoint(const Spectrogram& grad, const StftConfig& cfg);

struct FilterKernel {
  std::vector<double> taps;
  double low_hz = 0.0;
  double high_hz = 0.0;
  int sample_rate = kSampleRate;

  std::string Description() const;
};

// Linear-phase windowed-sinc band-pass (Kaiser window, ~45 dB stop band).
FilterKernel DesignBandpass(double low_hz, double high_hz, int sample_rate,
                            std::size_t taps);

// |H(f)| of an FIR kernel evaluated directly from its DTFT.
double FirMagnitudeAt(std::span<const double> taps, double hz, int sample_rate);

// Full linear convolution, length a.size() + k.size() - 1. Picks direct or
// FFT evaluation by size.
std::vector<double> Convolve(std::span<const double> signal,
                             std::span<const double> kernel);
inline Waveform Convolve(const Waveform& w, std::span<const double> kernel) {
  return Waveform(Convolve(w.samples(), kernel), w.sample_rate());
}

// Adjoint of Convolve with respect to the signal: given dL/d(output) of length
// signal_len + kernel.size() - 1, returns dL/d(signal).
std::vector<double> ConvolveAdjoint(std::span<const double> grad_output,
                                    std::span<const double> kernel,
                                    std::size_t signal_len);

namespace detail {
std::vector<double> ConvolveDirect(std::span<const double> signal,
                                   std::span<const double> kernel);
}  // namespace detail

// FFT convolution against one fixed kernel, reused across many signals of
// bounded length. Thread-safe for concurrent calls.
class FftConvolver {
 public:
  FftConvolver(std::vector<double> kernel, std::size_t max_signal_len);

  std::size_t kernel_size() const { return kernel_.size(); }
  std::size_t max_signal_len() const { return max_signal_len_; }

  std::vector<double> Convolve(std::span<const double> signal) const;
  std::vector<double> Adjoint(std::span<const double> grad_output,
                              std::size_t signal_len) const;

 private:
  std::vector<double> kernel_;
  std::size_t max_signal_len_;
  RealFft fft_;
  std::vector<Complex> kernel_spectrum_;
};

}  // namespace overair
