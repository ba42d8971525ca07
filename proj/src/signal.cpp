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

#include "overair/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "overair/error.hpp"
#include "overair/simd.hpp"

namespace overair {

namespace {

constexpr double kPi = std::numbers::pi;

bool IsPowerOfTwo(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

}  // namespace

Waveform::Waveform(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  Require(sample_rate_ > 0, ErrorKind::kInvalidInput,
          "sample rate must be positive");
  for (double s : samples_) {
    Require(std::isfinite(s), ErrorKind::kInvalidInput,
            "waveform contains a non-finite sample");
  }
}

void StftConfig::Validate() const {
  Require(IsPowerOfTwo(window_len), ErrorKind::kInvalidInput,
          "STFT window length must be a power of two");
  Require(hop > 0 && hop <= window_len && window_len % hop == 0,
          ErrorKind::kInvalidInput, "STFT hop must divide the window length");
  if (window == WindowType::kHann) {
    Require(hop <= window_len / 2, ErrorKind::kInvalidInput,
            "Hann window needs hop <= window_len / 2 for overlap-add");
  }
}

std::size_t StftConfig::FrameCount(std::size_t length) const {
  if (length < window_len) return 0;
  return 1 + (length - window_len + hop - 1) / hop;
}

std::vector<double> MakeWindow(const StftConfig& cfg) {
  std::vector<double> w(cfg.window_len, 1.0);
  if (cfg.window == WindowType::kHann) {
    for (std::size_t n = 0; n < cfg.window_len; ++n) {
      w[n] = 0.5 - 0.5 * std::cos(2.0 * kPi * n / cfg.window_len);
    }
  }
  return w;
}

Spectrogram Stft(std::span<const double> signal, const StftConfig& cfg,
                 int sample_rate) {
  cfg.Validate();
  Require(signal.size() >= cfg.window_len, ErrorKind::kInvalidInput,
          "signal shorter than one STFT window");
  const std::vector<double> window = MakeWindow(cfg);
  const RealFft fft(cfg.window_len);

  Spectrogram spec;
  spec.frames = cfg.FrameCount(signal.size());
  spec.bins = cfg.bins();
  spec.signal_length = signal.size();
  spec.bin_hz = static_cast<double>(sample_rate) / cfg.window_len;
  spec.frame_s = static_cast<double>(cfg.hop) / sample_rate;
  spec.data.resize(spec.frames * spec.bins);

  std::vector<double> segment(cfg.window_len);
  for (std::size_t f = 0; f < spec.frames; ++f) {
    const std::size_t start = f * cfg.hop;
    for (std::size_t n = 0; n < cfg.window_len; ++n) {
      const std::size_t idx = start + n;
      segment[n] = idx < signal.size() ? window[n] * signal[idx] : 0.0;
    }
    fft.Forward(segment, spec.frame(f));
  }
  return spec;
}

Waveform Istft(const Spectrogram& spec, const StftConfig& cfg, int sample_rate) {
  cfg.Validate();
  Require(spec.bins == cfg.bins() &&
              spec.frames == cfg.FrameCount(spec.signal_length) &&
              spec.data.size() == spec.frames * spec.bins,
          ErrorKind::kInvalidInput, "spectrogram does not match STFT grid");
  const std::vector<double> window = MakeWindow(cfg);
  const RealFft fft(cfg.window_len);
  const std::size_t padded = (spec.frames - 1) * cfg.hop + cfg.window_len;
  std::vector<double> out(padded, 0.0), norm(padded, 0.0);
  std::vector<double> segment(cfg.window_len);
  const double scale = 1.0 / cfg.window_len;
  for (std::size_t f = 0; f < spec.frames; ++f) {
    fft.Inverse(spec.frame(f), segment);
    const std::size_t start = f * cfg.hop;
    for (std::size_t n = 0; n < cfg.window_len; ++n) {
      out[start + n] += window[n] * segment[n] * scale;
      norm[start + n] += window[n] * window[n];
    }
  }
  out.resize(spec.signal_length);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = norm[i] > 1e-10 ? out[i] / norm[i] : 0.0;
  }
  return Waveform(std::move(out), sample_rate);
}

std::vector<double> StftAdjoint(const Spectrogram& grad, const StftConfig& cfg) {
  cfg.Validate();
  Require(grad.bins == cfg.bins() && grad.data.size() == grad.frames * grad.bins,
          ErrorKind::kInvalidInput, "gradient does not match STFT grid");
  const std::vector<double> window = MakeWindow(cfg);
  const RealFft fft(cfg.window_len);
  const std::size_t last = cfg.bins() - 1;
  std::vector<double> out(grad.signal_length, 0.0);
  std::vector<Complex> half(cfg.bins());
  std::vector<double> segment(cfg.window_len);
  for (std::size_t f = 0; f < grad.frames; ++f) {
    // dL/ds[n] = Re sum_{k<=N/2} G[k] e^{+i 2 pi k n / N}; fold into the
    // Hermitian inverse by halving the interior bins.
    const auto g = grad.frame(f);
    half[0] = Complex(g[0].real(), 0.0);
    half[last] = Complex(g[last].real(), 0.0);
    for (std::size_t k = 1; k < last; ++k) half[k] = 0.5 * g[k];
    fft.Inverse(half, segment);
    const std::size_t start = f * cfg.hop;
    const std::size_t stop = std::min(cfg.window_len, grad.signal_length - start);
    for (std::size_t n = 0; n < stop; ++n) {
      out[start + n] += window[n] * segment[n];
    }
  }
  return out;
}

std::string FilterKernel::Description() const {
  std::ostringstream os;
  os << "band-pass " << low_hz << "-" << high_hz << " Hz, " << taps.size()
     << " taps @ " << sample_rate << " Hz";
  return os.str();
}

FilterKernel DesignBandpass(double low_hz, double high_hz, int sample_rate,
                            std::size_t taps) {
  Require(sample_rate > 0, ErrorKind::kInvalidInput, "sample rate must be positive");
  Require(low_hz > 0.0 && low_hz < high_hz && high_hz <= sample_rate / 2.0,
          ErrorKind::kInvalidInput,
          "band edges must satisfy 0 < low < high <= sample_rate / 2");
  Require(taps % 2 == 1 && taps >= 3, ErrorKind::kInvalidInput,
          "band-pass tap count must be odd and >= 3");
  // The lower ideal edge sits midway between the stop-band point (low / 2) and
  // the start of the flat pass band (2 * low).
  constexpr double kBeta = 3.5;
  const double fl = 1.25 * low_hz / sample_rate;
  const double fh = high_hz / sample_rate;
  const double center = (taps - 1) / 2.0;
  const double i0_beta = std::cyl_bessel_i(0.0, kBeta);
  FilterKernel kernel;
  kernel.low_hz = low_hz;
  kernel.high_hz = high_hz;
  kernel.sample_rate = sample_rate;
  kernel.taps.resize(taps);
  for (std::size_t n = 0; n < taps; ++n) {
    const double t = n - center;
    const double ideal = 2.0 * fh * Sinc(2.0 * fh * t) - 2.0 * fl * Sinc(2.0 * fl * t);
    const double r = t / center;
    const double w = std::cyl_bessel_i(0.0, kBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) /
                     i0_beta;
    kernel.taps[n] = ideal * w;
  }
  return kernel;
}

double FirMagnitudeAt(std::span<const double> taps, double hz, int sample_rate) {
  const double omega = 2.0 * kPi * hz / sample_rate;
  Complex sum(0.0, 0.0);
  for (std::size_t n = 0; n < taps.size(); ++n) {
    sum += taps[n] * std::polar(1.0, -omega * static_cast<double>(n));
  }
  return std::abs(sum);
}

namespace detail {

std::vector<double> ConvolveDirect(std::span<const double> signal,
                                   std::span<const double> kernel) {
  const std::size_t n_sig = signal.size();
  const std::size_t n_ker = kernel.size();
  std::vector<double> reversed(kernel.rbegin(), kernel.rend());
  std::vector<double> out(n_sig + n_ker - 1);
  for (std::size_t n = 0; n < out.size(); ++n) {
    // out[n] = sum_j k[j] s[n-j]; with r = reversed kernel, index i = K-1-j.
    const std::size_t j_lo = n >= n_sig ? n - (n_sig - 1) : 0;
    const std::size_t j_hi = std::min(n_ker - 1, n);
    const std::size_t i_lo = n_ker - 1 - j_hi;
    const std::size_t count = j_hi - j_lo + 1;
    const std::size_t s_lo = n - j_hi;
    out[n] = simd::Dot({reversed.data() + i_lo, count}, {signal.data() + s_lo, count});
  }
  return out;
}

}  // namespace detail

std::vector<double> Convolve(std::span<const double> signal,
                             std::span<const double> kernel) {
  Require(!signal.empty() && !kernel.empty(), ErrorKind::kInvalidInput,
          "convolve: empty input");
  if (std::min(signal.size(), kernel.size()) <= 64) {
    return detail::ConvolveDirect(signal, kernel);
  }
  const FftConvolver conv(std::vector<double>(kernel.begin(), kernel.end()),
                          signal.size());
  return conv.Convolve(signal);
}

std::vector<double> ConvolveAdjoint(std::span<const double> grad_output,
                                    std::span<const double> kernel,
                                    std::size_t signal_len) {
  Require(!kernel.empty() && signal_len > 0, ErrorKind::kInvalidInput,
          "convolve adjoint: empty input");
  Require(grad_output.size() == signal_len + kernel.size() - 1,
          ErrorKind::kInvalidInput, "convolve adjoint: gradient length mismatch");
  if (std::min(signal_len, kernel.size()) <= 64) {
    std::vector<double> out(signal_len);
    for (std::size_t m = 0; m < signal_len; ++m) {
      out[m] = simd::Dot(kernel, grad_output.subspan(m, kernel.size()));
    }
    return out;
  }
  const FftConvolver conv(std::vector<double>(kernel.begin(), kernel.end()),
                          signal_len);
  return conv.Adjoint(grad_output, signal_len);
}

FftConvolver::FftConvolver(std::vector<double> kernel, std::size_t max_signal_len)
    : kernel_(std::move(kernel)),
      max_signal_len_(max_signal_len),
      fft_(NextFastFftSize(max_signal_len + std::max<std::size_t>(kernel_.size(), 1) - 1)) {
  Require(!kernel_.empty() && max_signal_len_ > 0, ErrorKind::kInvalidInput,
          "FftConvolver: empty kernel or signal");
  std::vector<double> padded(fft_.size(), 0.0);
  std::copy(kernel_.begin(), kernel_.end(), padded.begin());
  kernel_spectrum_.resize(fft_.bins());
  fft_.Forward(padded, kernel_spectrum_);
}

std::vector<double> FftConvolver::Convolve(std::span<const double> signal) const {
  Require(!signal.empty() && signal.size() <= max_signal_len_,
          ErrorKind::kInvalidInput, "FftConvolver: signal length out of range");
  const std::size_t n = fft_.size();
  std::vector<double> buffer(n, 0.0);
  std::copy(signal.begin(), signal.end(), buffer.begin());
  std::vector<Complex> spectrum(fft_.bins());
  fft_.Forward(buffer, spectrum);
  simd::ComplexMultiply(spectrum, kernel_spectrum_, spectrum, false);
  fft_.Inverse(spectrum, buffer);
  buffer.resize(signal.size() + kernel_.size() - 1);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : buffer) v *= scale;
  return buffer;
}

std::vector<double> FftConvolver::Adjoint(std::span<const double> grad_output,
                                          std::size_t signal_len) const {
  Require(signal_len > 0 && signal_len <= max_signal_len_ &&
              grad_output.size() == signal_len + kernel_.size() - 1,
          ErrorKind::kInvalidInput, "FftConvolver: adjoint length mismatch");
  const std::size_t n = fft_.size();
  std::vector<double> buffer(n, 0.0);
  std::copy(grad_output.begin(), grad_output.end(), buffer.begin());
  std::vector<Complex> spectrum(fft_.bins());
  fft_.Forward(buffer, spectrum);
  simd::ComplexMultiply(spectrum, kernel_spectrum_, spectrum, true);
  fft_.Inverse(spectrum, buffer);
  buffer.resize(signal_len);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : buffer) v *= scale;
  return buffer;
}

}  // namespace overair
