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

#include <filesystem>

#include "overair/signal.hpp"

namespace overair {

// Reads PCM16 or IEEE float32 WAV, mono or stereo (stereo is averaged).
// Rates other than kSampleRate are rejected with kFormat.
Waveform ReadWav(const std::filesystem::path& path);

// Writes 16-bit PCM mono. Samples are clipped to [-1, 1]; the number of
// clipped samples is returned.
std::size_t WriteWav(const std::filesystem::path& path, const Waveform& w);

}  // namespace overair
