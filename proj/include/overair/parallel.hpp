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

#include <cstddef>
#include <functional>

namespace overair {

// Upper bound on worker threads used by ParallelFor. Defaults to 1.
void SetMaxThreads(int threads);
int MaxThreads();

// Runs body(i) for i in [0, count). Indices are split into contiguous blocks,
// one per worker; body must only write to state owned by index i so results
// do not depend on scheduling. The first exception thrown is rethrown.
void ParallelFor(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace overair
