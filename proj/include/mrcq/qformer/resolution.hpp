// Copyright 2026 The MRCQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <span>
#include <vector>

#include "mrcq/numerics/tensor.hpp"

namespace mrcq {

// One temporal resolution: k frames per window, N output queries per window.
// Level 1 is the finest.
struct ResolutionSpec {
    Index window_frames = 1;
    Index queries = 1;
};

// Levels must have strictly increasing window sizes and a common
// queries-per-frame ratio, so that every level emits the same row count.
void validate_levels(std::span<const ResolutionSpec> levels);

// Smallest multiple of lcm{k(r)} that is >= frames. Computed once for all
// levels so window counts divide evenly at every resolution.
Index padded_length(Index frames, std::span<const ResolutionSpec> levels);

// Rows each level contributes after padding: (T' / k) * N, equal across levels.
Index output_rows(Index frames, std::span<const ResolutionSpec> levels);

struct Window {
    Index index = 0;
    Index first_frame = 0;
    Index frames = 0;        // k
    Index valid_frames = 0;  // frames before the padding boundary
};

struct WindowPlan {
    Index padded_frames = 0;
    std::vector<Window> windows;
};

// Contiguous, non-overlapping windows of k frames over the padded length.
WindowPlan partition_windows(Index frames, Index window_frames, Index padded_frames);
WindowPlan partition_windows(Index frames, Index window_frames, std::span<const ResolutionSpec> levels);

// Block-wise lower-triangular mask over m frames of F features each: entry
// (i, j) is true iff frame(j) <= frame(i) with frame(x) = x / F.
Mask causal_mask(Index frames, Index features_per_frame);

}  // namespace mrcq
