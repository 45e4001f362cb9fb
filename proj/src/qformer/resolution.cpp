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

#include "mrcq/qformer/resolution.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mrcq/errors.hpp"

namespace mrcq {

void validate_levels(std::span<const ResolutionSpec> levels) {
    if (levels.empty()) throw ConfigError("levels", "at least one resolution level is required");
    for (std::size_t r = 0; r < levels.size(); ++r) {
        const auto& l = levels[r];
        const std::string where = "levels[" + std::to_string(r) + "]";
        if (l.window_frames < 1 || l.queries < 1) throw ConfigError(where, "window_frames and queries must be >= 1");
        if (r > 0) {
            if (l.window_frames <= levels[r - 1].window_frames) {
                throw ConfigError(where, "window sizes must be strictly increasing");
            }
            // N(r) / k(r) == N(1) / k(1), compared without division.
            if (l.queries * levels[0].window_frames != levels[0].queries * l.window_frames) {
                throw ConfigError(where, "queries per frame differ from level 1, so windows x queries cannot match");
            }
        }
    }
}

Index padded_length(Index frames, std::span<const ResolutionSpec> levels) {
    if (frames < 1) throw ArgumentError("padded_length: need at least one frame");
    Index l = 1;
    for (const auto& spec : levels) l = std::lcm(l, spec.window_frames);
    return ((frames + l - 1) / l) * l;
}

Index output_rows(Index frames, std::span<const ResolutionSpec> levels) {
    validate_levels(levels);
    const Index padded = padded_length(frames, levels);
    return (padded / levels[0].window_frames) * levels[0].queries;
}

WindowPlan partition_windows(Index frames, Index window_frames, Index padded_frames) {
    if (frames < 1 || window_frames < 1) throw ArgumentError("partition_windows: T and k must be >= 1");
    if (padded_frames < frames || padded_frames % window_frames != 0) {
        throw ArgumentError("partition_windows: padded length " + std::to_string(padded_frames) +
                            " is not a multiple of k covering T");
    }
    WindowPlan plan;
    plan.padded_frames = padded_frames;
    for (Index w = 0; w * window_frames < padded_frames; ++w) {
        Window win;
        win.index = w;
        win.first_frame = w * window_frames;
        win.frames = window_frames;
        win.valid_frames = std::clamp<Index>(frames - win.first_frame, 0, window_frames);
        plan.windows.push_back(win);
    }
    return plan;
}

WindowPlan partition_windows(Index frames, Index window_frames, std::span<const ResolutionSpec> levels) {
    return partition_windows(frames, window_frames, padded_length(frames, levels));
}

Mask causal_mask(Index frames, Index features_per_frame) {
    if (frames < 1 || features_per_frame < 1) throw ArgumentError("causal_mask: m and F must be >= 1");
    const Index n = frames * features_per_frame;
    Mask m(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) m(i, j) = (j / features_per_frame) <= (i / features_per_frame);
    }
    return m;
}

}  // namespace mrcq
