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

#include <array>
#include <span>

#include "mrcq/frontend/feature_stream.hpp"

namespace mrcq {

// Channel widths of the combined representation plus the sync clock. Widths
// are fixed per model, so absent modalities still occupy their block.
struct SyncLayout {
    Index speech_channels = 0;
    Index audio_channels = 0;
    Index visual_channels = 0;
    double frame_rate = 2.0;
    // Lower bound on the aligned per-frame feature count.
    Index min_features_per_frame = 0;

    Index total_channels() const { return speech_channels + audio_channels + visual_channels; }
    Index channel_offset(Modality m) const;
    Index channels_of(Modality m) const;
};

// Frame-synchronised, channel-concatenated features. Each frame is an
// F x (d_s + d_a + d_v) block in (speech, audio, visual) channel order.
struct SyncedSequence {
    Index frames = 0;
    Index features_per_frame = 0;
    SyncLayout layout;
    Matrix values;
    std::array<bool, 3> present{false, false, false};

    Index channels() const { return values.cols(); }
    bool has(Modality m) const { return present[static_cast<std::size_t>(m)]; }

    auto frame(Index t) const { return values.middleRows(t * features_per_frame, features_per_frame); }
    auto block(Modality m) const {
        return values.middleCols(layout.channel_offset(m), layout.channels_of(m));
    }
};

// Aligns speech/audio streams to the video frame clock and concatenates
// them with the visual stream. Audio-side frames are regrouped into one
// block per video frame; per-frame blocks are zero-padded to a common F.
// A single-frame visual input paired with longer audio is treated as an
// image and duplicated across the audio duration.
SyncedSequence synchronize(const FeatureStream* speech, const FeatureStream* audio, const FeatureStream* visual,
                           const SyncLayout& layout);

// Order-free variant: streams are routed by their modality tag.
SyncedSequence synchronize(std::span<const FeatureStream> streams, const SyncLayout& layout);

}  // namespace mrcq
