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

#include "mrcq/frontend/synchronize.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrcq/errors.hpp"

namespace mrcq {

Index SyncLayout::channel_offset(Modality m) const {
    switch (m) {
        case Modality::speech: return 0;
        case Modality::audio: return speech_channels;
        case Modality::visual: return speech_channels + audio_channels;
    }
    return 0;
}

Index SyncLayout::channels_of(Modality m) const {
    switch (m) {
        case Modality::speech: return speech_channels;
        case Modality::audio: return audio_channels;
        case Modality::visual: return visual_channels;
    }
    return 0;
}

namespace {

constexpr double kRateTol = 1e-9;

struct Placed {
    const FeatureStream* stream = nullptr;
    Index group = 1;       // source frames per sync frame
    Index blocks = 0;      // sync frames covered by the source
    Index block_rows = 0;  // rows per sync frame
};

void check_stream(const FeatureStream& s, Modality slot, const SyncLayout& layout) {
    if (s.modality != slot) {
        throw ArgumentError("synchronize: " + std::string(modality_name(s.modality)) + " stream passed as " +
                            std::string(modality_name(slot)));
    }
    s.validate();
    if (s.channels != layout.channels_of(slot)) {
        throw ShapeError("synchronize: " + std::string(modality_name(slot)) + " stream has " +
                         std::to_string(s.channels) + " channels, layout expects " +
                         std::to_string(layout.channels_of(slot)));
    }
}

Placed place_audio_side(const FeatureStream& s, const SyncLayout& layout) {
    const double ratio = s.frame_rate / layout.frame_rate;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > kRateTol * ratio) {
        throw AlignmentError("synchronize: " + std::string(modality_name(s.modality)) + " rate " +
                             std::to_string(s.frame_rate) + " Hz is not a multiple of the " +
                             std::to_string(layout.frame_rate) + " Hz sync clock");
    }
    Placed p;
    p.stream = &s;
    p.group = static_cast<Index>(rounded);
    p.blocks = (s.frames + p.group - 1) / p.group;
    p.block_rows = p.group * s.features_per_frame;
    return p;
}

void check_durations(const FeatureStream& a, const FeatureStream& b, double period) {
    if (std::abs(a.duration_s() - b.duration_s()) > period * (1.0 + kRateTol)) {
        throw AlignmentError("synchronize: " + std::string(modality_name(a.modality)) + " lasts " +
                             std::to_string(a.duration_s()) + " s but " + std::string(modality_name(b.modality)) +
                             " lasts " + std::to_string(b.duration_s()) + " s (tolerance one frame period)");
    }
}

}  // namespace

SyncedSequence synchronize(const FeatureStream* speech, const FeatureStream* audio, const FeatureStream* visual,
                           const SyncLayout& layout) {
    if (!speech && !audio && !visual) throw EmptyInputError("synchronize: no modality present");
    if (!(layout.frame_rate > 0.0)) throw ArgumentError("synchronize: sync frame rate must be positive");
    const double period = 1.0 / layout.frame_rate;

    if (speech) check_stream(*speech, Modality::speech, layout);
    if (audio) check_stream(*audio, Modality::audio, layout);
    if (visual) check_stream(*visual, Modality::visual, layout);

    std::vector<Placed> audio_side;
    if (speech) audio_side.push_back(place_audio_side(*speech, layout));
    if (audio) audio_side.push_back(place_audio_side(*audio, layout));
    if (speech && audio) check_durations(*speech, *audio, period);

    Index audio_blocks = 0;
    for (const auto& p : audio_side) audio_blocks = std::max(audio_blocks, p.blocks);

    bool duplicate_image = false;
    Index frames = 0;
    if (visual) {
        if (std::abs(visual->frame_rate - layout.frame_rate) > kRateTol * layout.frame_rate && visual->frames > 1) {
            throw AlignmentError("synchronize: visual rate " + std::to_string(visual->frame_rate) +
                                 " Hz differs from the sync clock " + std::to_string(layout.frame_rate) + " Hz");
        }
        if (visual->frames == 1 && audio_blocks > 1) {
            duplicate_image = true;
            frames = audio_blocks;
        } else {
            frames = visual->frames;
            for (const auto& p : audio_side) {
                FeatureStream clocked = *visual;
                clocked.frame_rate = layout.frame_rate;
                check_durations(*p.stream, clocked, period);
            }
        }
    } else {
        frames = audio_blocks;
    }

    Index per_frame = layout.min_features_per_frame;
    for (const auto& p : audio_side) per_frame = std::max(per_frame, p.block_rows);
    if (visual) per_frame = std::max(per_frame, visual->features_per_frame);

    SyncedSequence out;
    out.frames = frames;
    out.features_per_frame = per_frame;
    out.layout = layout;
    out.values = Matrix::Zero(frames * per_frame, layout.total_channels());
    out.present = {speech != nullptr, audio != nullptr, visual != nullptr};

    for (const auto& p : audio_side) {
        const FeatureStream& s = *p.stream;
        const Index col = layout.channel_offset(s.modality);
        const Index usable_frames = std::min(s.frames, frames * p.group);
        for (Index f = 0; f < usable_frames; ++f) {
            const Index t = f / p.group;
            const Index row = t * per_frame + (f % p.group) * s.features_per_frame;
            out.values.block(row, col, s.features_per_frame, s.channels) = s.frame(f);
        }
    }
    if (visual) {
        const Index col = layout.channel_offset(Modality::visual);
        for (Index t = 0; t < frames; ++t) {
            const Index src = duplicate_image ? 0 : t;
            out.values.block(t * per_frame, col, visual->features_per_frame, visual->channels) = visual->frame(src);
        }
    }
    return out;
}

SyncedSequence synchronize(std::span<const FeatureStream> streams, const SyncLayout& layout) {
    std::array<const FeatureStream*, 3> slots{nullptr, nullptr, nullptr};
    for (const auto& s : streams) {
        auto& slot = slots[static_cast<std::size_t>(s.modality)];
        if (slot) throw ArgumentError("synchronize: duplicate " + std::string(modality_name(s.modality)) + " stream");
        slot = &s;
    }
    return synchronize(slots[0], slots[1], slots[2], layout);
}

}  // namespace mrcq
