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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "mrcq/numerics/tensor.hpp"

namespace mrcq {

enum class Modality : std::uint8_t { speech = 0, audio = 1, visual = 2 };

std::string_view modality_name(Modality m);
Modality parse_modality(std::string_view name);

// Encoder output rates at the reference configuration: 2 Hz video frames,
// 50 Hz speech/audio spectrogram frames.
double default_frame_rate(Modality m);

struct FeatureSource {
    enum class Kind : std::uint8_t { mock, file, derived };
    Kind kind = Kind::derived;
    std::uint64_t seed = 0;
    std::string path;
};

// One modality's encoded sequence. Values are stored frame-major as a
// (frames * features_per_frame) x channels matrix.
struct FeatureStream {
    Modality modality = Modality::visual;
    double frame_rate = 2.0;
    Index frames = 0;
    Index features_per_frame = 0;
    Index channels = 0;
    Matrix values;
    FeatureSource source;

    auto frame(Index t) const { return values.middleRows(t * features_per_frame, features_per_frame); }
    auto frame(Index t) { return values.middleRows(t * features_per_frame, features_per_frame); }

    double duration_s() const { return static_cast<double>(frames) / frame_rate; }

    // Structural checks plus finiteness of every value.
    void validate() const;
};

FeatureStream make_stream(Modality modality, double frame_rate, Index frames, Index features_per_frame,
                          Index channels);

// Frozen-encoder stand-in: seeded standard-normal features, rescaled to unit
// RMS over the whole stream. Frame count is round(duration_s * frame_rate).
FeatureStream mock_encode(Modality modality, std::uint64_t seed, double duration_s, Index features_per_frame,
                          Index channels, std::optional<double> frame_rate = std::nullopt);

}  // namespace mrcq
