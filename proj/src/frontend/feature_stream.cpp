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

#include "mrcq/frontend/feature_stream.hpp"

#include <cmath>

#include "mrcq/errors.hpp"
#include "mrcq/util/rng.hpp"

namespace mrcq {

std::string_view modality_name(Modality m) {
    switch (m) {
        case Modality::speech: return "speech";
        case Modality::audio: return "audio";
        case Modality::visual: return "visual";
    }
    return "unknown";
}

Modality parse_modality(std::string_view name) {
    if (name == "speech") return Modality::speech;
    if (name == "audio") return Modality::audio;
    if (name == "visual") return Modality::visual;
    throw ArgumentError("unknown modality '" + std::string(name) + "'");
}

double default_frame_rate(Modality m) { return m == Modality::visual ? 2.0 : 50.0; }

void FeatureStream::validate() const {
    if (frames < 1) throw ShapeError("feature stream has no frames");
    if (features_per_frame < 1 || channels < 1) throw ShapeError("feature stream needs F >= 1 and channels >= 1");
    if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) throw ArgumentError("frame rate must be positive");
    if (values.rows() != frames * features_per_frame || values.cols() != channels) {
        throw ShapeError("feature values " + shape_str(values) + " do not match " + std::to_string(frames) + " x " +
                         std::to_string(features_per_frame) + " x " + std::to_string(channels));
    }
    if (!all_finite(values)) throw NumericError("feature stream contains non-finite values");
}

FeatureStream make_stream(Modality modality, double frame_rate, Index frames, Index features_per_frame,
                          Index channels) {
    FeatureStream s;
    s.modality = modality;
    s.frame_rate = frame_rate;
    s.frames = frames;
    s.features_per_frame = features_per_frame;
    s.channels = channels;
    s.values = Matrix::Zero(frames * features_per_frame, channels);
    return s;
}

FeatureStream mock_encode(Modality modality, std::uint64_t seed, double duration_s, Index features_per_frame,
                          Index channels, std::optional<double> frame_rate) {
    if (!(duration_s > 0.0)) throw ArgumentError("mock_encode: duration must be positive");
    if (features_per_frame < 1 || channels < 1) throw ArgumentError("mock_encode: F and channels must be >= 1");
    const double rate = frame_rate.value_or(default_frame_rate(modality));
    if (!(rate > 0.0)) throw ArgumentError("mock_encode: frame rate must be positive");
    const auto frames = static_cast<Index>(std::llround(duration_s * rate));
    if (frames < 1) throw ArgumentError("mock_encode: duration shorter than one frame");

    FeatureStream s = make_stream(modality, rate, frames, features_per_frame, channels);
    Rng rng(derive_seed(seed, modality_name(modality)));
    for (Index i = 0; i < s.values.size(); ++i) s.values.data()[i] = rng.normal();
    const double rms = std::sqrt(s.values.squaredNorm() / static_cast<double>(s.values.size()));
    if (rms > 0.0) s.values /= rms;
    s.source = {FeatureSource::Kind::mock, seed, {}};
    return s;
}

}  // namespace mrcq
