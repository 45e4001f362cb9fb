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

#include "mrcq/frontend/feature_file.hpp"

#include <cmath>
#include <limits>

#include "mrcq/errors.hpp"
#include "mrcq/util/binary_io.hpp"
#include "mrcq/util/rng.hpp"

namespace mrcq {

std::vector<unsigned char> encode_features(const FeatureStream& stream) {
    if (stream.frames < 1 || stream.features_per_frame < 1 || stream.channels < 1) {
        throw ShapeError("encode_features: empty stream");
    }
    constexpr auto u32_max = static_cast<Index>(std::numeric_limits<std::uint32_t>::max());
    if (stream.frames > u32_max || stream.features_per_frame > u32_max || stream.channels > u32_max) {
        throw ShapeError("encode_features: dimension exceeds u32");
    }
    ByteWriter w;
    w.put_bytes(kFeatureMagic);
    w.put<std::uint16_t>(kFeatureVersion);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(stream.modality));
    w.put<double>(stream.frame_rate);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(stream.frames));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(stream.features_per_frame));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(stream.channels));
    const std::size_t payload_start = w.size();
    for (Index i = 0; i < stream.values.size(); ++i) w.put<double>(stream.values.data()[i]);
    const auto& bytes = w.bytes();
    w.put<std::uint64_t>(fnv1a64(bytes.data() + payload_start, bytes.size() - payload_start));
    return w.bytes();
}

FeatureStream decode_features(std::string_view bytes) {
    ByteReader r(bytes);
    if (r.get_bytes(kFeatureMagic.size(), "magic") != kFeatureMagic) throw FormatError("bad magic", 0);

    std::size_t at = r.offset();
    const auto version = r.get<std::uint16_t>("version");
    if (version != kFeatureVersion) throw FormatError("unsupported version " + std::to_string(version), at);

    at = r.offset();
    const auto modality = r.get<std::uint8_t>("modality");
    if (modality > 2) throw FormatError("unknown modality code " + std::to_string(modality), at);

    at = r.offset();
    const auto rate = r.get<double>("frame rate");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw FormatError("frame rate must be positive and finite", at);

    at = r.offset();
    const auto frames = r.get<std::uint32_t>("frame count");
    if (frames == 0) throw FormatError("header declares zero frames", at);
    at = r.offset();
    const auto per_frame = r.get<std::uint32_t>("features per frame");
    if (per_frame == 0) throw FormatError("header declares zero features per frame", at);
    at = r.offset();
    const auto channels = r.get<std::uint32_t>("channel count");
    if (channels == 0) throw FormatError("header declares zero channels", at);

    const std::uint64_t count = std::uint64_t{frames} * per_frame * channels;
    const std::size_t payload_start = r.offset();
    if (count > r.remaining() / sizeof(double)) {
        throw FormatError("truncated payload: header declares " + std::to_string(count) + " values",
                          payload_start);
    }
    FeatureStream s = make_stream(static_cast<Modality>(modality), rate, frames, per_frame, channels);
    for (std::uint64_t i = 0; i < count; ++i) s.values.data()[i] = r.get<double>("values");
    const std::uint64_t expected = fnv1a64(bytes.data() + payload_start, r.offset() - payload_start);

    at = r.offset();
    const auto checksum = r.get<std::uint64_t>("checksum");
    if (checksum != expected) throw FormatError("payload checksum mismatch", at);
    if (r.remaining() != 0) throw FormatError("trailing bytes after checksum", r.offset());
    return s;
}

void save_features(const FeatureStream& stream, const std::string& path) {
    write_binary_file(path, encode_features(stream));
}

FeatureStream load_features(const std::string& path) {
    FeatureStream s = decode_features(read_binary_file(path));
    s.source = {FeatureSource::Kind::file, 0, path};
    return s;
}

}  // namespace mrcq
