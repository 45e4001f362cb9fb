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

#include <string>
#include <string_view>
#include <vector>

#include "mrcq/frontend/feature_stream.hpp"

namespace mrcq {

// Feature file layout, all little-endian:
//
//   offset  size  field
//   0       8     magic "MRCQFEAT"
//   8       2     version (u16, = 1)
//   10      1     modality (u8: 0 speech, 1 audio, 2 visual)
//   11      8     frame_rate (f64)
//   19      4     frames (u32)
//   23      4     features per frame (u32)
//   27      4     channels (u32)
//   31      8*n   values (f64), n = frames * F * channels, frame-major
//   31+8n   8     FNV-1a 64 of the value bytes
inline constexpr std::string_view kFeatureMagic = "MRCQFEAT";
inline constexpr std::uint16_t kFeatureVersion = 1;

std::vector<unsigned char> encode_features(const FeatureStream& stream);
// Structural validation only; non-finite values are carried through as-is.
FeatureStream decode_features(std::string_view bytes);

void save_features(const FeatureStream& stream, const std::string& path);
FeatureStream load_features(const std::string& path);

}  // namespace mrcq
