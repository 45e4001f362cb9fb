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

#include "mrcq/numerics/param_store.hpp"

namespace mrcq {

// Checkpoint container, little-endian, same conventions as feature files:
//
//   "MRCQCKPT" | u16 version=1 | u32 config length | config bytes (JSON)
//   | u32 tensor count | per tensor: u16 name length, name, u8 trainable,
//     u32 rows, u32 cols, rows*cols f64 values
//   | u64 FNV-1a over every byte after the version field
inline constexpr std::string_view kCheckpointMagic = "MRCQCKPT";
inline constexpr std::uint16_t kCheckpointVersion = 1;

struct CheckpointTensor {
    std::string name;
    bool trainable = true;
    Matrix value;
};

struct Checkpoint {
    std::string config_json;
    std::vector<CheckpointTensor> tensors;
    std::uint64_t checksum = 0;
};

std::vector<unsigned char> encode_checkpoint(const ParamStore& store, std::string_view config_json);
Checkpoint decode_checkpoint(std::string_view bytes);

void save_checkpoint(const ParamStore& store, std::string_view config_json, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Copies tensor values into same-named parameters; names, shapes and
// trainable flags must match exactly.
void restore(ParamStore& store, const Checkpoint& checkpoint);

}  // namespace mrcq
