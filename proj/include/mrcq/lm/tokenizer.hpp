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
#include <string>
#include <string_view>
#include <vector>

namespace mrcq {

// Byte-level vocabulary. Ids 0-255 are the byte values themselves; four
// control bytes double as special tokens, so the vocabulary stays at 256.
inline constexpr int kVocabSize = 256;
inline constexpr int kPad = 0x00;
inline constexpr int kBos = 0x02;
inline constexpr int kEos = 0x03;
inline constexpr int kSep = 0x1F;  // joins the halves of a mixed example

bool is_special(int id);

// Raw bytes of `text`. PAD, BOS and EOS bytes are rejected; the SEP byte is
// allowed since it is how two answers are joined.
std::vector<int> encode_text(std::string_view text);
// BOS followed by the bytes of `text`.
std::vector<int> encode_prompt(std::string_view text);
// The bytes of `text` followed by EOS.
std::vector<int> encode_target(std::string_view text);

// Bytes for every id, dropping PAD/BOS and stopping at the first EOS.
std::string decode_tokens(std::span<const int> ids);

}  // namespace mrcq
