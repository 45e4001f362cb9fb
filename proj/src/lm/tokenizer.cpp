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

#include "mrcq/lm/tokenizer.hpp"

#include "mrcq/errors.hpp"

namespace mrcq {

bool is_special(int id) { return id == kPad || id == kBos || id == kEos || id == kSep; }

std::vector<int> encode_text(std::string_view text) {
    std::vector<int> ids;
    ids.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        const int b = static_cast<unsigned char>(text[i]);
        if (b == kPad || b == kBos || b == kEos) {
            throw ArgumentError("tokenizer: reserved control byte " + std::to_string(b) + " at position " +
                                std::to_string(i));
        }
        ids.push_back(b);
    }
    return ids;
}

std::vector<int> encode_prompt(std::string_view text) {
    std::vector<int> ids{kBos};
    const auto body = encode_text(text);
    ids.insert(ids.end(), body.begin(), body.end());
    return ids;
}

std::vector<int> encode_target(std::string_view text) {
    std::vector<int> ids = encode_text(text);
    ids.push_back(kEos);
    return ids;
}

std::string decode_tokens(std::span<const int> ids) {
    std::string out;
    for (int id : ids) {
        if (id < 0 || id >= kVocabSize) throw ArgumentError("tokenizer: id " + std::to_string(id) + " out of range");
        if (id == kEos) break;
        if (id == kPad || id == kBos) continue;
        out.push_back(static_cast<char>(id));
    }
    return out;
}

}  // namespace mrcq
