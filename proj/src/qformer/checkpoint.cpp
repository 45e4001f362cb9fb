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

#include "mrcq/qformer/checkpoint.hpp"

#include <limits>

#include "mrcq/errors.hpp"
#include "mrcq/util/binary_io.hpp"
#include "mrcq/util/rng.hpp"

namespace mrcq {

std::vector<unsigned char> encode_checkpoint(const ParamStore& store, std::string_view config_json) {
    ByteWriter w;
    w.put_bytes(kCheckpointMagic);
    w.put<std::uint16_t>(kCheckpointVersion);
    const std::size_t body = w.size();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(config_json.size()));
    w.put_bytes(config_json);
    const auto params = store.all();
    w.put<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
    for (const Parameter* p : params) {
        if (p->name.size() > std::numeric_limits<std::uint16_t>::max()) throw ArgumentError("parameter name too long");
        w.put<std::uint16_t>(static_cast<std::uint16_t>(p->name.size()));
        w.put_bytes(p->name);
        w.put<std::uint8_t>(p->trainable ? 1 : 0);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(p->value.rows()));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(p->value.cols()));
        for (Index i = 0; i < p->value.size(); ++i) w.put<double>(p->value.data()[i]);
    }
    const auto& bytes = w.bytes();
    w.put<std::uint64_t>(fnv1a64(bytes.data() + body, bytes.size() - body));
    return w.bytes();
}

Checkpoint decode_checkpoint(std::string_view bytes) {
    ByteReader r(bytes);
    if (r.get_bytes(kCheckpointMagic.size(), "magic") != kCheckpointMagic) throw FormatError("bad checkpoint magic", 0);
    std::size_t at = r.offset();
    const auto version = r.get<std::uint16_t>("version");
    if (version != kCheckpointVersion) throw FormatError("unsupported checkpoint version " + std::to_string(version), at);
    const std::size_t body = r.offset();

    Checkpoint ck;
    const auto config_len = r.get<std::uint32_t>("config length");
    ck.config_json = std::string(r.get_bytes(config_len, "config"));
    const auto count = r.get<std::uint32_t>("tensor count");
    for (std::uint32_t i = 0; i < count; ++i) {
        CheckpointTensor t;
        const auto name_len = r.get<std::uint16_t>("tensor name length");
        t.name = std::string(r.get_bytes(name_len, "tensor name"));
        at = r.offset();
        const auto flag = r.get<std::uint8_t>("trainable flag");
        if (flag > 1) throw FormatError("bad trainable flag for " + t.name, at);
        t.trainable = flag == 1;
        const auto rows = r.get<std::uint32_t>("rows");
        const auto cols = r.get<std::uint32_t>("cols");
        const std::uint64_t n = std::uint64_t{rows} * cols;
        if (n > r.remaining() / sizeof(double)) throw FormatError("truncated tensor " + t.name, r.offset());
        t.value.resize(rows, cols);
        for (std::uint64_t k = 0; k < n; ++k) t.value.data()[k] = r.get<double>("tensor values");
        ck.tensors.push_back(std::move(t));
    }
    const std::uint64_t expected = fnv1a64(bytes.data() + body, r.offset() - body);
    at = r.offset();
    ck.checksum = r.get<std::uint64_t>("checksum");
    if (ck.checksum != expected) throw FormatError("checkpoint checksum mismatch", at);
    if (r.remaining() != 0) throw FormatError("trailing bytes after checksum", r.offset());
    return ck;
}

void save_checkpoint(const ParamStore& store, std::string_view config_json, const std::string& path) {
    write_binary_file(path, encode_checkpoint(store, config_json));
}

Checkpoint load_checkpoint(const std::string& path) { return decode_checkpoint(read_binary_file(path)); }

void restore(ParamStore& store, const Checkpoint& checkpoint) {
    if (checkpoint.tensors.size() != store.size()) {
        throw ArgumentError("checkpoint holds " + std::to_string(checkpoint.tensors.size()) +
                            " tensors, model has " + std::to_string(store.size()));
    }
    for (const auto& t : checkpoint.tensors) {
        Parameter& p = store.at(t.name);
        if (p.value.rows() != t.value.rows() || p.value.cols() != t.value.cols()) {
            throw ShapeError("checkpoint tensor " + t.name + " " + shape_str(t.value) + " vs model " +
                             shape_str(p.value));
        }
        if (p.trainable != t.trainable) throw ArgumentError("checkpoint trainable flag differs for " + t.name);
        p.value = t.value;
        p.zero_grad();
    }
}

}  // namespace mrcq
