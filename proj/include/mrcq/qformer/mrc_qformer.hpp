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
#include <span>
#include <vector>

#include "mrcq/errors.hpp"
#include "mrcq/frontend/synchronize.hpp"
#include "mrcq/numerics/ops.hpp"
#include "mrcq/numerics/param_store.hpp"
#include "mrcq/qformer/resolution.hpp"

namespace mrcq {

class DegenerateWindowError : public Error {
public:
    using Error::Error;
};

struct QFormerConfig {
    Index input_channels = 0;  // d_s + d_a + d_v
    Index hidden = 64;         // D
    Index heads = 4;
    Index ffn_hidden = 128;
    Index blocks = 2;
    Index output_dim = 128;  // E
    std::vector<ResolutionSpec> levels{{1, 3}, {10, 30}};

    void validate() const;
    Index max_window_frames() const;
};

// Parameters of one attention sublayer (projections, biases, post-norm).
struct AttentionWeights {
    Parameter *wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo, *ln_gain, *ln_bias;
};

struct FeedForwardWeights {
    Parameter *w1, *b1, *w2, *b2, *ln_gain, *ln_bias;
};

struct QFormerBlockWeights {
    AttentionWeights causal;      // frame stream, block-causal mask
    AttentionWeights query_self;  // queries among themselves
    AttentionWeights cross;       // queries -> frame stream
    FeedForwardWeights ffn;       // on queries
};

struct LevelWeights {
    Parameter* queries;     // N(r) x D
    Parameter* projection;  // D x E
};

// Shared Q-Former weights plus per-level queries and projections. Pointers
// refer into the ParamStore that registered them.
struct QFormerWeights {
    QFormerConfig config;
    Parameter *in_proj, *in_bias, *frame_pos, *in_ln_gain, *in_ln_bias;
    std::vector<QFormerBlockWeights> blocks;
    std::vector<LevelWeights> levels;
};

// Registers every Q-Former parameter under "qformer." in the store.
QFormerWeights register_qformer(ParamStore& store, const QFormerConfig& config, std::uint64_t seed);
// Rebinds to parameters already present in the store (e.g. after loading).
QFormerWeights attach_qformer(ParamStore& store, const QFormerConfig& config);

// Parameters bound onto one tape. Binding once per tape avoids copying the
// weights for every window.
struct BoundAttention {
    Var wq, bq, wk, bk, wv, bv, wo, bo, ln_gain, ln_bias;
};
struct BoundFeedForward {
    Var w1, b1, w2, b2, ln_gain, ln_bias;
};
struct BoundBlock {
    BoundAttention causal, query_self, cross;
    BoundFeedForward ffn;
};
struct BoundQFormer {
    const QFormerConfig* config = nullptr;
    Var in_proj, in_bias, frame_pos, in_ln_gain, in_ln_bias;
    std::vector<BoundBlock> blocks;
    std::vector<Var> queries;
    std::vector<Var> projections;
};

BoundQFormer bind(Tape& tape, const QFormerWeights& weights);

// Output query vectors of one level, (window, query)-ordered, C x D.
struct ResolutionOutput {
    Index level = 1;  // 1-based, 1 = finest
    Var rows;
    Index windows = 0;
    Index queries_per_window = 0;
    std::vector<bool> window_has_frames;
};

// Multi-head attention sublayer with residual and post layer norm.
Var attention_sublayer(const BoundAttention& w, const Var& x, const Var& context, const Mask& mask, Index heads);

// Block-causal frame encoding of one window: input projection, frame
// position embeddings, then each block's causal self-attention. Returns the
// frame stream after every block (kF x D each).
std::vector<Var> encode_frames(const BoundQFormer& q, const Var& window_features, Index features_per_frame,
                               const std::vector<bool>& frame_valid);

// One Q-Former pass over a window: N x D output queries. Padded frames are
// masked out of both attentions; a window with no valid frame is rejected.
Var qformer_window(const BoundQFormer& q, const Var& window_features, Index features_per_frame,
                   const std::vector<bool>& frame_valid, const Var& queries);

// Applies the shared Q-Former to every window of one level.
ResolutionOutput run_level(const BoundQFormer& q, const SyncedSequence& synced, Index level);
std::vector<ResolutionOutput> run_levels(const BoundQFormer& q, const SyncedSequence& synced);

// H = sum_r H^(r) W^(r), C x E.
Var combine_resolutions(const BoundQFormer& q, std::span<const ResolutionOutput> outputs);

// Copy of the outputs with level r's rows replaced by zeros.
std::vector<ResolutionOutput> mask_level(std::span<const ResolutionOutput> outputs, Index level);

}  // namespace mrcq
