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

#include "mrcq/lm/tokenizer.hpp"
#include "mrcq/numerics/ops.hpp"
#include "mrcq/numerics/param_store.hpp"

namespace mrcq {

struct LmConfig {
    Index vocab = kVocabSize;  // V
    Index embed = 128;         // E
    Index blocks = 2;
    Index heads = 4;
    Index ffn_hidden = 256;
    Index lora_rank = 4;  // 0 disables the adapters
    Index context = 512;

    void validate() const;
    // alpha is tied to the rank, so the adapter scale alpha/rank is 1.
    double lora_alpha() const { return static_cast<double>(lora_rank); }
};

// Trainable low-rank factors on a frozen weight W (in x out). With the
// row-vector convention y = x W, the effective weight is
// W + (alpha/rank) * (A B)^T, A: out x rank, B: rank x in, B starting at zero.
struct LoraAdapter {
    Parameter* a = nullptr;
    Parameter* b = nullptr;
    Index rank = 0;
    double alpha = 0.0;

    double scale() const { return alpha / static_cast<double>(rank); }
};

struct AdaptedLinear {
    Parameter* w = nullptr;
    Parameter* bias = nullptr;
    std::optional<LoraAdapter> lora;
};

struct LmBlockWeights {
    Parameter *ln1_gain, *ln1_bias;
    AdaptedLinear q, k, v;
    Parameter *wo, *bo;
    Parameter *ln2_gain, *ln2_bias;
    AdaptedLinear ffn1, ffn2;
};

// Pre-norm decoder with tied input/output token embeddings. Every base
// weight is registered frozen; only the adapters are trainable.
struct LmWeights {
    LmConfig config;
    Parameter *tok_embed, *pos_embed, *lnf_gain, *lnf_bias;
    std::vector<LmBlockWeights> blocks;

    std::vector<const LoraAdapter*> adapters() const;
};

LmWeights register_lm(ParamStore& store, const LmConfig& config, std::uint64_t seed);
LmWeights attach_lm(ParamStore& store, const LmConfig& config);

struct BoundLinear {
    Var w, bias, a, b;
    double scale = 0.0;
    bool adapted = false;
};
struct BoundLmBlock {
    Var ln1_gain, ln1_bias;
    BoundLinear q, k, v;
    Var wo, bo, ln2_gain, ln2_bias;
    BoundLinear ffn1, ffn2;
};
struct BoundLm {
    const LmConfig* config = nullptr;
    Var tok_embed, pos_embed, lnf_gain, lnf_bias;
    std::vector<BoundLmBlock> blocks;
};

BoundLm bind(Tape& tape, const LmWeights& weights);

// Logits for every position of [soft rows of h] ++ embed(tokens); row p
// scores the token at position p + 1. `h` may be an empty Var (no soft rows).
Var sequence_logits(const BoundLm& lm, const Var& h, std::span<const int> tokens);

struct LmOutput {
    Var logits;  // |target| x V; row j scores target[j]
    Var loss;    // mean cross-entropy over the target tokens
};

// Teacher-forced pass over [h] ++ prompt ++ target. Loss covers target
// positions only.
LmOutput forward_lm(const BoundLm& lm, const Var& h, std::span<const int> prompt, std::span<const int> target);

// Lowest id among the maximal entries.
int argmax_token(const Matrix& logits, Index row);

// Greedy generation; stops at EOS (not emitted) or after max_len tokens.
std::vector<int> greedy_decode(const LmWeights& weights, const Matrix& h, std::span<const int> prompt,
                               Index max_len);

// Adapter parameter count / frozen base LM parameter count.
Index lm_base_param_count(const LmWeights& weights);
Index lm_adapter_param_count(const LmWeights& weights);
double lora_param_fraction(const LmWeights& weights);

}  // namespace mrcq
