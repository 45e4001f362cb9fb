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

#include "mrcq/lm/toy_lm.hpp"

#include <cmath>
#include <string>

#include "mrcq/errors.hpp"
#include "mrcq/qformer/resolution.hpp"

namespace mrcq {

void LmConfig::validate() const {
    if (vocab < 1 || vocab > kVocabSize) throw ArgumentError("lm: vocab must be in [1, 256]");
    if (embed < 2) throw ArgumentError("lm: embed width must be >= 2");
    if (heads < 1 || embed % heads != 0) throw ArgumentError("lm: heads must divide the embed width");
    if (blocks < 1 || ffn_hidden < 1) throw ArgumentError("lm: blocks and ffn_hidden must be >= 1");
    if (lora_rank < 0) throw ArgumentError("lm: lora_rank must be >= 0");
    if (context < 2) throw ArgumentError("lm: context must be >= 2");
}

std::vector<const LoraAdapter*> LmWeights::adapters() const {
    std::vector<const LoraAdapter*> out;
    for (const auto& b : blocks) {
        for (const AdaptedLinear* l : {&b.q, &b.k, &b.v, &b.ffn1, &b.ffn2}) {
            if (l->lora) out.push_back(&*l->lora);
        }
    }
    return out;
}

namespace {

struct Registrar {
    ParamStore& store;
    std::uint64_t seed;
    bool create;

    Parameter* get(const std::string& name, Index rows, Index cols, double std_dev, bool trainable,
                   double fill = 0.0) {
        if (!create) {
            Parameter& p = store.at(name);
            if (p.value.rows() != rows || p.value.cols() != cols) {
                throw ShapeError("parameter " + name + " has shape " + shape_str(p.value) + ", expected [" +
                                 std::to_string(rows) + "x" + std::to_string(cols) + "]");
            }
            return &p;
        }
        Matrix init = std_dev > 0.0 ? init_normal(rows, cols, std_dev, seed, name) : Matrix::Constant(rows, cols, fill);
        return &store.add(name, std::move(init), trainable);
    }

    AdaptedLinear linear(const std::string& name, Index in, Index out, Index rank, bool adapt) {
        AdaptedLinear l;
        l.w = get(name + ".w", in, out, 1.0 / std::sqrt(static_cast<double>(in)), false);
        l.bias = get(name + ".bias", 1, out, 0.0, false);
        if (adapt && rank > 0) {
            l.lora = LoraAdapter{get(name + ".lora_a", out, rank, 1.0 / std::sqrt(static_cast<double>(rank)), true),
                                 get(name + ".lora_b", rank, in, 0.0, true), rank, static_cast<double>(rank)};
        }
        return l;
    }
};

LmWeights build(ParamStore& store, const LmConfig& config, std::uint64_t seed, bool create) {
    config.validate();
    Registrar reg{store, seed, create};
    const Index e = config.embed;
    const Index r = config.lora_rank;
    LmWeights w;
    w.config = config;
    // Embedding scale lets tied logits reach margins of order 2*sqrt(E).
    w.tok_embed = reg.get("lm.tok_embed", config.vocab, e, 2.0 / std::sqrt(static_cast<double>(e)), false);
    w.pos_embed = reg.get("lm.pos_embed", config.context, e, 0.1, false);
    for (Index b = 0; b < config.blocks; ++b) {
        const std::string p = "lm.block" + std::to_string(b);
        LmBlockWeights blk;
        blk.ln1_gain = reg.get(p + ".ln1_gain", 1, e, 0.0, false, 1.0);
        blk.ln1_bias = reg.get(p + ".ln1_bias", 1, e, 0.0, false);
        blk.q = reg.linear(p + ".attn.q", e, e, r, true);
        blk.k = reg.linear(p + ".attn.k", e, e, r, true);
        blk.v = reg.linear(p + ".attn.v", e, e, r, true);
        blk.wo = reg.get(p + ".attn.o.w", e, e, 1.0 / std::sqrt(static_cast<double>(e)), false);
        blk.bo = reg.get(p + ".attn.o.bias", 1, e, 0.0, false);
        blk.ln2_gain = reg.get(p + ".ln2_gain", 1, e, 0.0, false, 1.0);
        blk.ln2_bias = reg.get(p + ".ln2_bias", 1, e, 0.0, false);
        blk.ffn1 = reg.linear(p + ".ffn1", e, config.ffn_hidden, r, true);
        blk.ffn2 = reg.linear(p + ".ffn2", config.ffn_hidden, e, r, true);
        w.blocks.push_back(blk);
    }
    w.lnf_gain = reg.get("lm.lnf_gain", 1, e, 0.0, false, 1.0);
    w.lnf_bias = reg.get("lm.lnf_bias", 1, e, 0.0, false);
    return w;
}

BoundLinear bind_linear(Tape& t, const AdaptedLinear& l) {
    BoundLinear b{t.param(*l.w), t.param(*l.bias), {}, {}, 0.0, false};
    if (l.lora) {
        b.a = t.param(*l.lora->a);
        b.b = t.param(*l.lora->b);
        b.scale = l.lora->scale();
        b.adapted = true;
    }
    return b;
}

Var apply(const BoundLinear& l, const Var& x) {
    Var y = add_row(matmul(x, l.w), l.bias);
    if (l.adapted) {
        Var delta = matmul_nt(matmul_nt(x, l.b), l.a);
        if (l.scale != 1.0) delta = scale(delta, l.scale);
        y = add(y, delta);
    }
    return y;
}

Var self_attention(const BoundLmBlock& b, const Var& x, const Mask& mask, Index heads) {
    const Var q = apply(b.q, x);
    const Var k = apply(b.k, x);
    const Var v = apply(b.v, x);
    Var attended;
    if (heads == 1) {
        attended = masked_attention(q, k, v, mask);
    } else {
        const Index dh = q.cols() / heads;
        std::vector<Var> parts;
        parts.reserve(static_cast<std::size_t>(heads));
        for (Index h = 0; h < heads; ++h) {
            parts.push_back(masked_attention(slice_cols(q, h * dh, dh), slice_cols(k, h * dh, dh),
                                             slice_cols(v, h * dh, dh), mask));
        }
        attended = concat_cols(parts);
    }
    return add_row(matmul(attended, b.wo), b.bo);
}

void check_tokens(std::span<const int> ids, Index vocab, const char* what) {
    for (int id : ids) {
        if (id < 0 || id >= vocab) {
            throw ArgumentError(std::string("lm: ") + what + " token " + std::to_string(id) + " outside the vocabulary");
        }
    }
}

}  // namespace

LmWeights register_lm(ParamStore& store, const LmConfig& config, std::uint64_t seed) {
    return build(store, config, seed, true);
}

LmWeights attach_lm(ParamStore& store, const LmConfig& config) { return build(store, config, 0, false); }

BoundLm bind(Tape& t, const LmWeights& w) {
    BoundLm lm;
    lm.config = &w.config;
    lm.tok_embed = t.param(*w.tok_embed);
    lm.pos_embed = t.param(*w.pos_embed);
    lm.lnf_gain = t.param(*w.lnf_gain);
    lm.lnf_bias = t.param(*w.lnf_bias);
    for (const auto& b : w.blocks) {
        lm.blocks.push_back({t.param(*b.ln1_gain), t.param(*b.ln1_bias), bind_linear(t, b.q), bind_linear(t, b.k),
                             bind_linear(t, b.v), t.param(*b.wo), t.param(*b.bo), t.param(*b.ln2_gain),
                             t.param(*b.ln2_bias), bind_linear(t, b.ffn1), bind_linear(t, b.ffn2)});
    }
    return lm;
}

Var sequence_logits(const BoundLm& lm, const Var& h, std::span<const int> tokens) {
    const LmConfig& cfg = *lm.config;
    const Index soft = h.valid() ? h.rows() : 0;
    if (soft > 0 && h.cols() != cfg.embed) {
        throw ShapeError("lm: soft prompt " + shape_str(h.value()) + " does not match embed width " +
                         std::to_string(cfg.embed));
    }
    const Index n = soft + static_cast<Index>(tokens.size());
    if (n == 0) throw EmptyInputError("lm: empty input sequence");
    if (n > cfg.context) {
        throw LengthError("lm: sequence of " + std::to_string(n) + " positions exceeds the context limit of " +
                          std::to_string(cfg.context));
    }
    check_tokens(tokens, cfg.vocab, "input");

    std::vector<Var> parts;
    if (soft > 0) parts.push_back(h);
    if (!tokens.empty()) parts.push_back(gather_rows(lm.tok_embed, tokens));
    Var x = parts.size() == 1 ? parts[0] : concat_rows(parts);
    std::vector<int> positions(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) positions[static_cast<std::size_t>(i)] = static_cast<int>(i);
    x = add(x, gather_rows(lm.pos_embed, positions));

    const Mask mask = causal_mask(n, 1);
    for (const auto& b : lm.blocks) {
        x = add(x, self_attention(b, layer_norm(x, b.ln1_gain, b.ln1_bias), mask, cfg.heads));
        const Var hidden = gelu(apply(b.ffn1, layer_norm(x, b.ln2_gain, b.ln2_bias)));
        x = add(x, apply(b.ffn2, hidden));
    }
    return matmul_nt(layer_norm(x, lm.lnf_gain, lm.lnf_bias), lm.tok_embed);
}

LmOutput forward_lm(const BoundLm& lm, const Var& h, std::span<const int> prompt, std::span<const int> target) {
    if (target.empty()) throw EmptyInputError("lm: empty target, nothing to score");
    const Index soft = h.valid() ? h.rows() : 0;
    const Index lead = soft + static_cast<Index>(prompt.size());
    if (lead == 0) throw EmptyInputError("lm: no soft rows or prompt tokens to condition the first target on");
    check_tokens(target, lm.config->vocab, "target");

    std::vector<int> tokens(prompt.begin(), prompt.end());
    tokens.insert(tokens.end(), target.begin(), target.end());
    const Var all = sequence_logits(lm, h, tokens);
    LmOutput out;
    out.logits = slice_rows(all, lead - 1, static_cast<Index>(target.size()));
    out.loss = cross_entropy(out.logits, target);
    return out;
}

int argmax_token(const Matrix& logits, Index row) {
    int best = 0;
    for (Index j = 1; j < logits.cols(); ++j) {
        if (logits(row, j) > logits(row, best)) best = static_cast<int>(j);
    }
    return best;
}

std::vector<int> greedy_decode(const LmWeights& weights, const Matrix& h, std::span<const int> prompt,
                               Index max_len) {
    if (max_len < 1) throw ArgumentError("greedy_decode: max_len must be >= 1");
    std::vector<int> tokens(prompt.begin(), prompt.end());
    std::vector<int> out;
    for (Index step = 0; step < max_len; ++step) {
        if (h.rows() + static_cast<Index>(tokens.size()) >= weights.config.context) break;
        Tape t;
        const BoundLm lm = bind(t, weights);
        const Var soft = h.rows() > 0 ? t.constant(h) : Var{};
        const Var logits = sequence_logits(lm, soft, tokens);
        const int next = argmax_token(logits.value(), logits.rows() - 1);
        if (next == kEos) break;
        out.push_back(next);
        tokens.push_back(next);
    }
    return out;
}

Index lm_base_param_count(const LmWeights& w) {
    Index n = w.tok_embed->value.size() + w.pos_embed->value.size() + w.lnf_gain->value.size() +
              w.lnf_bias->value.size();
    for (const auto& b : w.blocks) {
        for (const Parameter* p : {b.ln1_gain, b.ln1_bias, b.wo, b.bo, b.ln2_gain, b.ln2_bias}) n += p->value.size();
        for (const AdaptedLinear* l : {&b.q, &b.k, &b.v, &b.ffn1, &b.ffn2}) {
            n += l->w->value.size() + l->bias->value.size();
        }
    }
    return n;
}

Index lm_adapter_param_count(const LmWeights& w) {
    Index n = 0;
    for (const LoraAdapter* a : w.adapters()) n += a->a->value.size() + a->b->value.size();
    return n;
}

double lora_param_fraction(const LmWeights& w) {
    return static_cast<double>(lm_adapter_param_count(w)) / static_cast<double>(lm_base_param_count(w));
}

}  // namespace mrcq
