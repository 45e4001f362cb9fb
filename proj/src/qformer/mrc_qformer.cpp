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

#include "mrcq/qformer/mrc_qformer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mrcq {

void QFormerConfig::validate() const {
    if (input_channels < 1) throw ArgumentError("qformer: input_channels must be >= 1");
    if (hidden < 2) throw ArgumentError("qformer: hidden width must be >= 2");
    if (heads < 1 || hidden % heads != 0) throw ArgumentError("qformer: heads must divide the hidden width");
    if (ffn_hidden < 1 || blocks < 1 || output_dim < 1) throw ArgumentError("qformer: sizes must be >= 1");
    validate_levels(levels);
}

Index QFormerConfig::max_window_frames() const {
    Index k = 1;
    for (const auto& l : levels) k = std::max(k, l.window_frames);
    return k;
}

namespace {

struct Registrar {
    ParamStore& store;
    std::uint64_t seed;
    bool create;

    Parameter* get(const std::string& name, Index rows, Index cols, double std_dev, double fill = 0.0) {
        if (!create) {
            Parameter& p = store.at(name);
            if (p.value.rows() != rows || p.value.cols() != cols) {
                throw ShapeError("parameter " + name + " has shape " + shape_str(p.value) + ", expected [" +
                                 std::to_string(rows) + "x" + std::to_string(cols) + "]");
            }
            return &p;
        }
        Matrix init = std_dev > 0.0 ? init_normal(rows, cols, std_dev, seed, name) : Matrix::Constant(rows, cols, fill);
        return &store.add(name, std::move(init), true);
    }

    AttentionWeights attention(const std::string& prefix, Index d) {
        const double s = 1.0 / std::sqrt(static_cast<double>(d));
        return {get(prefix + ".wq", d, d, s),        get(prefix + ".bq", 1, d, 0.0),
                get(prefix + ".wk", d, d, s),        get(prefix + ".bk", 1, d, 0.0),
                get(prefix + ".wv", d, d, s),        get(prefix + ".bv", 1, d, 0.0),
                get(prefix + ".wo", d, d, s),        get(prefix + ".bo", 1, d, 0.0),
                get(prefix + ".ln_gain", 1, d, 0.0, 1.0), get(prefix + ".ln_bias", 1, d, 0.0)};
    }

    FeedForwardWeights ffn(const std::string& prefix, Index d, Index h) {
        return {get(prefix + ".w1", d, h, 1.0 / std::sqrt(static_cast<double>(d))),
                get(prefix + ".b1", 1, h, 0.0),
                get(prefix + ".w2", h, d, 1.0 / std::sqrt(static_cast<double>(h))),
                get(prefix + ".b2", 1, d, 0.0),
                get(prefix + ".ln_gain", 1, d, 0.0, 1.0),
                get(prefix + ".ln_bias", 1, d, 0.0)};
    }
};

QFormerWeights build(ParamStore& store, const QFormerConfig& config, std::uint64_t seed, bool create) {
    config.validate();
    Registrar reg{store, seed, create};
    const Index d = config.hidden;
    QFormerWeights w;
    w.config = config;
    w.in_proj = reg.get("qformer.in_proj", config.input_channels, d,
                        1.0 / std::sqrt(static_cast<double>(config.input_channels)));
    w.in_bias = reg.get("qformer.in_bias", 1, d, 0.0);
    w.frame_pos = reg.get("qformer.frame_pos", config.max_window_frames(), d, 0.1);
    w.in_ln_gain = reg.get("qformer.in_ln_gain", 1, d, 0.0, 1.0);
    w.in_ln_bias = reg.get("qformer.in_ln_bias", 1, d, 0.0);
    for (Index b = 0; b < config.blocks; ++b) {
        const std::string p = "qformer.block" + std::to_string(b);
        w.blocks.push_back({reg.attention(p + ".causal", d), reg.attention(p + ".query_self", d),
                            reg.attention(p + ".cross", d), reg.ffn(p + ".ffn", d, config.ffn_hidden)});
    }
    for (std::size_t r = 0; r < config.levels.size(); ++r) {
        const std::string p = "qformer.level" + std::to_string(r + 1);
        w.levels.push_back({reg.get(p + ".queries", config.levels[r].queries, d, 1.0),
                            reg.get(p + ".proj", d, config.output_dim, 1.0 / std::sqrt(static_cast<double>(d)))});
    }
    return w;
}

BoundAttention bind_attention(Tape& t, const AttentionWeights& a) {
    return {t.param(*a.wq), t.param(*a.bq), t.param(*a.wk), t.param(*a.bk), t.param(*a.wv),
            t.param(*a.bv), t.param(*a.wo), t.param(*a.bo), t.param(*a.ln_gain), t.param(*a.ln_bias)};
}

Var linear(const Var& x, const Var& w, const Var& b) { return add_row(matmul(x, w), b); }

}  // namespace

QFormerWeights register_qformer(ParamStore& store, const QFormerConfig& config, std::uint64_t seed) {
    return build(store, config, seed, true);
}

QFormerWeights attach_qformer(ParamStore& store, const QFormerConfig& config) {
    return build(store, config, 0, false);
}

BoundQFormer bind(Tape& t, const QFormerWeights& w) {
    BoundQFormer q;
    q.config = &w.config;
    q.in_proj = t.param(*w.in_proj);
    q.in_bias = t.param(*w.in_bias);
    q.frame_pos = t.param(*w.frame_pos);
    q.in_ln_gain = t.param(*w.in_ln_gain);
    q.in_ln_bias = t.param(*w.in_ln_bias);
    for (const auto& b : w.blocks) {
        const auto& f = b.ffn;
        q.blocks.push_back({bind_attention(t, b.causal), bind_attention(t, b.query_self), bind_attention(t, b.cross),
                            {t.param(*f.w1), t.param(*f.b1), t.param(*f.w2), t.param(*f.b2), t.param(*f.ln_gain),
                             t.param(*f.ln_bias)}});
    }
    for (const auto& l : w.levels) {
        q.queries.push_back(t.param(*l.queries));
        q.projections.push_back(t.param(*l.projection));
    }
    return q;
}

Var attention_sublayer(const BoundAttention& w, const Var& x, const Var& context, const Mask& mask, Index heads) {
    const Var q = linear(x, w.wq, w.bq);
    const Var k = linear(context, w.wk, w.bk);
    const Var v = linear(context, w.wv, w.bv);
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
    return layer_norm(add(x, linear(attended, w.wo, w.bo)), w.ln_gain, w.ln_bias);
}

namespace {

Var feed_forward(const BoundFeedForward& f, const Var& x) {
    const Var h = gelu(linear(x, f.w1, f.b1));
    return layer_norm(add(x, linear(h, f.w2, f.b2)), f.ln_gain, f.ln_bias);
}

void check_window(const Var& window_features, Index features_per_frame, const std::vector<bool>& frame_valid,
                  const QFormerConfig& config) {
    const Index frames = static_cast<Index>(frame_valid.size());
    if (features_per_frame < 1 || frames < 1 || window_features.rows() != frames * features_per_frame) {
        throw ShapeError("qformer window: " + shape_str(window_features.value()) + " rows do not hold " +
                         std::to_string(frames) + " frames of " + std::to_string(features_per_frame) + " features");
    }
    if (window_features.cols() != config.input_channels) {
        throw ShapeError("qformer window: expected " + std::to_string(config.input_channels) + " channels, got " +
                         shape_str(window_features.value()));
    }
    if (frames > config.max_window_frames()) {
        throw ShapeError("qformer window: " + std::to_string(frames) + " frames exceed the positional table");
    }
    if (std::none_of(frame_valid.begin(), frame_valid.end(), [](bool v) { return v; })) {
        throw DegenerateWindowError("qformer window: every frame is padding");
    }
}

}  // namespace

std::vector<Var> encode_frames(const BoundQFormer& q, const Var& window_features, Index features_per_frame,
                               const std::vector<bool>& frame_valid) {
    const QFormerConfig& cfg = *q.config;
    check_window(window_features, features_per_frame, frame_valid, cfg);
    const Index frames = static_cast<Index>(frame_valid.size());
    const Index n = frames * features_per_frame;

    std::vector<int> positions(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) positions[static_cast<std::size_t>(i)] = static_cast<int>(i / features_per_frame);
    Var x = add(linear(window_features, q.in_proj, q.in_bias), gather_rows(q.frame_pos, positions));
    x = layer_norm(x, q.in_ln_gain, q.in_ln_bias);

    Mask mask = causal_mask(frames, features_per_frame);
    for (Index j = 0; j < n; ++j) {
        if (!frame_valid[static_cast<std::size_t>(j / features_per_frame)]) mask.col(j).setConstant(false);
    }
    std::vector<Var> stream;
    for (const auto& block : q.blocks) {
        x = attention_sublayer(block.causal, x, x, mask, cfg.heads);
        stream.push_back(x);
    }
    return stream;
}

Var qformer_window(const BoundQFormer& q, const Var& window_features, Index features_per_frame,
                   const std::vector<bool>& frame_valid, const Var& queries) {
    const QFormerConfig& cfg = *q.config;
    if (queries.cols() != cfg.hidden) {
        throw ShapeError("qformer window: queries " + shape_str(queries.value()) + " do not have width " +
                         std::to_string(cfg.hidden));
    }
    const std::vector<Var> frames = encode_frames(q, window_features, features_per_frame, frame_valid);
    const Index n = window_features.rows();
    Mask key_valid(queries.rows(), n);
    for (Index j = 0; j < n; ++j) {
        key_valid.col(j).setConstant(static_cast<bool>(frame_valid[static_cast<std::size_t>(j / features_per_frame)]));
    }
    const Mask all = Mask::Constant(queries.rows(), queries.rows(), true);
    Var h = queries;
    for (std::size_t b = 0; b < q.blocks.size(); ++b) {
        const BoundBlock& block = q.blocks[b];
        h = attention_sublayer(block.query_self, h, h, all, cfg.heads);
        h = attention_sublayer(block.cross, h, frames[b], key_valid, cfg.heads);
        h = feed_forward(block.ffn, h);
    }
    return h;
}

ResolutionOutput run_level(const BoundQFormer& q, const SyncedSequence& synced, Index level) {
    const QFormerConfig& cfg = *q.config;
    if (level < 1 || level > static_cast<Index>(cfg.levels.size())) {
        throw ArgumentError("run_level: unknown level " + std::to_string(level));
    }
    if (synced.channels() != cfg.input_channels) {
        throw ShapeError("run_level: synced sequence has " + std::to_string(synced.channels()) +
                         " channels, Q-Former expects " + std::to_string(cfg.input_channels));
    }
    const ResolutionSpec& spec = cfg.levels[static_cast<std::size_t>(level - 1)];
    const Index F = synced.features_per_frame;
    const WindowPlan plan = partition_windows(synced.frames, spec.window_frames, cfg.levels);
    const Index expected_rows = output_rows(synced.frames, cfg.levels);
    const Index produced_rows = static_cast<Index>(plan.windows.size()) * spec.queries;
    if (produced_rows != expected_rows) {
        throw ShapeError("token-count identity violated at level " + std::to_string(level) + ": " +
                         std::to_string(produced_rows) + " rows, C = " + std::to_string(expected_rows));
    }

    Tape& tape = *q.in_proj.tape();
    const Var& queries = q.queries[static_cast<std::size_t>(level - 1)];
    ResolutionOutput out;
    out.level = level;
    out.windows = static_cast<Index>(plan.windows.size());
    out.queries_per_window = spec.queries;
    std::vector<Var> parts;
    for (const Window& w : plan.windows) {
        if (w.valid_frames == 0) {
            parts.push_back(tape.constant(Matrix::Zero(spec.queries, cfg.hidden)));
            out.window_has_frames.push_back(false);
            continue;
        }
        Matrix features = Matrix::Zero(w.frames * F, synced.channels());
        features.topRows(w.valid_frames * F) = synced.values.middleRows(w.first_frame * F, w.valid_frames * F);
        std::vector<bool> valid(static_cast<std::size_t>(w.frames), false);
        std::fill(valid.begin(), valid.begin() + w.valid_frames, true);
        parts.push_back(qformer_window(q, tape.constant(std::move(features)), F, valid, queries));
        out.window_has_frames.push_back(true);
    }
    out.rows = concat_rows(parts);
    return out;
}

std::vector<ResolutionOutput> run_levels(const BoundQFormer& q, const SyncedSequence& synced) {
    std::vector<ResolutionOutput> outs;
    for (Index r = 1; r <= static_cast<Index>(q.config->levels.size()); ++r) outs.push_back(run_level(q, synced, r));
    return outs;
}

Var combine_resolutions(const BoundQFormer& q, std::span<const ResolutionOutput> outputs) {
    if (outputs.empty()) throw ArgumentError("combine_resolutions: no levels");
    const Index rows = outputs[0].rows.rows();
    Var h;
    for (const auto& o : outputs) {
        if (o.rows.rows() != rows) {
            throw ShapeError("combine_resolutions: level " + std::to_string(o.level) + " has " +
                             std::to_string(o.rows.rows()) + " rows, level " + std::to_string(outputs[0].level) +
                             " has " + std::to_string(rows));
        }
        if (o.level < 1 || o.level > static_cast<Index>(q.projections.size())) {
            throw ArgumentError("combine_resolutions: unknown level " + std::to_string(o.level));
        }
        const Var projected = matmul(o.rows, q.projections[static_cast<std::size_t>(o.level - 1)]);
        h = h.valid() ? add(h, projected) : projected;
    }
    return h;
}

std::vector<ResolutionOutput> mask_level(std::span<const ResolutionOutput> outputs, Index level) {
    std::vector<ResolutionOutput> out(outputs.begin(), outputs.end());
    bool found = false;
    for (auto& o : out) {
        if (o.level != level) continue;
        found = true;
        o.rows = o.rows.tape()->constant(Matrix::Zero(o.rows.rows(), o.rows.cols()));
    }
    if (!found) throw ArgumentError("mask_level: level " + std::to_string(level) + " is not configured");
    return out;
}

}  // namespace mrcq
