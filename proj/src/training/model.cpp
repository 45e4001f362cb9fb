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

#include "mrcq/training/model.hpp"

#include "mrcq/errors.hpp"
#include "mrcq/util/rng.hpp"

namespace mrcq {

void ModelConfig::validate() const {
    if (layout.total_channels() < 1) throw ConfigError("model.layout", "no feature channels");
    if (!(layout.frame_rate > 0.0)) throw ConfigError("model.layout.frame_rate", "must be > 0");
    if (qformer.input_channels != layout.total_channels()) {
        throw ConfigError("model.qformer.input_channels", "must equal the summed layout channels (" +
                                                              std::to_string(layout.total_channels()) + ")");
    }
    if (qformer.output_dim != lm.embed) {
        throw ConfigError("model.qformer.output_dim", "must equal the LM embed width (" + std::to_string(lm.embed) +
                                                          ")");
    }
    qformer.validate();
    lm.validate();
}

Model::Model(const ModelConfig& config) : config_(config) {
    config_.validate();
    qformer_ = register_qformer(store_, config_.qformer, derive_seed(config_.seed, "qformer"));
    lm_ = register_lm(store_, config_.lm, derive_seed(config_.seed, "lm"));
}

Model::Model(const ModelConfig& config, ParamStore store) : config_(config), store_(std::move(store)) {
    config_.validate();
    qformer_ = attach_qformer(store_, config_.qformer);
    lm_ = attach_lm(store_, config_.lm);
}

BoundModel bind(Tape& tape, const Model& model) { return {bind(tape, model.qformer()), bind(tape, model.lm())}; }

SyncedSequence synchronize_example(const TrainingExample& e, const SyncLayout& layout) {
    return synchronize(e.speech ? &*e.speech : nullptr, e.audio ? &*e.audio : nullptr,
                       e.visual ? &*e.visual : nullptr, layout);
}

namespace {

Var project(const BoundModel& model, std::vector<ResolutionOutput>& levels, std::span<const Index> masked_levels) {
    for (const Index level : masked_levels) levels = mask_level(levels, level);
    return combine_resolutions(model.qformer, levels);
}

}  // namespace

ExampleForward forward_example(const BoundModel& model, const TrainingExample& example, const SyncLayout& layout,
                               std::span<const Index> masked_levels) {
    ExampleForward f;
    f.levels = run_levels(model.qformer, synchronize_example(example, layout));
    std::vector<ResolutionOutput> fed = f.levels;
    f.h = project(model, fed, masked_levels);
    f.lm = forward_lm(model.lm, f.h, encode_prompt(example.prompt), encode_target(example.target));
    return f;
}

Matrix encode_example(const Model& model, const TrainingExample& example, std::span<const Index> masked_levels) {
    Tape t;
    const BoundModel bound = bind(t, model);
    auto levels = run_levels(bound.qformer, synchronize_example(example, model.config().layout));
    return project(bound, levels, masked_levels).value();
}

std::string generate(const Model& model, const TrainingExample& example, Index max_len,
                     std::span<const Index> masked_levels) {
    const Matrix h = encode_example(model, example, masked_levels);
    return decode_tokens(greedy_decode(model.lm(), h, encode_prompt(example.prompt), max_len));
}

}  // namespace mrcq
