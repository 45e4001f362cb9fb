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

// Small models and examples shared by the unit and acceptance suites.

#include <string>

#include "mrcq/frontend/feature_stream.hpp"
#include "mrcq/training/model.hpp"

namespace mrcq::testing {

inline ModelConfig toy_model_config(std::uint64_t seed = 0, Index rank = 2) {
    ModelConfig c;
    c.layout = SyncLayout{0, 3, 3, 2.0, 0};
    c.qformer.input_channels = 6;
    c.qformer.hidden = 8;
    c.qformer.heads = 2;
    c.qformer.ffn_hidden = 12;
    c.qformer.blocks = 2;
    c.qformer.output_dim = 32;
    c.qformer.levels = {{1, 2}, {2, 4}};
    c.lm.embed = 32;
    c.lm.heads = 2;
    c.lm.ffn_hidden = 32;
    c.lm.blocks = 2;
    c.lm.lora_rank = rank;
    c.lm.context = 64;
    c.seed = seed;
    return c;
}

// `frames` video frames at 2 Hz with two audio frames per video frame.
inline TrainingExample toy_example(const std::string& id, std::uint64_t seed, Index frames, TaskModality task,
                                   std::string prompt, std::string target) {
    TrainingExample e;
    e.id = id;
    e.sources = {id};
    e.task = task;
    const double duration = static_cast<double>(frames) / 2.0;
    if (task != TaskModality::visual) e.audio = mock_encode(Modality::audio, seed, duration, 1, 3, 4.0);
    if (task != TaskModality::audio) e.visual = mock_encode(Modality::visual, seed, duration, 1, 3, 2.0);
    e.prompt = std::move(prompt);
    e.target = std::move(target);
    return e;
}

}  // namespace mrcq::testing
