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
#include <string>
#include <vector>

#include "mrcq/frontend/feature_stream.hpp"

namespace mrcq {

// Which modality an example's question is about; mixing pairs an audio-task
// example with a visual-task one.
enum class TaskModality : std::uint8_t { audio, visual, audio_visual };

enum class Pairing : std::uint8_t { paired, mixed };

std::string_view task_modality_name(TaskModality m);
TaskModality parse_task_modality(std::string_view name);

struct TrainingExample {
    std::string id;
    std::optional<FeatureStream> speech, audio, visual;
    std::string prompt;  // text; tokenised with encode_prompt
    std::string target;  // text; tokenised with encode_target
    TaskModality task = TaskModality::audio_visual;
    Pairing pairing = Pairing::paired;
    // Source example ids: one for paired examples, {audio side, visual side}
    // for mixed ones.
    std::vector<std::string> sources;

    bool has_audio_side() const { return speech.has_value() || audio.has_value(); }
    bool has_visual_side() const { return visual.has_value(); }
    // Throws ArgumentError when no modality is present or ids are missing.
    void validate() const;
};

// Joins the audio-task and visual-task halves of a mixed example.
std::string join_halves(std::string_view audio_part, std::string_view visual_part);

// Audio side of `a`, visual side of `v`, prompts and targets joined by SEP.
TrainingExample make_mixed(const TrainingExample& a, const TrainingExample& v);

// Selects each paired example with probability p_mix and replaces it by the
// mix of an audio-task and a visual-task example, the partner being drawn
// from the complementary task modality within the batch. A mix of the same
// (audio, visual) pair appears once. Examples without an eligible partner
// stay unmixed and their ids are appended to `unmixed`.
std::vector<TrainingExample> mix_batch(std::span<const TrainingExample> batch, double p_mix, std::uint64_t seed,
                                       std::vector<std::string>* unmixed = nullptr);

}  // namespace mrcq
