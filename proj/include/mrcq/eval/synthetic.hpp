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
#include <string>
#include <vector>

#include "mrcq/eval/metrics.hpp"
#include "mrcq/frontend/synchronize.hpp"
#include "mrcq/training/example.hpp"

namespace mrcq {

// An example plus how its answer is scored.
struct EvalExample {
    TrainingExample example;
    std::string task;
    Metric metric = Metric::accuracy_mc;
    bool yes_no = false;
    std::vector<std::string> references;  // ocr_score only
    std::string reference;                // scored answer; empty means the whole target
    std::optional<std::size_t> answer_slot;  // score only this word of the generation

    const std::string& scored_reference() const { return reference.empty() ? example.target : reference; }
};

std::vector<TrainingExample> training_view(const std::vector<EvalExample>& examples);

// Two-scale task. Every clip carries both cues; the prompt picks one.
//  fine:   each frame holds one of four symbols in speech row 0 and one
//          frame carries a marker in speech row 1; answer = the marked
//          frame's symbol. Needs frame-local binding.
//  coarse: two visual events A and B in different frames; answer = which
//          came first. Needs relations across distant frames.
struct TwoScaleSpec {
    Index frames = 10;  // at 2 Hz
    Index speech_channels = 4;
    Index visual_channels = 4;
    double amplitude = 3.0;
};

// Every clip carries both answers: prompt "both?", target "<fine> <coarse>".
// The fine view scores word 0 of the generation, the coarse view word 1.
inline constexpr std::string_view kTwoScalePrompt = "both?";
inline constexpr std::string_view kFineTask = "fine";
inline constexpr std::string_view kCoarseTask = "coarse";

SyncLayout two_scale_layout(const TwoScaleSpec& spec);
EvalExample make_two_scale_example(const TwoScaleSpec& spec, std::string_view task, std::uint64_t seed,
                                   std::string id);
// Alternates fine and coarse examples.
// Views alternate fine, coarse, fine, ...; clip i is seeded by derive_seed(seed, i).
std::vector<EvalExample> make_two_scale_dataset(const TwoScaleSpec& spec, std::size_t count, std::uint64_t seed,
                                                std::string_view id_prefix = "ts");

// Co-reasoning task: one bit planted in the audio stream, one in the visual
// stream. Audio-task and visual-task examples ask for a single bit; paired
// examples ask for their XOR, which neither modality determines alone.
struct XorSpec {
    Index frames = 4;
    Index audio_channels = 4;
    Index visual_channels = 4;
    double amplitude = 2.0;
};

inline constexpr std::string_view kXorTask = "xor";
inline constexpr std::string_view kAudioBitTask = "audio_bit";
inline constexpr std::string_view kVisualBitTask = "visual_bit";

SyncLayout xor_layout(const XorSpec& spec);
EvalExample make_xor_example(const XorSpec& spec, std::string_view task, std::uint64_t seed, std::string id);
// Cycles audio_bit, visual_bit, xor.
std::vector<EvalExample> make_xor_training_set(const XorSpec& spec, std::size_t count, std::uint64_t seed);
std::vector<EvalExample> make_xor_test_set(const XorSpec& spec, std::size_t count, std::uint64_t seed);

// Copy with one side's feature values set to zero (stream kept present).
TrainingExample zero_side(const TrainingExample& example, TaskModality side);

}  // namespace mrcq
