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

#include "mrcq/eval/synthetic.hpp"

#include "mrcq/errors.hpp"
#include "mrcq/util/rng.hpp"

namespace mrcq {

std::vector<TrainingExample> training_view(const std::vector<EvalExample>& examples) {
    std::vector<TrainingExample> out;
    out.reserve(examples.size());
    for (const auto& e : examples) out.push_back(e.example);
    return out;
}

namespace {

constexpr double kVideoRate = 2.0;
constexpr double kAudioRate = 4.0;  // two audio frames per video frame

}  // namespace

SyncLayout two_scale_layout(const TwoScaleSpec& spec) {
    return SyncLayout{spec.speech_channels, 0, spec.visual_channels, kVideoRate, 0};
}

EvalExample make_two_scale_example(const TwoScaleSpec& spec, std::string_view task, std::uint64_t seed,
                                   std::string id) {
    if (spec.frames < 2 || spec.speech_channels < 4 || spec.visual_channels < 2) {
        throw ArgumentError("two-scale task: need >= 2 frames, >= 4 speech and >= 2 visual channels");
    }
    Rng rng(derive_seed(seed, "two_scale"));
    const double duration = static_cast<double>(spec.frames) / kVideoRate;
    FeatureStream speech = mock_encode(Modality::speech, seed, duration, 1, spec.speech_channels, kAudioRate);
    FeatureStream visual = mock_encode(Modality::visual, seed, duration, 1, spec.visual_channels, kVideoRate);

    // Fine cue: symbols on even audio rows, the marker on the odd row of one frame.
    std::vector<int> symbols(static_cast<std::size_t>(spec.frames));
    for (Index t = 0; t < spec.frames; ++t) {
        symbols[static_cast<std::size_t>(t)] = static_cast<int>(rng.below(4));
        speech.values(2 * t, symbols[static_cast<std::size_t>(t)]) += spec.amplitude;
    }
    const Index marked = static_cast<Index>(rng.below(static_cast<std::uint64_t>(spec.frames)));
    speech.values.row(2 * marked + 1).array() += spec.amplitude / 2.0;

    // Coarse cue: events A (channel 0) and B (channel 1) in distinct frames.
    const Index a = static_cast<Index>(rng.below(static_cast<std::uint64_t>(spec.frames)));
    Index b = static_cast<Index>(rng.below(static_cast<std::uint64_t>(spec.frames - 1)));
    if (b >= a) ++b;
    visual.values(a, 0) += spec.amplitude;
    visual.values(b, 1) += spec.amplitude;

    EvalExample e;
    e.task = std::string(task);
    e.example.id = std::move(id);
    e.example.sources = {e.example.id};
    e.example.speech = std::move(speech);
    e.example.visual = std::move(visual);
    const std::string fine(1, "abcd"[symbols[static_cast<std::size_t>(marked)]]);
    const std::string coarse = a < b ? "x" : "y";
    e.example.prompt = std::string(kTwoScalePrompt);
    e.example.target = fine + " " + coarse;
    e.example.task = TaskModality::audio_visual;
    if (task == kFineTask) {
        e.reference = fine;
        e.answer_slot = 0;
    } else if (task == kCoarseTask) {
        e.reference = coarse;
        e.answer_slot = 1;
    } else {
        throw ArgumentError("two-scale task: unknown subtask '" + std::string(task) + "'");
    }
    return e;
}

std::vector<EvalExample> make_two_scale_dataset(const TwoScaleSpec& spec, std::size_t count, std::uint64_t seed,
                                                std::string_view id_prefix) {
    std::vector<EvalExample> out;
    for (std::size_t i = 0; i < count; ++i) {
        const std::string_view task = i % 2 == 0 ? kFineTask : kCoarseTask;
        out.push_back(make_two_scale_example(spec, task, derive_seed(seed, std::to_string(i)),
                                             std::string(id_prefix) + std::to_string(i)));
    }
    return out;
}

SyncLayout xor_layout(const XorSpec& spec) {
    return SyncLayout{0, spec.audio_channels, spec.visual_channels, kVideoRate, 0};
}

EvalExample make_xor_example(const XorSpec& spec, std::string_view task, std::uint64_t seed, std::string id) {
    if (spec.frames < 1 || spec.audio_channels < 1 || spec.visual_channels < 1) {
        throw ArgumentError("xor task: need >= 1 frame and channel per modality");
    }
    Rng rng(derive_seed(seed, "xor"));
    const double duration = static_cast<double>(spec.frames) / kVideoRate;
    FeatureStream audio = mock_encode(Modality::audio, seed, duration, 1, spec.audio_channels, kAudioRate);
    FeatureStream visual = mock_encode(Modality::visual, seed, duration, 1, spec.visual_channels, kVideoRate);
    const int bit_a = rng.bernoulli(0.5) ? 1 : 0;
    const int bit_v = rng.bernoulli(0.5) ? 1 : 0;
    audio.values.col(0).array() += spec.amplitude * (2 * bit_a - 1);
    visual.values.col(0).array() += spec.amplitude * (2 * bit_v - 1);

    EvalExample e;
    e.task = std::string(task);
    e.example.id = std::move(id);
    e.example.sources = {e.example.id};
    e.example.audio = std::move(audio);
    e.example.visual = std::move(visual);
    if (task == kAudioBitTask) {
        e.example.prompt = "a?";
        e.example.target = std::to_string(bit_a);
        e.example.task = TaskModality::audio;
    } else if (task == kVisualBitTask) {
        e.example.prompt = "v?";
        e.example.target = std::to_string(bit_v);
        e.example.task = TaskModality::visual;
    } else if (task == kXorTask) {
        e.example.prompt = "x?";
        e.example.target = std::to_string(bit_a ^ bit_v);
        e.example.task = TaskModality::audio_visual;
    } else {
        throw ArgumentError("xor task: unknown subtask '" + std::string(task) + "'");
    }
    return e;
}

std::vector<EvalExample> make_xor_training_set(const XorSpec& spec, std::size_t count, std::uint64_t seed) {
    static constexpr std::string_view kCycle[] = {kAudioBitTask, kVisualBitTask, kXorTask};
    std::vector<EvalExample> out;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(make_xor_example(spec, kCycle[i % 3], derive_seed(seed, std::to_string(i)),
                                       "xtr" + std::to_string(i)));
    }
    return out;
}

std::vector<EvalExample> make_xor_test_set(const XorSpec& spec, std::size_t count, std::uint64_t seed) {
    std::vector<EvalExample> out;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(make_xor_example(spec, kXorTask, derive_seed(seed, "test/" + std::to_string(i)),
                                       "xte" + std::to_string(i)));
    }
    return out;
}

TrainingExample zero_side(const TrainingExample& example, TaskModality side) {
    TrainingExample e = example;
    if (side == TaskModality::audio || side == TaskModality::audio_visual) {
        if (e.speech) e.speech->values.setZero();
        if (e.audio) e.audio->values.setZero();
    }
    if (side == TaskModality::visual || side == TaskModality::audio_visual) {
        if (e.visual) e.visual->values.setZero();
    }
    return e;
}

}  // namespace mrcq
