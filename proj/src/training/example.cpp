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

#include "mrcq/training/example.hpp"

#include <set>
#include <utility>

#include "mrcq/errors.hpp"
#include "mrcq/lm/tokenizer.hpp"
#include "mrcq/util/rng.hpp"

namespace mrcq {

std::string_view task_modality_name(TaskModality m) {
    switch (m) {
        case TaskModality::audio: return "audio";
        case TaskModality::visual: return "visual";
        case TaskModality::audio_visual: return "audio_visual";
    }
    return "?";
}

TaskModality parse_task_modality(std::string_view name) {
    if (name == "audio") return TaskModality::audio;
    if (name == "visual") return TaskModality::visual;
    if (name == "audio_visual") return TaskModality::audio_visual;
    throw ArgumentError("unknown task modality '" + std::string(name) + "'");
}

void TrainingExample::validate() const {
    if (!has_audio_side() && !has_visual_side()) throw ArgumentError("example " + id + ": no modality present");
    if (sources.empty()) throw ArgumentError("example " + id + ": no source id");
    if (pairing == Pairing::mixed && sources.size() != 2) {
        throw ArgumentError("example " + id + ": a mixed example records exactly two sources");
    }
    if (target.empty()) throw ArgumentError("example " + id + ": empty target");
}

std::string join_halves(std::string_view audio_part, std::string_view visual_part) {
    std::string s(audio_part);
    s.push_back(static_cast<char>(kSep));
    s.append(visual_part);
    return s;
}

TrainingExample make_mixed(const TrainingExample& a, const TrainingExample& v) {
    TrainingExample m;
    m.id = "mix(" + a.id + "," + v.id + ")";
    m.speech = a.speech;
    m.audio = a.audio;
    m.visual = v.visual;
    m.prompt = join_halves(a.prompt, v.prompt);
    m.target = join_halves(a.target, v.target);
    m.task = TaskModality::audio_visual;
    m.pairing = Pairing::mixed;
    m.sources = {a.sources.front(), v.sources.front()};
    return m;
}

namespace {

bool eligible(const TrainingExample& e) {
    if (e.pairing != Pairing::paired) return false;
    if (e.task == TaskModality::audio) return e.has_audio_side();
    if (e.task == TaskModality::visual) return e.has_visual_side();
    return false;
}

}  // namespace

std::vector<TrainingExample> mix_batch(std::span<const TrainingExample> batch, double p_mix, std::uint64_t seed,
                                       std::vector<std::string>* unmixed) {
    if (!(p_mix >= 0.0 && p_mix <= 1.0)) throw ArgumentError("mix_batch: p_mix must lie in [0, 1]");
    Rng rng(derive_seed(seed, "mix_batch"));
    std::vector<TrainingExample> out;
    std::set<std::pair<std::size_t, std::size_t>> made;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const TrainingExample& e = batch[i];
        // One draw per example keeps the stream aligned whatever is selected.
        const bool selected = rng.uniform() < p_mix;
        const std::uint64_t pick = rng.next_u64();
        if (!selected || !eligible(e)) {
            if (selected && unmixed) unmixed->push_back(e.id);
            out.push_back(e);
            continue;
        }
        std::vector<std::size_t> partners;
        for (std::size_t j = 0; j < batch.size(); ++j) {
            const TrainingExample& p = batch[j];
            if (j == i || !eligible(p) || p.task == e.task) continue;
            if (p.sources.front() == e.sources.front()) continue;
            partners.push_back(j);
        }
        if (partners.empty()) {
            if (unmixed) unmixed->push_back(e.id);
            out.push_back(e);
            continue;
        }
        const std::size_t j = partners[static_cast<std::size_t>(pick % partners.size())];
        const std::size_t a = e.task == TaskModality::audio ? i : j;
        const std::size_t v = e.task == TaskModality::audio ? j : i;
        if (made.insert({a, v}).second) out.push_back(make_mixed(batch[a], batch[v]));
    }
    return out;
}

}  // namespace mrcq
