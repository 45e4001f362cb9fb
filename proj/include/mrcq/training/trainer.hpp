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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrcq/training/example.hpp"
#include "mrcq/training/model.hpp"
#include "mrcq/training/optimizer.hpp"

namespace mrcq {

struct TrainConfig {
    double lambda = 0.05;  // diversity weight
    double p_mix = 0.2;
    AdamConfig adam;
    std::int64_t steps = 200;
    Index batch_size = 4;
    std::uint64_t seed = 0;
    std::int64_t checkpoint_every = 0;  // 0: only the final checkpoint

    void validate() const;
};

// One line of the metrics log.
struct StepRecord {
    std::int64_t step = 0;
    double ce = 0.0;
    double diversity = 0.0;
    double loss = 0.0;
    double grad_norm = 0.0;
    double lr = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::optional<double>> mean_cosine;  // per level, batch mean
    std::vector<std::string> batch;                  // example ids after mixing
};

std::string to_json_line(const StepRecord& record);

struct TrainHooks {
    std::function<void(const StepRecord&)> on_step;
    std::function<void(std::int64_t step)> on_checkpoint;
    std::function<void(const std::string& id)> on_unmixed;
};

// Per-example loss of one forward pass; exposed so the full objective can be
// gradient-checked.
struct ExampleLoss {
    Var ce, diversity, total;
    std::vector<std::optional<double>> mean_cosine;
};
ExampleLoss example_loss(const BoundModel& model, const TrainingExample& example, const SyncLayout& layout,
                         double lambda);

// Adam on the trainable parameters; batches are drawn from per-epoch
// shuffles of the dataset, then mixed. Throws NonFiniteLossError naming the
// step and batch when the loss stops being finite.
std::vector<StepRecord> train(Model& model, const TrainConfig& config, std::span<const TrainingExample> dataset,
                              const TrainHooks& hooks = {});

}  // namespace mrcq
