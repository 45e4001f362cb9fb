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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrcq/frontend/synchronize.hpp"
#include "mrcq/lm/toy_lm.hpp"
#include "mrcq/qformer/mrc_qformer.hpp"
#include "mrcq/training/example.hpp"

namespace mrcq {

struct ModelConfig {
    SyncLayout layout;
    QFormerConfig qformer;  // input_channels must equal layout.total_channels()
    LmConfig lm;            // embed must equal qformer.output_dim
    std::uint64_t seed = 0;

    void validate() const;
};

// Frontend layout, MRC Q-Former and toy LM sharing one parameter store.
// Movable; parameter pointers stay valid because the store owns them on
// the heap.
class Model {
public:
    explicit Model(const ModelConfig& config);
    // Wraps parameters loaded from a checkpoint; names and shapes must match.
    Model(const ModelConfig& config, ParamStore store);

    const ModelConfig& config() const { return config_; }
    ParamStore& store() { return store_; }
    const ParamStore& store() const { return store_; }
    const QFormerWeights& qformer() const { return qformer_; }
    const LmWeights& lm() const { return lm_; }

private:
    ModelConfig config_;
    ParamStore store_;
    QFormerWeights qformer_;
    LmWeights lm_;
};

struct BoundModel {
    BoundQFormer qformer;
    BoundLm lm;
};

BoundModel bind(Tape& tape, const Model& model);

SyncedSequence synchronize_example(const TrainingExample& example, const SyncLayout& layout);

struct ExampleForward {
    std::vector<ResolutionOutput> levels;
    Var h;  // C x E
    LmOutput lm;
};

// frontend -> MRC Q-Former -> LM over one example. `masked_levels` zeroes
// the query rows of every listed level before the projection.
ExampleForward forward_example(const BoundModel& model, const TrainingExample& example, const SyncLayout& layout,
                               std::span<const Index> masked_levels = {});

// Projected query rows for an example, as fed to the LM.
Matrix encode_example(const Model& model, const TrainingExample& example,
                      std::span<const Index> masked_levels = {});

// Greedy answer text for an example's prompt.
std::string generate(const Model& model, const TrainingExample& example, Index max_len,
                     std::span<const Index> masked_levels = {});

}  // namespace mrcq
