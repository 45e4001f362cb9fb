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
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mrcq/eval/harness.hpp"
#include "mrcq/eval/synthetic.hpp"
#include "mrcq/training/model.hpp"
#include "mrcq/training/trainer.hpp"

namespace mrcq {

enum class DatasetKind { two_scale, xor_task, manifest };
std::string_view dataset_kind_name(DatasetKind k);

struct DatasetConfig {
    DatasetKind kind = DatasetKind::two_scale;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::uint64_t seed = 0;
    std::uint64_t test_seed = 0;
    TwoScaleSpec two_scale;
    XorSpec xor_spec;
    std::string manifest;  // kind == manifest; relative to the config file
    SyncLayout layout;     // kind == manifest; generators derive their own
};

struct SweepConfig {
    std::vector<Index> window_grid;
    std::vector<double> lambda_grid;
    Index queries_per_frame = 1;
    std::vector<ResolutionSpec> lambda_levels;
};

// Everything one command needs. Built only by parse_config, so every field
// has passed validation.
struct ExperimentConfig {
    ModelConfig model;  // layout, input_channels and output_dim are derived
    TrainConfig training;
    DatasetConfig dataset;
    SweepConfig sweep;
    Index max_len = 0;
    std::string output_dir;
};

// The single table of defaults, as a config document.
const nlohmann::json& default_config();

// Merges `user` over the defaults and validates. Unknown keys, wrong types
// and out-of-range values raise ConfigError naming the key path.
ExperimentConfig parse_config(const nlohmann::json& user);
ExperimentConfig load_config(const std::string& path);

// Canonical resolved form: every key, defaults applied. parse_config of the
// result yields the same config.
nlohmann::json to_json(const ExperimentConfig& config);

// The part of the config that determines model and training results
// (everything except the output location); embedded in checkpoints.
nlohmann::json provenance_json(const ExperimentConfig& config);

SweepSettings sweep_settings(const ExperimentConfig& config);

struct LoadedDataset {
    std::vector<EvalExample> train;
    std::vector<EvalExample> test;
};

// Generators build both splits; manifests name feature files per example.
// Relative manifest paths resolve against `base_dir`.
LoadedDataset load_dataset(const DatasetConfig& config, const std::string& base_dir = ".");
std::vector<EvalExample> load_manifest(const std::string& path, std::string_view split);

}  // namespace mrcq
