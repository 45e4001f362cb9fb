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
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrcq/config/experiment.hpp"

namespace mrcq::cli {

// Relative output directories are placed under this root when it is set.
inline constexpr const char* kOutputRootEnv = "MRCQ_OUTPUT_ROOT";

enum ExitCode : int { kSuccess = 0, kUserError = 1, kInternalError = 2 };

struct Options {
    std::optional<std::string> config;
    std::optional<std::string> checkpoint;
    std::optional<std::string> dataset;  // manifest file
    std::optional<std::string> grid;     // comma-separated
    std::optional<std::string> out;
    std::optional<Index> mask_level;
    std::optional<std::uint64_t> seed;
};

// File names written into the output directory.
inline constexpr std::string_view kResolvedConfigFile = "resolved_config.json";
inline constexpr std::string_view kTrainLogFile = "train_log.jsonl";
inline constexpr std::string_view kCheckpointFile = "checkpoint.mrcq";
inline constexpr std::string_view kFailureFile = "failure.json";

// Config file (or defaults) with --seed / --out / grid overrides applied, as
// the JSON document that is dumped next to every artifact.
nlohmann::json resolve_config_json(const Options& options);
std::string output_dir(const ExperimentConfig& config);

std::vector<Index> parse_window_grid(std::string_view text);
std::vector<double> parse_lambda_grid(std::string_view text);

void cmd_train(const Options& options, std::ostream& out);
void cmd_eval(const Options& options, std::ostream& out);
void cmd_sweep(std::string_view kind, const Options& options, std::ostream& out);
void cmd_inspect(const std::string& path, std::ostream& out);

// Runs `body`, mapping library errors to kUserError and anything else to
// kInternalError; the message goes to `err`.
int run_guarded(const std::function<void()>& body, std::ostream& err);

}  // namespace mrcq::cli
