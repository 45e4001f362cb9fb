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

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mrcq/eval/metrics.hpp"
#include "mrcq/eval/synthetic.hpp"
#include "mrcq/training/model.hpp"
#include "mrcq/training/trainer.hpp"

namespace mrcq {

struct ExampleScore {
    std::string id;
    std::string reference;
    std::string generated;
    double value = 0.0;
    std::size_t reference_words = 0;  // wer only: weight in the corpus rate
};

// One task's score. Accuracies lie in [0,1]; WER is a corpus rate and may
// exceed 1 for insertion-heavy output.
struct MetricReport {
    std::string task;
    Metric metric = Metric::accuracy_mc;
    double value = 0.0;
    std::size_t count = 0;
    std::vector<ExampleScore> examples;  // id order
};

struct EvalOptions {
    std::vector<Index> masked_levels;
    std::optional<TaskModality> zero_side;
    Index max_len = 16;
};

// Scores one generation; honours the example's answer slot.
ExampleScore score_example(const EvalExample& example, std::string_view generated);

// Greedy inference over every example; one report per task, tasks sorted by name.
std::vector<MetricReport> evaluate(const Model& model, std::span<const EvalExample> examples,
                                   const EvalOptions& options = {});

// Evaluation with one resolution level's query rows zeroed. The model must
// have at least two levels and `level` must be one of them.
std::vector<MetricReport> eval_masked(const Model& model, std::span<const EvalExample> examples,
                                      std::optional<Index> level, Index max_len = 16);

const MetricReport& find_report(std::span<const MetricReport> reports, std::string_view task);

// One JSON record per example, then a summary record carrying the
// normalization version and any extra context fields (a JSON object).
std::string report_jsonl(std::span<const MetricReport> reports, std::string_view context_json = "{}");

// --- two-scale analyses -------------------------------------------------

struct SweepSettings {
    TwoScaleSpec task;
    QFormerConfig qformer;  // levels are set per run
    LmConfig lm;
    TrainConfig train;
    std::uint64_t model_seed = 0;
    std::size_t train_clips = 6000;
    std::size_t test_clips = 400;
    std::uint64_t train_seed = 1;
    std::uint64_t test_seed = 2;
    Index queries_per_frame = 1;  // N/k, held constant by sweep_window
    std::vector<ResolutionSpec> lambda_levels{{1, 1}, {10, 10}};
    Index max_len = 4;
    std::function<void(std::string_view)> progress;
};

// Desk-scale settings the analyses were tuned with.
SweepSettings default_sweep_settings();

ModelConfig sweep_model_config(const SweepSettings& settings, std::vector<ResolutionSpec> levels);

struct TwoScaleScores {
    double fine = 0.0;
    double coarse = 0.0;
    std::vector<std::optional<double>> mean_cosine;  // per level, test-set mean
};

TwoScaleScores score_two_scale(const Model& model, std::span<const EvalExample> test, Index max_len,
                               std::span<const Index> masked_levels = {});

// Trains one model on the settings' training clips and scores it.
TwoScaleScores run_two_scale(const SweepSettings& settings, std::vector<ResolutionSpec> levels, double lambda);

struct WindowRow {
    Index k = 0;
    Index n = 0;
    Index windows = 0;
    Index c = 0;
    double fine = 0.0;
    double coarse = 0.0;
};

std::vector<WindowRow> sweep_window(const SweepSettings& settings, std::span<const Index> grid);

struct LambdaRow {
    double lambda = 0.0;
    double fine = 0.0;
    double coarse = 0.0;
    std::vector<std::optional<double>> mean_cosine;
};

std::vector<LambdaRow> sweep_lambda(const SweepSettings& settings, std::span<const double> grid);

// Tab-separated, header row first. Missing cosines print as "na".
std::string format_window_table(std::span<const WindowRow> rows);
std::string format_lambda_table(std::span<const LambdaRow> rows);

}  // namespace mrcq
