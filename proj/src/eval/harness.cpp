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

#include "mrcq/eval/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "mrcq/errors.hpp"
#include "mrcq/qformer/resolution.hpp"
#include "mrcq/training/losses.hpp"

namespace mrcq {

ExampleScore score_example(const EvalExample& e, std::string_view generated) {
    ExampleScore s;
    s.id = e.example.id;
    s.reference = e.scored_reference();
    s.generated = std::string(generated);
    std::string answer(generated);
    if (e.answer_slot) {
        const auto words = normalized_words(generated);
        answer = *e.answer_slot < words.size() ? words[*e.answer_slot] : std::string();
    }
    switch (e.metric) {
        case Metric::wer:
            s.value = wer(s.reference, answer);
            s.reference_words = normalized_words(s.reference).size();
            break;
        case Metric::accuracy_contain:
            s.value = accuracy_contain(s.reference, answer, e.yes_no);
            break;
        case Metric::accuracy_mc:
            s.value = accuracy_mc(s.reference, answer);
            break;
        case Metric::ocr_score:
            s.value = ocr_score(e.references, answer);
            break;
    }
    return s;
}

std::vector<MetricReport> evaluate(const Model& model, std::span<const EvalExample> examples,
                                   const EvalOptions& options) {
    std::map<std::string, MetricReport> by_task;
    for (const auto& e : examples) {
        auto [it, fresh] = by_task.try_emplace(e.task);
        MetricReport& r = it->second;
        if (fresh) {
            r.task = e.task;
            r.metric = e.metric;
        } else if (r.metric != e.metric) {
            throw ArgumentError("evaluate: task '" + e.task + "' mixes metrics");
        }
        const TrainingExample input = options.zero_side ? zero_side(e.example, *options.zero_side) : e.example;
        r.examples.push_back(score_example(e, generate(model, input, options.max_len, options.masked_levels)));
    }

    std::vector<MetricReport> out;
    for (auto& [task, r] : by_task) {
        std::sort(r.examples.begin(), r.examples.end(),
                  [](const ExampleScore& a, const ExampleScore& b) { return a.id < b.id; });
        r.count = r.examples.size();
        double num = 0.0, den = 0.0;
        for (const auto& s : r.examples) {
            const double w = r.metric == Metric::wer ? static_cast<double>(s.reference_words) : 1.0;
            num += s.value * w;
            den += w;
        }
        r.value = den > 0.0 ? num / den : 0.0;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<MetricReport> eval_masked(const Model& model, std::span<const EvalExample> examples,
                                      std::optional<Index> level, Index max_len) {
    const auto& levels = model.config().qformer.levels;
    if (levels.size() < 2) throw ArgumentError("eval_masked: the model has a single resolution level");
    EvalOptions options;
    options.max_len = max_len;
    if (level) {
        if (*level < 1 || *level > static_cast<Index>(levels.size())) {
            throw ArgumentError("eval_masked: unknown level " + std::to_string(*level));
        }
        options.masked_levels.push_back(*level);
    }
    return evaluate(model, examples, options);
}

const MetricReport& find_report(std::span<const MetricReport> reports, std::string_view task) {
    for (const auto& r : reports) {
        if (r.task == task) return r;
    }
    throw ArgumentError("no report for task '" + std::string(task) + "'");
}

namespace {

// Generations are raw bytes; anything outside printable ASCII is written as \xHH.
std::string printable(std::string_view bytes) {
    std::string out;
    for (const char ch : bytes) {
        const auto c = static_cast<unsigned char>(ch);
        if (c >= 0x20 && c < 0x7f) {
            out += ch;
        } else {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\x%02X", c);
            out += buf;
        }
    }
    return out;
}

}  // namespace

std::string report_jsonl(std::span<const MetricReport> reports, std::string_view context_json) {
    nlohmann::json summary = nlohmann::json::parse(context_json);
    if (!summary.is_object()) throw ArgumentError("report_jsonl: context must be a JSON object");
    std::string out;
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& r : reports) {
        for (const auto& s : r.examples) {
            nlohmann::json j = {{"id", s.id},
                                {"task", r.task},
                                {"metric", metric_name(r.metric)},
                                {"reference", printable(s.reference)},
                                {"generated", printable(s.generated)},
                                {"value", s.value}};
            out += j.dump() + "\n";
        }
        tasks.push_back({{"task", r.task}, {"metric", metric_name(r.metric)}, {"value", r.value}, {"count", r.count}});
    }
    summary["summary"] = tasks;
    summary["normalization"] = kNormalizationVersion;
    out += summary.dump() + "\n";
    return out;
}

SweepSettings default_sweep_settings() {
    SweepSettings s;
    s.qformer.hidden = 16;
    s.qformer.heads = 2;
    s.qformer.ffn_hidden = 32;
    s.qformer.blocks = 2;
    s.qformer.output_dim = 64;
    s.lm.embed = 64;
    s.lm.heads = 2;
    s.lm.ffn_hidden = 128;
    s.lm.blocks = 2;
    s.lm.lora_rank = 4;
    s.lm.context = 64;
    s.train.steps = 3000;
    s.train.batch_size = 8;
    s.train.adam.lr = 1e-3;
    s.train.p_mix = 0.0;
    s.train.lambda = 0.05;
    return s;
}

ModelConfig sweep_model_config(const SweepSettings& settings, std::vector<ResolutionSpec> levels) {
    ModelConfig mc;
    mc.layout = two_scale_layout(settings.task);
    mc.qformer = settings.qformer;
    mc.qformer.input_channels = mc.layout.total_channels();
    mc.qformer.levels = std::move(levels);
    mc.lm = settings.lm;
    mc.seed = settings.model_seed;
    mc.validate();
    return mc;
}

TwoScaleScores score_two_scale(const Model& model, std::span<const EvalExample> test, Index max_len,
                               std::span<const Index> masked_levels) {
    EvalOptions options;
    options.max_len = max_len;
    options.masked_levels.assign(masked_levels.begin(), masked_levels.end());
    const auto reports = evaluate(model, test, options);
    TwoScaleScores s;
    s.fine = find_report(reports, kFineTask).value;
    s.coarse = find_report(reports, kCoarseTask).value;

    const std::size_t levels = model.config().qformer.levels.size();
    std::vector<double> sum(levels, 0.0);
    std::vector<std::size_t> n(levels, 0);
    for (const auto& e : test) {
        Tape tape;
        const BoundModel bound = bind(tape, model);
        const auto outputs = run_levels(bound.qformer, synchronize_example(e.example, model.config().layout));
        const auto cos = mean_pairwise_cosine(outputs);
        for (std::size_t r = 0; r < levels; ++r) {
            if (!cos[r]) continue;
            sum[r] += *cos[r];
            ++n[r];
        }
    }
    for (std::size_t r = 0; r < levels; ++r) {
        s.mean_cosine.push_back(n[r] ? std::optional<double>(sum[r] / static_cast<double>(n[r])) : std::nullopt);
    }
    return s;
}

namespace {

struct TwoScaleData {
    std::vector<TrainingExample> train;
    std::vector<EvalExample> test;
};

TwoScaleData make_data(const SweepSettings& s) {
    TwoScaleData d;
    d.train = training_view(make_two_scale_dataset(s.task, s.train_clips, s.train_seed, "tr"));
    d.test = make_two_scale_dataset(s.task, s.test_clips, s.test_seed, "te");
    return d;
}

TwoScaleScores train_and_score(const SweepSettings& s, const TwoScaleData& data, std::vector<ResolutionSpec> levels,
                               double lambda) {
    Model model(sweep_model_config(s, std::move(levels)));
    TrainConfig tc = s.train;
    tc.lambda = lambda;
    train(model, tc, data.train);
    return score_two_scale(model, data.test, s.max_len);
}

void report_progress(const SweepSettings& s, const std::string& line) {
    if (s.progress) s.progress(line);
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string format_cosine(const std::optional<double>& c) { return c ? format_number(*c) : "na"; }

}  // namespace

TwoScaleScores run_two_scale(const SweepSettings& settings, std::vector<ResolutionSpec> levels, double lambda) {
    return train_and_score(settings, make_data(settings), std::move(levels), lambda);
}

std::vector<WindowRow> sweep_window(const SweepSettings& settings, std::span<const Index> grid) {
    if (grid.empty()) throw ArgumentError("sweep_window: empty grid");
    if (settings.queries_per_frame < 1) throw ArgumentError("sweep_window: queries_per_frame must be >= 1");
    for (const Index k : grid) {
        if (k < 1) throw ArgumentError("sweep_window: window sizes must be >= 1");
    }
    const TwoScaleData data = make_data(settings);
    std::vector<WindowRow> rows;
    for (const Index k : grid) {
        const std::vector<ResolutionSpec> levels{{k, settings.queries_per_frame * k}};
        WindowRow row;
        row.k = k;
        row.n = settings.queries_per_frame * k;
        row.windows = padded_length(settings.task.frames, levels) / k;
        row.c = output_rows(settings.task.frames, levels);
        if (row.windows * row.n != row.c) throw std::logic_error("sweep_window: W*N != C");
        const TwoScaleScores s = train_and_score(settings, data, levels, settings.train.lambda);
        row.fine = s.fine;
        row.coarse = s.coarse;
        report_progress(settings, "window k=" + std::to_string(k) + " fine=" + format_number(row.fine) +
                                      " coarse=" + format_number(row.coarse));
        rows.push_back(row);
    }
    return rows;
}

std::vector<LambdaRow> sweep_lambda(const SweepSettings& settings, std::span<const double> grid) {
    if (grid.empty()) throw ArgumentError("sweep_lambda: empty grid");
    const TwoScaleData data = make_data(settings);
    std::vector<LambdaRow> rows;
    for (const double lambda : grid) {
        const TwoScaleScores s = train_and_score(settings, data, settings.lambda_levels, lambda);
        rows.push_back({lambda, s.fine, s.coarse, s.mean_cosine});
        report_progress(settings, "lambda=" + format_number(lambda) + " fine=" + format_number(s.fine) +
                                      " coarse=" + format_number(s.coarse));
    }
    return rows;
}

std::string format_window_table(std::span<const WindowRow> rows) {
    std::string out = "k\tN\tW\tC\tfine\tcoarse\n";
    for (const auto& r : rows) {
        out += std::to_string(r.k) + "\t" + std::to_string(r.n) + "\t" + std::to_string(r.windows) + "\t" +
               std::to_string(r.c) + "\t" + format_number(r.fine) + "\t" + format_number(r.coarse) + "\n";
    }
    return out;
}

std::string format_lambda_table(std::span<const LambdaRow> rows) {
    std::size_t levels = 0;
    for (const auto& r : rows) levels = std::max(levels, r.mean_cosine.size());
    std::string out = "lambda\tfine\tcoarse";
    for (std::size_t l = 0; l < levels; ++l) out += "\tcos_level" + std::to_string(l + 1);
    out += "\n";
    for (const auto& r : rows) {
        out += format_number(r.lambda) + "\t" + format_number(r.fine) + "\t" + format_number(r.coarse);
        for (std::size_t l = 0; l < levels; ++l) {
            out += "\t" + format_cosine(l < r.mean_cosine.size() ? r.mean_cosine[l] : std::nullopt);
        }
        out += "\n";
    }
    return out;
}

}  // namespace mrcq
