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

#include "mrcq/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "mrcq/errors.hpp"
#include "mrcq/frontend/feature_file.hpp"
#include "mrcq/qformer/checkpoint.hpp"
#include "mrcq/util/binary_io.hpp"

namespace mrcq::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json read_json_file(const std::string& path, const std::string& what) {
    const std::string text = read_binary_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(what + " " + path + ": " + e.what(), e.byte > 0 ? e.byte - 1 : 0);
    }
}

// Sets j[a][b] = value, refusing to overwrite a non-object section.
void set_key(json& j, const std::string& section, const std::string& key, const json& value) {
    if (!j.is_object()) throw ConfigError("<root>", "expected an object");
    if (!j.contains(section)) j[section] = json::object();
    if (!j[section].is_object()) throw ConfigError(section, "expected an object");
    j[section][key] = value;
}

json user_json(const Options& o) {
    json j = o.config ? read_json_file(*o.config, "config") : json::object();
    if (!j.is_object()) throw ConfigError("<root>", "expected an object");
    if (o.seed) {
        set_key(j, "model", "seed", *o.seed);
        set_key(j, "training", "seed", *o.seed);
    }
    if (o.out) set_key(j, "output", "dir", *o.out);
    return j;
}

// Canonical dump; manifest paths are made absolute so the dump can be rerun
// from any directory.
json resolve(const Options& o, const json& user) {
    ExperimentConfig c = parse_config(user);
    if (c.dataset.kind == DatasetKind::manifest && fs::path(c.dataset.manifest).is_relative()) {
        const fs::path base = o.config ? fs::path(*o.config).parent_path() : fs::path(".");
        c.dataset.manifest = fs::absolute(base / c.dataset.manifest).lexically_normal().string();
    }
    return to_json(c);
}

fs::path prepare_dir(const std::string& dir) {
    const fs::path p(dir);
    fs::create_directories(p);
    return p;
}

void write_resolved(const fs::path& dir, const json& resolved) {
    write_text_file((dir / kResolvedConfigFile).string(), resolved.dump(2) + "\n");
}

std::string under_root(const std::string& dir) {
    const char* root = std::getenv(kOutputRootEnv);
    if (root == nullptr || *root == '\0' || fs::path(dir).is_absolute()) return dir;
    return (fs::path(root) / dir).string();
}

std::vector<std::string> split_grid(std::string_view text) {
    std::vector<std::string> parts;
    std::string cur;
    for (const char ch : text) {
        if (ch == ',') {
            parts.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    parts.push_back(cur);
    if (parts.size() == 1 && parts[0].empty()) throw ArgumentError("empty grid");
    for (const auto& p : parts) {
        if (p.empty()) throw ArgumentError("grid '" + std::string(text) + "' has an empty entry");
    }
    return parts;
}

}  // namespace

json resolve_config_json(const Options& options) { return resolve(options, user_json(options)); }

std::string output_dir(const ExperimentConfig& config) { return under_root(config.output_dir); }

std::vector<Index> parse_window_grid(std::string_view text) {
    std::vector<Index> out;
    for (const auto& p : split_grid(text)) {
        char* end = nullptr;
        const long long v = std::strtoll(p.c_str(), &end, 10);
        if (*end != '\0' || v < 1) throw ArgumentError("window grid entry '" + p + "' is not an integer >= 1");
        out.push_back(static_cast<Index>(v));
    }
    return out;
}

std::vector<double> parse_lambda_grid(std::string_view text) {
    std::vector<double> out;
    for (const auto& p : split_grid(text)) {
        char* end = nullptr;
        const double v = std::strtod(p.c_str(), &end);
        if (*end != '\0' || !(v >= 0.0) || !std::isfinite(v)) {
            throw ArgumentError("lambda grid entry '" + p + "' is not a finite number >= 0");
        }
        out.push_back(v);
    }
    return out;
}

void cmd_train(const Options& options, std::ostream& out) {
    const json resolved = resolve_config_json(options);
    const ExperimentConfig cfg = parse_config(resolved);
    const fs::path dir = prepare_dir(output_dir(cfg));
    write_resolved(dir, resolved);

    const LoadedDataset data = load_dataset(cfg.dataset);
    const std::vector<TrainingExample> train_set = training_view(data.train);
    Model model(cfg.model);
    const std::string provenance = provenance_json(cfg).dump();

    std::ofstream log(dir / kTrainLogFile, std::ios::binary | std::ios::trunc);
    if (!log) throw ArgumentError("cannot write " + (dir / kTrainLogFile).string());
    std::size_t unmixed = 0;
    TrainHooks hooks;
    hooks.on_step = [&](const StepRecord& r) {
        log << to_json_line(r) << '\n';
        log.flush();
    };
    hooks.on_checkpoint = [&](std::int64_t step) {
        if (step == cfg.training.steps) return;  // the final checkpoint is written below
        save_checkpoint(model.store(), provenance,
                        (dir / ("checkpoint_step" + std::to_string(step) + ".mrcq")).string());
    };
    hooks.on_unmixed = [&](const std::string&) { ++unmixed; };

    std::vector<StepRecord> records;
    try {
        records = train(model, cfg.training, train_set, hooks);
    } catch (const NonFiniteLossError& e) {
        const json failure = {{"step", e.step()}, {"batch", e.batch_id()}, {"message", e.what()}};
        write_text_file((dir / kFailureFile).string(), failure.dump(2) + "\n");
        throw;
    }
    save_checkpoint(model.store(), provenance, (dir / kCheckpointFile).string());

    out << "trained " << records.size() << " steps on " << train_set.size() << " examples\n";
    if (!records.empty()) {
        out << "final ce " << records.back().ce << ", diversity " << records.back().diversity << "\n";
    }
    if (unmixed > 0) out << unmixed << " mixing draws found no complementary partner\n";
    out << "checkpoint: " << (dir / kCheckpointFile).string() << "\n";
    out << "log: " << (dir / kTrainLogFile).string() << "\n";
}

void cmd_eval(const Options& options, std::ostream& out) {
    if (!options.checkpoint) throw ArgumentError("eval: --checkpoint is required");
    const Checkpoint ck = load_checkpoint(*options.checkpoint);
    json model_json;
    try {
        model_json = json::parse(ck.config_json);
    } catch (const json::parse_error& e) {
        throw FormatError("checkpoint config is not JSON: " + std::string(e.what()), 0);
    }
    const ExperimentConfig cfg = parse_config(model_json);
    Model model(cfg.model);
    restore(model.store(), ck);

    std::vector<EvalExample> examples;
    std::string source;
    if (options.dataset) {
        examples = load_manifest(*options.dataset, "test");
        source = fs::absolute(*options.dataset).lexically_normal().string();
    } else {
        examples = load_dataset(cfg.dataset).test;
        source = "config:" + std::string(dataset_kind_name(cfg.dataset.kind)) + ":test";
    }
    if (examples.empty()) throw EmptyInputError("eval: the dataset has no test examples");

    std::string dir;
    if (options.out) {
        dir = under_root(*options.out);
    } else if (options.config) {
        dir = output_dir(parse_config(user_json(options)));
    } else {
        dir = fs::path(*options.checkpoint).parent_path().string();
        if (dir.empty()) dir = ".";
    }
    const fs::path out_dir = prepare_dir(dir);

    const std::vector<MetricReport> reports =
        options.mask_level ? eval_masked(model, examples, *options.mask_level, cfg.max_len)
                           : evaluate(model, examples, EvalOptions{{}, std::nullopt, cfg.max_len});

    const json context = {{"checkpoint_checksum", hex64(ck.checksum)},
                          {"dataset", source},
                          {"mask_level", options.mask_level ? json(*options.mask_level) : json(nullptr)}};
    const std::string suffix = options.mask_level ? "_mask" + std::to_string(*options.mask_level) : "";
    const fs::path report_path = out_dir / ("report" + suffix + ".jsonl");
    write_text_file(report_path.string(), report_jsonl(reports, context.dump()));
    json dump = context;
    dump["config"] = model_json;
    write_text_file((out_dir / ("eval_config" + suffix + ".json")).string(), dump.dump(2) + "\n");

    for (const auto& r : reports) {
        out << r.task << "\t" << metric_name(r.metric) << "\t" << r.value << "\t(n=" << r.count << ")\n";
    }
    out << "report: " << report_path.string() << "\n";
}

void cmd_sweep(std::string_view kind, const Options& options, std::ostream& out) {
    if (kind != "window" && kind != "lambda") {
        throw ArgumentError("sweep: unknown kind '" + std::string(kind) + "' (expected window or lambda)");
    }
    json user = user_json(options);
    if (options.grid) {
        if (kind == "window") {
            set_key(user, "sweep", "window_grid", parse_window_grid(*options.grid));
        } else {
            set_key(user, "sweep", "lambda_grid", parse_lambda_grid(*options.grid));
        }
    }
    const json resolved = resolve(options, user);
    const ExperimentConfig cfg = parse_config(resolved);
    SweepSettings settings = sweep_settings(cfg);
    settings.progress = [&](std::string_view line) { out << line << "\n" << std::flush; };
    const fs::path dir = prepare_dir(output_dir(cfg));
    write_resolved(dir, resolved);

    std::string table;
    if (kind == "window") {
        table = format_window_table(sweep_window(settings, cfg.sweep.window_grid));
    } else {
        table = format_lambda_table(sweep_lambda(settings, cfg.sweep.lambda_grid));
    }
    const fs::path path = dir / ("sweep_" + std::string(kind) + ".tsv");
    write_text_file(path.string(), table);
    out << table << "table: " << path.string() << "\n";
}

void cmd_inspect(const std::string& path, std::ostream& out) {
    const std::string bytes = read_binary_file(path);
    const auto starts_with = [&](std::string_view magic) {
        return bytes.size() >= magic.size() && std::string_view(bytes).substr(0, magic.size()) == magic;
    };
    if (starts_with(kFeatureMagic)) {
        const FeatureStream s = decode_features(bytes);
        std::uint64_t stored = 0;
        for (int i = 7; i >= 0; --i) stored = (stored << 8) | static_cast<unsigned char>(bytes[bytes.size() - 8 + i]);
        out << "feature file " << path << "\n"
            << "modality: " << modality_name(s.modality) << "\n"
            << "frame_rate: " << s.frame_rate << "\n"
            << "frames: " << s.frames << "\n"
            << "features_per_frame: " << s.features_per_frame << "\n"
            << "channels: " << s.channels << "\n"
            << "shape: " << s.values.rows() << " x " << s.values.cols() << "\n"
            << "checksum: " << hex64(stored) << "\n";
        return;
    }
    if (starts_with(kCheckpointMagic)) {
        const Checkpoint ck = decode_checkpoint(bytes);
        Index total = 0, trainable = 0;
        out << "checkpoint " << path << "\n" << "checksum: " << hex64(ck.checksum) << "\n"
            << "tensors: " << ck.tensors.size() << "\n";
        for (const auto& t : ck.tensors) {
            const Index n = t.value.rows() * t.value.cols();
            total += n;
            if (t.trainable) trainable += n;
            out << "  " << t.name << "\t" << t.value.rows() << " x " << t.value.cols() << "\t"
                << (t.trainable ? "trainable" : "frozen") << "\n";
        }
        out << "parameters: " << total << " (trainable " << trainable << ", frozen " << total - trainable << ")\n";
        const ExperimentConfig cfg = parse_config(json::parse(ck.config_json));
        Model model(cfg.model);
        restore(model.store(), ck);
        out << "lm base parameters: " << lm_base_param_count(model.lm()) << "\n"
            << "lm adapter parameters: " << lm_adapter_param_count(model.lm()) << "\n"
            << "lora_param_fraction: " << lora_param_fraction(model.lm()) << "\n"
            << "config: " << ck.config_json << "\n";
        return;
    }
    if (bytes.size() < 8) throw FormatError("file too short to carry a magic number", bytes.size());
    throw FormatError("unrecognized magic (expected MRCQFEAT or MRCQCKPT)", 0);
}

int run_guarded(const std::function<void()>& body, std::ostream& err) {
    try {
        body();
        return kSuccess;
    } catch (const NonFiniteLossError& e) {
        err << "error: " << e.what() << "\nbatch: " << e.batch_id() << "\n";
        return kUserError;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    } catch (...) {
        err << "internal error: unknown exception\n";
        return kInternalError;
    }
}

}  // namespace mrcq::cli
