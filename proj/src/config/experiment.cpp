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

#include "mrcq/config/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "mrcq/errors.hpp"
#include "mrcq/frontend/feature_file.hpp"
#include "mrcq/qformer/resolution.hpp"
#include "mrcq/util/binary_io.hpp"

namespace mrcq {

using nlohmann::json;

std::string_view dataset_kind_name(DatasetKind k) {
    switch (k) {
        case DatasetKind::two_scale: return "two_scale";
        case DatasetKind::xor_task: return "xor";
        case DatasetKind::manifest: return "manifest";
    }
    return "?";
}

const json& default_config() {
    static const json table = json::parse(R"({
  "model": {
    "seed": 0,
    "qformer": {
      "hidden": 16, "heads": 2, "ffn_hidden": 32, "blocks": 2,
      "levels": [{"window_frames": 1, "queries": 1}, {"window_frames": 10, "queries": 10}]
    },
    "lm": {"vocab": 256, "embed": 64, "heads": 2, "ffn_hidden": 128, "blocks": 2, "lora_rank": 4, "context": 64}
  },
  "training": {
    "lambda": 0.05, "p_mix": 0.2, "lr": 0.001, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8, "clip_norm": 1.0,
    "steps": 200, "batch_size": 8, "seed": 0, "checkpoint_every": 0
  },
  "dataset": {
    "kind": "two_scale", "train_size": 6000, "test_size": 400, "seed": 1, "test_seed": 2,
    "two_scale": {"frames": 10, "speech_channels": 4, "visual_channels": 4, "amplitude": 3.0},
    "xor": {"frames": 4, "audio_channels": 4, "visual_channels": 4, "amplitude": 2.0},
    "manifest": "",
    "layout": {"speech_channels": 0, "audio_channels": 0, "visual_channels": 0, "frame_rate": 2.0,
               "min_features_per_frame": 0}
  },
  "eval": {"max_len": 8},
  "sweep": {
    "window_grid": [1, 2, 5, 10], "lambda_grid": [0.0, 0.05, 0.5], "queries_per_frame": 1,
    "lambda_levels": [{"window_frames": 1, "queries": 1}, {"window_frames": 10, "queries": 10}]
  },
  "output": {"dir": "runs/default"}
})");
    return table;
}

namespace {

std::string join_path(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

const char* type_word(const json& j) {
    if (j.is_object()) return "an object";
    if (j.is_array()) return "a list";
    if (j.is_string()) return "a string";
    if (j.is_boolean()) return "a boolean";
    if (j.is_number()) return "a number";
    return "null";
}

// Objects merge key by key; anything else replaces the default wholesale.
void merge_into(json& target, const json& user, const std::string& path) {
    if (!user.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = join_path(path, it.key());
        if (!target.contains(it.key())) throw ConfigError(key, "unknown key");
        json& slot = target[it.key()];
        if (slot.is_object()) {
            merge_into(slot, it.value(), key);
        } else {
            if (it.value().is_object()) throw ConfigError(key, "expected " + std::string(type_word(slot)));
            slot = it.value();
        }
    }
}

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

    Reader at(const std::string& key) const { return Reader(field(key), join_path(path_, key)); }
    const json& raw() const { return j_; }
    const std::string& path() const { return path_; }

    std::int64_t integer(const std::string& key, std::int64_t lo,
                         std::int64_t hi = std::numeric_limits<std::int64_t>::max()) const {
        const json& v = field(key);
        if (!v.is_number_integer()) throw ConfigError(join_path(path_, key), "expected an integer");
        const auto x = v.get<std::int64_t>();
        if (x < lo || x > hi) throw ConfigError(join_path(path_, key), range_text(lo, hi));
        return x;
    }
    std::uint64_t seed(const std::string& key) const {
        const json& v = field(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
            throw ConfigError(join_path(path_, key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }
    double number(const std::string& key) const {
        const json& v = field(key);
        if (!v.is_number()) throw ConfigError(join_path(path_, key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(join_path(path_, key), "must be finite");
        return x;
    }
    std::string text(const std::string& key) const {
        const json& v = field(key);
        if (!v.is_string()) throw ConfigError(join_path(path_, key), "expected a string");
        return v.get<std::string>();
    }
    std::vector<Reader> list(const std::string& key) const {
        const json& v = field(key);
        if (!v.is_array()) throw ConfigError(join_path(path_, key), "expected a list");
        std::vector<Reader> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            out.emplace_back(v[i], join_path(path_, key) + "[" + std::to_string(i) + "]");
        }
        return out;
    }

private:
    const json& field(const std::string& key) const {
        if (!j_.is_object() || !j_.contains(key)) throw ConfigError(join_path(path_, key), "missing");
        return j_.at(key);
    }
    static std::string range_text(std::int64_t lo, std::int64_t hi) {
        if (hi == std::numeric_limits<std::int64_t>::max()) return "must be >= " + std::to_string(lo);
        return "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    }

    const json& j_;
    std::string path_;
};

std::vector<ResolutionSpec> read_levels(const Reader& parent, const std::string& key) {
    std::vector<ResolutionSpec> levels;
    for (const Reader& item : parent.list(key)) {
        if (!item.raw().is_object()) throw ConfigError(item.path(), "expected an object");
        for (auto it = item.raw().begin(); it != item.raw().end(); ++it) {
            if (it.key() != "window_frames" && it.key() != "queries") {
                throw ConfigError(join_path(item.path(), it.key()), "unknown key");
            }
        }
        levels.push_back({item.integer("window_frames", 1), item.integer("queries", 1)});
    }
    try {
        validate_levels(levels);
    } catch (const ConfigError& e) {
        // validate_levels names "levels[i]"; anchor it under this section.
        const std::string inner = e.key_path();
        const std::string where = join_path(parent.path(), key) + inner.substr(std::string("levels").size());
        const std::string what = e.what();
        throw ConfigError(where, what.substr(what.find(": ") + 2));
    }
    return levels;
}

void check_heads(const Reader& r, Index width, const std::string& width_key) {
    const Index heads = r.integer("heads", 1);
    if (width % heads != 0) {
        throw ConfigError(join_path(r.path(), "heads"), "must divide " + width_key + " (" + std::to_string(width) + ")");
    }
}

json levels_json(const std::vector<ResolutionSpec>& levels) {
    json out = json::array();
    for (const auto& l : levels) out.push_back({{"window_frames", l.window_frames}, {"queries", l.queries}});
    return out;
}

}  // namespace

ExperimentConfig parse_config(const json& user) {
    json merged = default_config();
    merge_into(merged, user, "");
    const Reader root(merged, "");
    ExperimentConfig c;

    // dataset first: it fixes the feature layout.
    const Reader d = root.at("dataset");
    const std::string kind = d.text("kind");
    if (kind == "two_scale") {
        c.dataset.kind = DatasetKind::two_scale;
    } else if (kind == "xor") {
        c.dataset.kind = DatasetKind::xor_task;
    } else if (kind == "manifest") {
        c.dataset.kind = DatasetKind::manifest;
    } else {
        throw ConfigError("dataset.kind", "expected one of two_scale, xor, manifest");
    }
    c.dataset.train_size = static_cast<std::size_t>(d.integer("train_size", 1));
    c.dataset.test_size = static_cast<std::size_t>(d.integer("test_size", 0));
    c.dataset.seed = d.seed("seed");
    c.dataset.test_seed = d.seed("test_seed");
    const Reader ts = d.at("two_scale");
    c.dataset.two_scale.frames = ts.integer("frames", 2);
    c.dataset.two_scale.speech_channels = ts.integer("speech_channels", 4);
    c.dataset.two_scale.visual_channels = ts.integer("visual_channels", 2);
    c.dataset.two_scale.amplitude = ts.number("amplitude");
    const Reader xs = d.at("xor");
    c.dataset.xor_spec.frames = xs.integer("frames", 1);
    c.dataset.xor_spec.audio_channels = xs.integer("audio_channels", 1);
    c.dataset.xor_spec.visual_channels = xs.integer("visual_channels", 1);
    c.dataset.xor_spec.amplitude = xs.number("amplitude");
    c.dataset.manifest = d.text("manifest");
    const Reader lay = d.at("layout");
    c.dataset.layout.speech_channels = lay.integer("speech_channels", 0);
    c.dataset.layout.audio_channels = lay.integer("audio_channels", 0);
    c.dataset.layout.visual_channels = lay.integer("visual_channels", 0);
    c.dataset.layout.frame_rate = lay.number("frame_rate");
    if (!(c.dataset.layout.frame_rate > 0.0)) throw ConfigError("dataset.layout.frame_rate", "must be > 0");
    c.dataset.layout.min_features_per_frame = lay.integer("min_features_per_frame", 0);
    switch (c.dataset.kind) {
        case DatasetKind::two_scale: c.model.layout = two_scale_layout(c.dataset.two_scale); break;
        case DatasetKind::xor_task: c.model.layout = xor_layout(c.dataset.xor_spec); break;
        case DatasetKind::manifest:
            if (c.dataset.manifest.empty()) throw ConfigError("dataset.manifest", "required when kind is manifest");
            if (c.dataset.layout.total_channels() < 1) throw ConfigError("dataset.layout", "no feature channels");
            c.model.layout = c.dataset.layout;
            break;
    }

    const Reader m = root.at("model");
    c.model.seed = m.seed("seed");
    const Reader q = m.at("qformer");
    c.model.qformer.hidden = q.integer("hidden", 2);
    check_heads(q, c.model.qformer.hidden, "hidden");
    c.model.qformer.heads = q.integer("heads", 1);
    c.model.qformer.ffn_hidden = q.integer("ffn_hidden", 1);
    c.model.qformer.blocks = q.integer("blocks", 1);
    c.model.qformer.levels = read_levels(q, "levels");
    const Reader l = m.at("lm");
    c.model.lm.vocab = l.integer("vocab", 1, kVocabSize);
    c.model.lm.embed = l.integer("embed", 2);
    check_heads(l, c.model.lm.embed, "embed");
    c.model.lm.heads = l.integer("heads", 1);
    c.model.lm.ffn_hidden = l.integer("ffn_hidden", 1);
    c.model.lm.blocks = l.integer("blocks", 1);
    c.model.lm.lora_rank = l.integer("lora_rank", 0);
    c.model.lm.context = l.integer("context", 2);
    c.model.qformer.input_channels = c.model.layout.total_channels();
    c.model.qformer.output_dim = c.model.lm.embed;
    c.model.validate();

    const Reader t = root.at("training");
    c.training.lambda = t.number("lambda");
    c.training.p_mix = t.number("p_mix");
    c.training.adam.lr = t.number("lr");
    c.training.adam.beta1 = t.number("beta1");
    c.training.adam.beta2 = t.number("beta2");
    c.training.adam.eps = t.number("eps");
    c.training.adam.clip_norm = t.number("clip_norm");
    if (!(c.training.adam.beta1 >= 0.0 && c.training.adam.beta1 < 1.0)) {
        throw ConfigError("training.beta1", "must lie in [0, 1)");
    }
    if (!(c.training.adam.beta2 >= 0.0 && c.training.adam.beta2 < 1.0)) {
        throw ConfigError("training.beta2", "must lie in [0, 1)");
    }
    if (!(c.training.adam.eps > 0.0)) throw ConfigError("training.eps", "must be > 0");
    if (!(c.training.adam.clip_norm >= 0.0)) throw ConfigError("training.clip_norm", "must be >= 0 (0 disables)");
    c.training.steps = t.integer("steps", 0);
    c.training.batch_size = t.integer("batch_size", 1);
    c.training.seed = t.seed("seed");
    c.training.checkpoint_every = t.integer("checkpoint_every", 0);
    c.training.validate();

    c.max_len = root.at("eval").integer("max_len", 1);

    const Reader s = root.at("sweep");
    for (const Reader& k : s.list("window_grid")) {
        if (!k.raw().is_number_integer() || k.raw().get<std::int64_t>() < 1) {
            throw ConfigError(k.path(), "expected an integer >= 1");
        }
        c.sweep.window_grid.push_back(k.raw().get<Index>());
    }
    for (const Reader& v : s.list("lambda_grid")) {
        if (!v.raw().is_number() || !(v.raw().get<double>() >= 0.0)) throw ConfigError(v.path(), "expected a number >= 0");
        c.sweep.lambda_grid.push_back(v.raw().get<double>());
    }
    c.sweep.queries_per_frame = s.integer("queries_per_frame", 1);
    c.sweep.lambda_levels = read_levels(s, "lambda_levels");

    c.output_dir = root.at("output").text("dir");
    if (c.output_dir.empty()) throw ConfigError("output.dir", "must not be empty");
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    const std::string text = read_binary_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError("config " + path + ": " + e.what(), e.byte > 0 ? e.byte - 1 : 0);
    }
    return parse_config(j);
}

json provenance_json(const ExperimentConfig& c) {
    json j = to_json(c);
    j.erase("output");
    return j;
}

json to_json(const ExperimentConfig& c) {
    const auto& lay = c.dataset.layout;
    json j;
    j["model"] = {{"seed", c.model.seed},
                  {"qformer",
                   {{"hidden", c.model.qformer.hidden},
                    {"heads", c.model.qformer.heads},
                    {"ffn_hidden", c.model.qformer.ffn_hidden},
                    {"blocks", c.model.qformer.blocks},
                    {"levels", levels_json(c.model.qformer.levels)}}},
                  {"lm",
                   {{"vocab", c.model.lm.vocab},
                    {"embed", c.model.lm.embed},
                    {"heads", c.model.lm.heads},
                    {"ffn_hidden", c.model.lm.ffn_hidden},
                    {"blocks", c.model.lm.blocks},
                    {"lora_rank", c.model.lm.lora_rank},
                    {"context", c.model.lm.context}}}};
    j["training"] = {{"lambda", c.training.lambda},
                     {"p_mix", c.training.p_mix},
                     {"lr", c.training.adam.lr},
                     {"beta1", c.training.adam.beta1},
                     {"beta2", c.training.adam.beta2},
                     {"eps", c.training.adam.eps},
                     {"clip_norm", c.training.adam.clip_norm},
                     {"steps", c.training.steps},
                     {"batch_size", c.training.batch_size},
                     {"seed", c.training.seed},
                     {"checkpoint_every", c.training.checkpoint_every}};
    j["dataset"] = {{"kind", dataset_kind_name(c.dataset.kind)},
                    {"train_size", c.dataset.train_size},
                    {"test_size", c.dataset.test_size},
                    {"seed", c.dataset.seed},
                    {"test_seed", c.dataset.test_seed},
                    {"two_scale",
                     {{"frames", c.dataset.two_scale.frames},
                      {"speech_channels", c.dataset.two_scale.speech_channels},
                      {"visual_channels", c.dataset.two_scale.visual_channels},
                      {"amplitude", c.dataset.two_scale.amplitude}}},
                    {"xor",
                     {{"frames", c.dataset.xor_spec.frames},
                      {"audio_channels", c.dataset.xor_spec.audio_channels},
                      {"visual_channels", c.dataset.xor_spec.visual_channels},
                      {"amplitude", c.dataset.xor_spec.amplitude}}},
                    {"manifest", c.dataset.manifest},
                    {"layout",
                     {{"speech_channels", lay.speech_channels},
                      {"audio_channels", lay.audio_channels},
                      {"visual_channels", lay.visual_channels},
                      {"frame_rate", lay.frame_rate},
                      {"min_features_per_frame", lay.min_features_per_frame}}}};
    j["eval"] = {{"max_len", c.max_len}};
    j["sweep"] = {{"window_grid", c.sweep.window_grid},
                  {"lambda_grid", c.sweep.lambda_grid},
                  {"queries_per_frame", c.sweep.queries_per_frame},
                  {"lambda_levels", levels_json(c.sweep.lambda_levels)}};
    j["output"] = {{"dir", c.output_dir}};
    return j;
}

SweepSettings sweep_settings(const ExperimentConfig& c) {
    if (c.dataset.kind != DatasetKind::two_scale) {
        throw ConfigError("dataset.kind", "sweeps run on the two_scale task");
    }
    SweepSettings s;
    s.task = c.dataset.two_scale;
    s.qformer = c.model.qformer;
    s.lm = c.model.lm;
    s.train = c.training;
    s.model_seed = c.model.seed;
    s.train_clips = c.dataset.train_size;
    s.test_clips = c.dataset.test_size;
    s.train_seed = c.dataset.seed;
    s.test_seed = c.dataset.test_seed;
    s.queries_per_frame = c.sweep.queries_per_frame;
    s.lambda_levels = c.sweep.lambda_levels;
    s.max_len = c.max_len;
    return s;
}

namespace {

EvalExample manifest_example(const json& e, const std::string& where, const std::filesystem::path& dir) {
    static const char* const kKeys[] = {"id",      "speech",    "audio",  "visual",  "prompt",    "target",
                                        "task",    "eval_task", "metric", "yes_no",  "references"};
    if (!e.is_object()) throw ConfigError(where, "expected an object");
    for (auto it = e.begin(); it != e.end(); ++it) {
        if (std::find(std::begin(kKeys), std::end(kKeys), it.key()) == std::end(kKeys)) {
            throw ConfigError(where + "." + it.key(), "unknown key");
        }
    }
    const Reader r(e, where);
    EvalExample out;
    out.example.id = r.text("id");
    out.example.sources = {out.example.id};
    out.example.prompt = e.contains("prompt") ? r.text("prompt") : std::string();
    out.example.target = r.text("target");
    out.example.task = e.contains("task") ? parse_task_modality(r.text("task")) : TaskModality::audio_visual;
    out.task = e.contains("eval_task") ? r.text("eval_task") : std::string("qa");
    out.metric = e.contains("metric") ? parse_metric(r.text("metric")) : Metric::accuracy_mc;
    if (e.contains("yes_no")) {
        if (!e["yes_no"].is_boolean()) throw ConfigError(where + ".yes_no", "expected a boolean");
        out.yes_no = e["yes_no"].get<bool>();
    }
    if (e.contains("references")) {
        for (const Reader& ref : r.list("references")) {
            if (!ref.raw().is_string()) throw ConfigError(ref.path(), "expected a string");
            out.references.push_back(ref.raw().get<std::string>());
        }
    }
    const auto stream = [&](const char* key, Modality m) -> std::optional<FeatureStream> {
        if (!e.contains(key)) return std::nullopt;
        const std::filesystem::path p = dir / r.text(key);
        FeatureStream s = load_features(p.string());
        if (s.modality != m) {
            throw ConfigError(where + "." + key, "file holds a " + std::string(modality_name(s.modality)) + " stream");
        }
        return s;
    };
    out.example.speech = stream("speech", Modality::speech);
    out.example.audio = stream("audio", Modality::audio);
    out.example.visual = stream("visual", Modality::visual);
    try {
        out.example.validate();
    } catch (const ArgumentError& err) {
        throw ConfigError(where, err.what());
    }
    return out;
}

}  // namespace

std::vector<EvalExample> load_manifest(const std::string& path, std::string_view split) {
    json j;
    try {
        j = json::parse(read_binary_file(path));
    } catch (const json::parse_error& e) {
        throw FormatError("manifest " + path + ": " + e.what(), e.byte > 0 ? e.byte - 1 : 0);
    }
    if (!j.is_object()) throw ConfigError("manifest", "expected an object with train/test lists");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "train" && it.key() != "test") throw ConfigError("manifest." + it.key(), "unknown key");
    }
    std::vector<EvalExample> out;
    const std::string key(split);
    if (!j.contains(key)) return out;
    if (!j[key].is_array()) throw ConfigError("manifest." + key, "expected a list");
    const std::filesystem::path dir = std::filesystem::path(path).parent_path();
    for (std::size_t i = 0; i < j[key].size(); ++i) {
        out.push_back(manifest_example(j[key][i], "manifest." + key + "[" + std::to_string(i) + "]", dir));
    }
    return out;
}

LoadedDataset load_dataset(const DatasetConfig& c, const std::string& base_dir) {
    LoadedDataset d;
    switch (c.kind) {
        case DatasetKind::two_scale:
            d.train = make_two_scale_dataset(c.two_scale, c.train_size, c.seed, "tr");
            d.test = make_two_scale_dataset(c.two_scale, c.test_size, c.test_seed, "te");
            break;
        case DatasetKind::xor_task:
            d.train = make_xor_training_set(c.xor_spec, c.train_size, c.seed);
            d.test = make_xor_test_set(c.xor_spec, c.test_size, c.test_seed);
            break;
        case DatasetKind::manifest: {
            std::filesystem::path p(c.manifest);
            if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
            d.train = load_manifest(p.string(), "train");
            d.test = load_manifest(p.string(), "test");
            break;
        }
    }
    return d;
}

}  // namespace mrcq
