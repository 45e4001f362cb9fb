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

#include "mrcq/training/trainer.hpp"

#include <cmath>
#include <numeric>

#include <json.hpp>

#include "mrcq/errors.hpp"
#include "mrcq/training/losses.hpp"
#include "mrcq/util/rng.hpp"

namespace mrcq {

void TrainConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("training.lambda", "must be finite and >= 0");
    if (!(p_mix >= 0.0 && p_mix <= 1.0)) throw ConfigError("training.p_mix", "must lie in [0, 1]");
    if (!(adam.lr > 0.0)) throw ConfigError("training.lr", "must be > 0");
    if (steps < 0) throw ConfigError("training.steps", "must be >= 0");
    if (batch_size < 1) throw ConfigError("training.batch_size", "must be >= 1");
    if (checkpoint_every < 0) throw ConfigError("training.checkpoint_every", "must be >= 0");
}

std::string to_json_line(const StepRecord& r) {
    nlohmann::json cos = nlohmann::json::array();
    for (const auto& c : r.mean_cosine) cos.push_back(c ? nlohmann::json(*c) : nlohmann::json(nullptr));
    nlohmann::json j = {{"step", r.step},           {"ce", r.ce},   {"diversity", r.diversity},
                        {"loss", r.loss},           {"lr", r.lr},   {"grad_norm", r.grad_norm},
                        {"mean_cosine_per_level", cos}, {"seed", r.seed}, {"batch", r.batch}};
    return j.dump();
}

ExampleLoss example_loss(const BoundModel& model, const TrainingExample& example, const SyncLayout& layout,
                         double lambda) {
    const ExampleForward f = forward_example(model, example, layout);
    ExampleLoss l;
    l.ce = f.lm.loss;
    l.diversity = diversity_loss(f.levels);
    l.total = total_loss(l.ce, l.diversity, lambda);
    l.mean_cosine = mean_pairwise_cosine(f.levels);
    return l;
}

namespace {

class BatchSampler {
public:
    BatchSampler(std::size_t n, std::uint64_t seed) : order_(n), rng_(derive_seed(seed, "batches")) { reshuffle(); }

    std::vector<std::size_t> next(Index count) {
        std::vector<std::size_t> out;
        for (Index i = 0; i < count; ++i) {
            if (pos_ == order_.size()) reshuffle();
            out.push_back(order_[pos_++]);
        }
        return out;
    }

private:
    void reshuffle() {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        for (std::size_t i = order_.size(); i > 1; --i) {
            std::swap(order_[i - 1], order_[static_cast<std::size_t>(rng_.below(i))]);
        }
        pos_ = 0;
    }

    std::vector<std::size_t> order_;
    Rng rng_;
    std::size_t pos_ = 0;
};

std::string batch_label(std::int64_t step, const std::vector<TrainingExample>& batch) {
    std::string s = "step " + std::to_string(step) + " [";
    for (std::size_t i = 0; i < batch.size(); ++i) s += (i ? "," : "") + batch[i].id;
    return s + "]";
}

}  // namespace

std::vector<StepRecord> train(Model& model, const TrainConfig& config, std::span<const TrainingExample> dataset,
                              const TrainHooks& hooks) {
    config.validate();
    if (dataset.empty()) throw EmptyInputError("train: empty dataset");
    for (const auto& e : dataset) e.validate();

    ParamStore& store = model.store();
    Adam adam(store.trainable(), config.adam);
    BatchSampler sampler(dataset.size(), config.seed);
    const SyncLayout& layout = model.config().layout;
    std::vector<StepRecord> log;

    for (std::int64_t step = 1; step <= config.steps; ++step) {
        std::vector<TrainingExample> drawn;
        for (std::size_t i : sampler.next(config.batch_size)) drawn.push_back(dataset[i]);
        std::vector<std::string> unmixed;
        const auto mix_seed = derive_seed(config.seed, "mix/" + std::to_string(step));
        const std::vector<TrainingExample> batch = mix_batch(drawn, config.p_mix, mix_seed, &unmixed);
        if (hooks.on_unmixed) {
            for (const auto& id : unmixed) hooks.on_unmixed(id);
        }

        StepRecord rec;
        rec.step = step;
        rec.seed = config.seed;
        rec.lr = config.adam.lr;
        const double inv = 1.0 / static_cast<double>(batch.size());
        std::vector<double> cos_sum(model.config().qformer.levels.size(), 0.0);
        std::vector<int> cos_count(cos_sum.size(), 0);

        store.zero_grad();
        for (const auto& example : batch) {
            Tape t;
            const BoundModel bound = bind(t, model);
            std::optional<ExampleLoss> computed;
            try {
                computed = example_loss(bound, example, layout, config.lambda);
            } catch (const NumericError& err) {
                // Non-finite inputs surface here; report them like a non-finite loss.
                throw NonFiniteLossError("train: " + std::string(err.what()) + " in example " + example.id +
                                             " at step " + std::to_string(step),
                                         step, batch_label(step, batch));
            }
            const ExampleLoss& l = *computed;
            const double total = l.total.value()(0, 0);
            if (!std::isfinite(total)) {
                throw NonFiniteLossError("train: non-finite loss in example " + example.id + " at step " +
                                             std::to_string(step),
                                         step, batch_label(step, batch));
            }
            t.backward(scale(l.total, inv));
            rec.ce += l.ce.value()(0, 0) * inv;
            rec.diversity += l.diversity.value()(0, 0) * inv;
            rec.loss += total * inv;
            for (std::size_t r = 0; r < l.mean_cosine.size(); ++r) {
                if (l.mean_cosine[r]) {
                    cos_sum[r] += *l.mean_cosine[r];
                    ++cos_count[r];
                }
            }
            rec.batch.push_back(example.id);
        }
        for (std::size_t r = 0; r < cos_sum.size(); ++r) {
            rec.mean_cosine.push_back(cos_count[r] ? std::optional<double>(cos_sum[r] / cos_count[r]) : std::nullopt);
        }
        rec.grad_norm = adam.step();
        if (hooks.on_step) hooks.on_step(rec);
        log.push_back(std::move(rec));
        const bool due = config.checkpoint_every > 0 && step % config.checkpoint_every == 0;
        if (hooks.on_checkpoint && (due || step == config.steps)) hooks.on_checkpoint(step);
    }
    return log;
}

}  // namespace mrcq
