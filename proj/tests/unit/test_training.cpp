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

#include <doctest.h>

#include <cmath>

#include "../support/fixtures.hpp"
#include "mrcq/numerics/grad_check.hpp"
#include "mrcq/training/losses.hpp"
#include "mrcq/training/trainer.hpp"
#include "mrcq/util/rng.hpp"

using namespace mrcq;
using mrcq::testing::toy_example;
using mrcq::testing::toy_model_config;

namespace {

// Builds a level output straight from a matrix of query rows.
ResolutionOutput make_output(Tape& t, Index level, const Matrix& rows, Index per_window) {
    ResolutionOutput o;
    o.level = level;
    o.rows = t.leaf(rows);
    o.queries_per_window = per_window;
    o.windows = rows.rows() / per_window;
    o.window_has_frames.assign(static_cast<std::size_t>(o.windows), true);
    return o;
}

// Independent oracle: explicit double loop over ordered pairs.
double brute_diversity(const std::vector<ResolutionOutput>& outs) {
    double total = 0.0;
    for (const auto& o : outs) {
        if (o.level < 2) continue;
        const Matrix& m = o.rows.value();
        const Index n = o.queries_per_window;
        for (Index w = 0; w < o.windows; ++w) {
            if (!o.window_has_frames[static_cast<std::size_t>(w)]) continue;
            for (Index i = 0; i < n; ++i) {
                for (Index j = 0; j < n; ++j) {
                    if (i == j) continue;
                    const auto a = m.row(w * n + i);
                    const auto b = m.row(w * n + j);
                    total += a.dot(b) / (a.norm() * b.norm());
                }
            }
        }
    }
    return total;
}

Matrix random_rows(Rng& rng, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

double value(const Var& v) { return v.value()(0, 0); }

}  // namespace

TEST_CASE("diversity_loss examples") {
    Tape t;
    SUBCASE("single query per window") {
        std::vector<ResolutionOutput> outs{make_output(t, 1, Matrix::Ones(3, 4), 1),
                                           make_output(t, 2, Matrix::Ones(3, 4), 1)};
        CHECK(value(diversity_loss(outs)) == 0.0);
    }
    SUBCASE("orthogonal pair") {
        Matrix m(2, 3);
        m << 1, 0, 0, 0, 2, 0;
        std::vector<ResolutionOutput> outs{make_output(t, 2, m, 2)};
        CHECK(std::abs(value(diversity_loss(outs))) < 1e-15);
    }
    SUBCASE("identical unit vectors count both orders") {
        Matrix m(2, 3);
        m << 0.6, 0.8, 0, 0.6, 0.8, 0;
        std::vector<ResolutionOutput> outs{make_output(t, 2, m, 2)};
        CHECK(value(diversity_loss(outs)) == doctest::Approx(2.0).epsilon(1e-14));
    }
    SUBCASE("zero row is rejected") {
        Matrix m = Matrix::Ones(2, 3);
        m.row(1).setZero();
        std::vector<ResolutionOutput> outs{make_output(t, 2, m, 2)};
        CHECK_THROWS_AS(diversity_loss(outs), NumericError);
    }
    SUBCASE("padded windows are skipped") {
        Matrix m = Matrix::Ones(4, 3);
        m.bottomRows(2).setZero();
        std::vector<ResolutionOutput> outs{make_output(t, 2, m, 2)};
        outs[0].window_has_frames[1] = false;
        CHECK(value(diversity_loss(outs)) == doctest::Approx(2.0).epsilon(1e-14));
    }
}

TEST_CASE("diversity_loss matches the pairwise oracle and its invariances") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        Tape t;
        std::vector<ResolutionOutput> outs;
        const Index levels = 1 + static_cast<Index>(rng.below(3));
        for (Index r = 1; r <= levels; ++r) {
            const Index n = 1 + static_cast<Index>(rng.below(5));
            const Index w = 1 + static_cast<Index>(rng.below(4));
            outs.push_back(make_output(t, r, random_rows(rng, n * w, 2 + static_cast<Index>(rng.below(6))), n));
        }
        const double d = value(diversity_loss(outs));
        CHECK(std::abs(d - brute_diversity(outs)) <= 1e-10);

        // Level 1 never matters.
        std::vector<ResolutionOutput> changed = outs;
        changed[0].rows = t.leaf(random_rows(rng, outs[0].rows.rows(), outs[0].rows.cols()));
        CHECK(value(diversity_loss(changed)) == d);

        // Positive rescaling of one query row.
        std::vector<ResolutionOutput> scaled = outs;
        Matrix m = outs.back().rows.value();
        m.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(m.rows())))) *= 1.0 + 10.0 * rng.uniform();
        scaled.back().rows = t.leaf(m);
        CHECK(std::abs(value(diversity_loss(scaled)) - d) <= 1e-10);
    }
}

TEST_CASE("mean pairwise cosine normalises the ordered-pair sum") {
    Rng rng(5);
    Tape t;
    const ResolutionOutput o = make_output(t, 2, random_rows(rng, 12, 5), 4);
    const std::vector<ResolutionOutput> outs{o};
    CHECK(*mean_pairwise_cosine(o) == doctest::Approx(brute_diversity(outs) / (3.0 * 4.0 * 3.0)).epsilon(1e-12));
    CHECK_FALSE(mean_pairwise_cosine(make_output(t, 2, random_rows(rng, 3, 5), 1)).has_value());
}

TEST_CASE("total_loss") {
    CHECK(total_loss(1.0, 2.0, 0.5) == 2.0);
    CHECK(total_loss(1.3, 2.0, 0.0) == 1.3);
    Tape t;
    const Var ce = t.leaf(Matrix::Constant(1, 1, 0.7));
    const Var div = t.leaf(Matrix::Constant(1, 1, 3.0));
    CHECK(value(total_loss(ce, div, 0.0)) == 0.7);
    for (double lambda : {0.0, 0.25, 1.0, 4.0}) {
        CHECK(value(total_loss(ce, div, lambda)) == doctest::Approx(0.7 + 3.0 * lambda).epsilon(1e-15));
    }
}

TEST_CASE("mix_batch") {
    const auto a = toy_example("a", 1, 2, TaskModality::audio, "which audio bit?", "1");
    const auto v = toy_example("v", 2, 2, TaskModality::visual, "which visual bit?", "0");
    const std::vector<TrainingExample> batch{a, v};

    SUBCASE("p_mix = 0 leaves the batch alone") {
        const auto out = mix_batch(batch, 0.0, 3);
        REQUIRE(out.size() == 2);
        CHECK(out[0].id == "a");
        CHECK(out[1].id == "v");
    }
    SUBCASE("p_mix = 1 collapses to the single cross product") {
        const auto out = mix_batch(batch, 1.0, 3);
        REQUIRE(out.size() == 1);
        const TrainingExample& m = out[0];
        CHECK(m.pairing == Pairing::mixed);
        CHECK(m.sources == std::vector<std::string>{"a", "v"});
        CHECK(m.prompt == join_halves(a.prompt, v.prompt));
        CHECK(m.target == join_halves("1", "0"));
        CHECK(m.audio->values == a.audio->values);
        CHECK(m.visual->values == v.visual->values);
    }
    SUBCASE("no complementary partner") {
        const std::vector<TrainingExample> same{a, toy_example("b", 5, 2, TaskModality::audio, "p", "1")};
        std::vector<std::string> skipped;
        const auto out = mix_batch(same, 1.0, 3, &skipped);
        CHECK(out.size() == 2);
        CHECK(skipped == std::vector<std::string>{"a", "b"});
    }
    SUBCASE("deterministic and never self-paired") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            Rng rng(seed);
            std::vector<TrainingExample> big;
            for (int i = 0; i < 8; ++i) {
                const auto task = rng.bernoulli(0.5) ? TaskModality::audio : TaskModality::visual;
                auto e = toy_example("e" + std::to_string(i), seed * 10 + i, 2, task, "p", "t");
                // Some share a source video, as two questions about one clip would.
                e.sources = {"clip" + std::to_string(rng.below(4))};
                big.push_back(std::move(e));
            }
            const auto first = mix_batch(big, 0.5, seed);
            const auto second = mix_batch(big, 0.5, seed);
            REQUIRE(first.size() == second.size());
            for (std::size_t i = 0; i < first.size(); ++i) {
                CHECK(first[i].id == second[i].id);
                if (first[i].pairing == Pairing::mixed) CHECK(first[i].sources[0] != first[i].sources[1]);
            }
        }
    }
    CHECK_THROWS_AS(mix_batch(batch, 1.5, 0), ArgumentError);
}

TEST_CASE("Adam step") {
    Parameter p{"x", Matrix::Constant(1, 2, 1.0), Matrix(), true};
    Parameter frozen{"f", Matrix::Constant(1, 1, 5.0), Matrix::Constant(1, 1, 9.0), false};
    AdamConfig cfg;
    cfg.lr = 0.1;
    cfg.clip_norm = 1.0;
    Adam adam({&p, &frozen}, cfg);
    p.grad = Matrix(1, 2);
    p.grad << 3.0, -4.0;
    CHECK(adam.step() == doctest::Approx(5.0));
    // First bias-corrected step moves each coordinate by lr * g/|g| (eps aside),
    // independent of the clip factor.
    CHECK(p.value(0, 0) == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(p.value(0, 1) == doctest::Approx(1.1).epsilon(1e-6));
    CHECK(frozen.value(0, 0) == 5.0);
    p.grad(0, 0) = std::nan("");
    CHECK_THROWS_AS(adam.step(), NumericError);
}

TEST_CASE("full objective gradient check on a two-frame example") {
    Model model(toy_model_config(3));
    for (const LoraAdapter* a : model.lm().adapters()) {
        a->b->value = init_normal(a->b->value.rows(), a->b->value.cols(), 0.3, 4, a->b->name);
    }
    const auto ex = toy_example("g", 9, 2, TaskModality::audio_visual, "q", "ab");
    const auto loss = [&](Tape& t) {
        const BoundModel bound = bind(t, model);
        return example_loss(bound, ex, model.config().layout, 0.5).total;
    };
    const ParamGradCheck r = grad_check_params(loss, model.store().trainable(), 1e-4, 40, 1);
    INFO(r.worst);
    CHECK(r.max_rel_error <= 1e-3);
}

TEST_CASE("training") {
    const auto ex = toy_example("only", 2, 3, TaskModality::audio_visual, "q", "ok");
    TrainConfig cfg;
    cfg.steps = 200;
    cfg.batch_size = 1;
    cfg.adam.lr = 1e-2;
    cfg.seed = 7;

    SUBCASE("memorises one example without touching the base") {
        Model model(toy_model_config(1));
        const auto frozen = [](const Parameter& p) { return !p.trainable; };
        const auto before = model.store().checksum(frozen);
        std::int64_t checkpoints = 0;
        TrainHooks hooks;
        hooks.on_checkpoint = [&](std::int64_t) { ++checkpoints; };
        const auto log = train(model, cfg, std::span(&ex, 1), hooks);
        REQUIRE(log.size() == 200);
        CHECK(log.back().ce < 0.05);
        CHECK(model.store().checksum(frozen) == before);
        CHECK(checkpoints == 1);
        CHECK(generate(model, ex, 8) == "ok");
    }
    SUBCASE("reruns are identical") {
        cfg.steps = 5;
        const std::vector<TrainingExample> data{ex, toy_example("b", 4, 2, TaskModality::audio, "a?", "1"),
                                                toy_example("c", 5, 2, TaskModality::visual, "v?", "0")};
        cfg.batch_size = 2;
        cfg.p_mix = 0.5;
        Model m1(toy_model_config(1));
        Model m2(toy_model_config(1));
        const auto l1 = train(m1, cfg, data);
        const auto l2 = train(m2, cfg, data);
        for (std::size_t i = 0; i < l1.size(); ++i) CHECK(to_json_line(l1[i]) == to_json_line(l2[i]));
        const auto all = [](const Parameter&) { return true; };
        CHECK(m1.store().checksum(all) == m2.store().checksum(all));
    }
    SUBCASE("non-finite loss aborts with the batch") {
        Model model(toy_model_config(1));
        model.store().at("qformer.level2.queries").value(0, 0) = std::nan("");
        try {
            train(model, cfg, std::span(&ex, 1));
            FAIL("expected NonFiniteLossError");
        } catch (const NonFiniteLossError& e) {
            CHECK(e.step() == 1);
            CHECK(e.batch_id().find("only") != std::string::npos);
        }
    }
    SUBCASE("diversity weight lowers the coarse-level cosine") {
        cfg.steps = 60;
        const std::vector<TrainingExample> data{ex, toy_example("b", 4, 4, TaskModality::audio_visual, "a?", "1")};
        double cos[2];
        for (int i = 0; i < 2; ++i) {
            cfg.lambda = i == 0 ? 0.0 : 0.5;
            Model model(toy_model_config(1));
            const auto log = train(model, cfg, data);
            cos[i] = *log.back().mean_cosine[1];
        }
        CHECK(cos[1] < cos[0]);
    }
    SUBCASE("config validation names the key") {
        cfg.p_mix = 2.0;
        Model model(toy_model_config(1));
        try {
            train(model, cfg, std::span(&ex, 1));
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.key_path() == "training.p_mix");
        }
    }
}
