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
#include <cstring>

#include "mrcq/lm/toy_lm.hpp"
#include "mrcq/numerics/grad_check.hpp"
#include "mrcq/training/optimizer.hpp"
#include "mrcq/util/rng.hpp"

using namespace mrcq;

namespace {

LmConfig tiny(Index rank = 2) {
    LmConfig c;
    c.embed = 8;
    c.blocks = 2;
    c.heads = 2;
    c.ffn_hidden = 12;
    c.lora_rank = rank;
    c.context = 32;
    return c;
}

std::vector<int> random_tokens(Rng& rng, std::size_t n) {
    std::vector<int> ids(n);
    for (int& id : ids) id = static_cast<int>(rng.below(kVocabSize));
    return ids;
}

Matrix random_matrix(Rng& rng, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

Matrix run_logits(const LmWeights& w, const Matrix& h, const std::vector<int>& prompt, const std::vector<int>& target) {
    Tape t;
    const BoundLm lm = bind(t, w);
    return forward_lm(lm, t.constant(h), prompt, target).logits.value();
}

}  // namespace

TEST_CASE("tokenizer") {
    CHECK(encode_prompt("ab") == std::vector<int>{kBos, 'a', 'b'});
    CHECK(encode_target("yes") == std::vector<int>{'y', 'e', 's', kEos});
    CHECK(decode_tokens(encode_target("yes")) == "yes");
    CHECK(decode_tokens(std::vector<int>{kBos, 'h', 'i', kEos, 'x'}) == "hi");
    const std::string joined = std::string("a") + static_cast<char>(kSep) + "b";
    CHECK(decode_tokens(encode_text(joined)) == joined);
    CHECK_THROWS_AS(encode_text(std::string("a\0b", 3)), ArgumentError);
    CHECK_THROWS_AS(encode_text("\x03"), ArgumentError);
    CHECK_THROWS_AS(decode_tokens(std::vector<int>{300}), ArgumentError);
    std::string all;
    for (int b = 0; b < 256; ++b) {
        if (b != kPad && b != kBos && b != kEos) all.push_back(static_cast<char>(b));
    }
    CHECK(decode_tokens(encode_text(all)) == all);
}

TEST_CASE("adapter-zero identity against the adapter-free base") {
    ParamStore base_store, lora_store;
    const LmWeights base = register_lm(base_store, tiny(0), 17);
    const LmWeights adapted = register_lm(lora_store, tiny(3), 17);
    CHECK(base_store.checksum([](const Parameter&) { return true; }) ==
          lora_store.checksum([](const Parameter& p) { return !p.trainable; }));
    // A may be anything while B is zero.
    for (const LoraAdapter* a : adapted.adapters()) a->a->value *= 7.0;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        Rng rng(seed);
        const Matrix h = random_matrix(rng, 1 + static_cast<Index>(rng.below(5)), 8);
        const auto prompt = random_tokens(rng, rng.below(6));
        const auto target = random_tokens(rng, 1 + rng.below(6));
        CHECK(bit_equal(run_logits(base, h, prompt, target), run_logits(adapted, h, prompt, target)));
    }
    adapted.blocks[0].v.lora->b->value.setConstant(0.1);
    Rng rng(1);
    const Matrix h = random_matrix(rng, 2, 8);
    CHECK_FALSE(bit_equal(run_logits(base, h, {kBos}, {'a'}), run_logits(adapted, h, {kBos}, {'a'})));
}

TEST_CASE("forward_lm examples and errors") {
    ParamStore store;
    const LmWeights w = register_lm(store, tiny(), 3);
    SUBCASE("uniform logits give ln V") {
        w.tok_embed->value.setZero();
        Tape t;
        const BoundLm lm = bind(t, w);
        const LmOutput out = forward_lm(lm, t.constant(Matrix::Ones(2, 8)), std::vector<int>{kBos},
                                        std::vector<int>{'a'});
        CHECK(out.loss.value()(0, 0) == doctest::Approx(std::log(256.0)).epsilon(1e-12));
    }
    SUBCASE("peaked correct logits drive the loss to zero") {
        w.tok_embed->value.setZero();
        w.tok_embed->value.row('z').setConstant(10.0);
        w.lnf_gain->value.setZero();
        w.lnf_bias->value.setConstant(1.0);
        Tape t;
        const BoundLm lm = bind(t, w);
        const LmOutput out = forward_lm(lm, Var{}, std::vector<int>{kBos}, std::vector<int>{'z', 'z'});
        CHECK(out.loss.value()(0, 0) < 1e-30);
    }
    SUBCASE("errors") {
        Tape t;
        const BoundLm lm = bind(t, w);
        const Var h = t.constant(Matrix::Zero(20, 8));
        CHECK_THROWS_AS(forward_lm(lm, h, std::vector<int>{kBos}, std::vector<int>{}), EmptyInputError);
        CHECK_THROWS_AS(forward_lm(lm, Var{}, std::vector<int>{}, std::vector<int>{'a'}), EmptyInputError);
        CHECK_THROWS_AS(forward_lm(lm, h, std::vector<int>(6, 'a'), std::vector<int>(7, 'b')), LengthError);
        CHECK_NOTHROW(forward_lm(lm, h, std::vector<int>(6, 'a'), std::vector<int>(6, 'b')));
        CHECK_THROWS_AS(forward_lm(lm, t.constant(Matrix::Zero(2, 5)), std::vector<int>{kBos}, std::vector<int>{'a'}),
                        ShapeError);
        CHECK_THROWS_AS(forward_lm(lm, h, std::vector<int>{kBos}, std::vector<int>{-1}), ArgumentError);
    }
}

TEST_CASE("logit rows depend only on earlier positions") {
    ParamStore store;
    const LmWeights w = register_lm(store, tiny(), 4);
    for (const LoraAdapter* a : w.adapters()) a->b->value.setConstant(0.05);
    Rng rng(8);
    const Matrix h = random_matrix(rng, 3, 8);
    const std::vector<int> prompt = {kBos, 'q'};
    const Matrix a = run_logits(w, h, prompt, {'a', 'b', 'c'});
    const Matrix b = run_logits(w, h, prompt, {'a', 'x', 'y'});
    CHECK((a.topRows(2) - b.topRows(2)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((a.row(2) - b.row(2)).cwiseAbs().maxCoeff() > 1e-6);
}

TEST_CASE("greedy decoding") {
    SUBCASE("argmax ties go to the lowest id") {
        Matrix m(1, 5);
        m << 0.0, 2.0, 1.0, 2.0, -1.0;
        CHECK(argmax_token(m, 0) == 1);
    }
    SUBCASE("forced EOS yields an empty output") {
        ParamStore store;
        const LmWeights w = register_lm(store, tiny(), 5);
        w.tok_embed->value.setZero();
        w.tok_embed->value.row(kEos).setConstant(1.0);
        w.lnf_gain->value.setZero();
        w.lnf_bias->value.setConstant(1.0);
        CHECK(greedy_decode(w, Matrix::Ones(2, 8), std::vector<int>{kBos}, 10).empty());
    }
    SUBCASE("all-equal logits emit token 0 up to max_len") {
        ParamStore store;
        const LmWeights w = register_lm(store, tiny(), 5);
        w.tok_embed->value.setZero();
        CHECK(greedy_decode(w, Matrix::Ones(1, 8), std::vector<int>{kBos}, 4) == std::vector<int>(4, 0));
        CHECK_THROWS_AS(greedy_decode(w, Matrix::Ones(1, 8), std::vector<int>{kBos}, 0), ArgumentError);
    }
    SUBCASE("deterministic and consistent with forward_lm") {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            ParamStore store;
            const LmWeights w = register_lm(store, tiny(), seed);
            for (const LoraAdapter* a : w.adapters()) {
                a->b->value = init_normal(a->b->value.rows(), a->b->value.cols(), 0.3, seed, "b");
            }
            Rng rng(seed);
            const Matrix h = random_matrix(rng, 2, 8);
            const std::vector<int> prompt = {kBos, 'k'};
            const auto first = greedy_decode(w, h, prompt, 6);
            CHECK(first == greedy_decode(w, h, prompt, 6));
            std::vector<int> target = first;
            if (target.size() < 6) target.push_back(kEos);
            REQUIRE_FALSE(target.empty());
            const Matrix logits = run_logits(w, h, prompt, target);
            for (Index j = 0; j < logits.rows(); ++j) {
                CHECK(argmax_token(logits, j) == target[static_cast<std::size_t>(j)]);
            }
        }
    }
}

TEST_CASE("adapter census") {
    const auto fraction = [](Index rank) {
        LmConfig c;
        c.lora_rank = rank;
        ParamStore store;
        return lora_param_fraction(register_lm(store, c, 1));
    };
    CHECK(fraction(0) == 0.0);
    CHECK(fraction(8) == 2.0 * fraction(4));

    // Desk config, counted by hand: E=128, L=2, V=256, context 512, FFN 256, rank 4.
    const Index e = 128, ffn = 256, v = 256, ctx = 512, rank = 4;
    const Index per_block_base = 2 * e                       // ln1
                                 + 3 * (e * e + e)           // q, k, v
                                 + (e * e + e)               // output projection
                                 + 2 * e                     // ln2
                                 + (e * ffn + ffn) + (ffn * e + e);
    const Index base = v * e + ctx * e + 2 * e + 2 * per_block_base;
    const Index per_block_lora = 3 * (e * rank + rank * e) + (ffn * rank + rank * e) + (e * rank + rank * ffn);
    const Index adapters = 2 * per_block_lora;
    CHECK(base == 363520);
    CHECK(adapters == 12288);

    ParamStore store;
    LmConfig c;
    const LmWeights w = register_lm(store, c, 1);
    CHECK(lm_base_param_count(w) == base);
    CHECK(lm_adapter_param_count(w) == adapters);
    CHECK(lora_param_fraction(w) == static_cast<double>(adapters) / static_cast<double>(base));
    CHECK(store.count_values([](const Parameter& p) { return p.trainable; }) == adapters);
    CHECK(store.count_values([](const Parameter& p) { return !p.trainable; }) == base);
}

TEST_CASE("only adapters receive gradients; adapter gradients check out") {
    ParamStore store;
    const LmWeights w = register_lm(store, tiny(2), 6);
    for (const LoraAdapter* a : w.adapters()) {
        a->b->value = init_normal(a->b->value.rows(), a->b->value.cols(), 0.2, 2, a->b->name);
    }
    Rng rng(3);
    const Matrix h = random_matrix(rng, 2, 8);
    const auto loss = [&](Tape& t) {
        const BoundLm lm = bind(t, w);
        return forward_lm(lm, t.constant(h), std::vector<int>{kBos, 'p'}, std::vector<int>{'a', 'b', kEos}).loss;
    };
    const ParamGradCheck r = grad_check_params(loss, store.trainable(), 1e-4);
    INFO(r.worst);
    CHECK(r.max_rel_error <= 1e-4);

    store.zero_grad();
    Tape t;
    t.backward(loss(t));
    for (const Parameter* p : store.all()) {
        if (p->trainable) continue;
        CHECK(p->grad.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("adapters alone can memorise a target") {
    LmConfig c = tiny(4);
    c.embed = 16;
    c.ffn_hidden = 32;
    ParamStore store;
    const LmWeights w = register_lm(store, c, 11);
    Rng rng(4);
    const Matrix h = random_matrix(rng, 2, 16);
    const std::vector<int> prompt = encode_prompt("q");
    const std::vector<int> target = encode_target("cab");
    AdamConfig ac;
    ac.lr = 2e-2;
    Adam adam(store.trainable(), ac);
    const auto before = store.checksum([](const Parameter& p) { return !p.trainable; });
    double final_loss = 0.0;
    for (int step = 0; step < 300; ++step) {
        store.zero_grad();
        Tape t;
        const BoundLm lm = bind(t, w);
        const Var loss = forward_lm(lm, t.constant(h), prompt, target).loss;
        t.backward(loss);
        adam.step();
        final_loss = loss.value()(0, 0);
    }
    INFO("final loss " << final_loss);
    CHECK(decode_tokens(greedy_decode(w, h, prompt, 8)) == "cab");
    CHECK(store.checksum([](const Parameter& p) { return !p.trainable; }) == before);
}
