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

#include "mrcq/numerics/param_store.hpp"

#include "mrcq/errors.hpp"
#include "mrcq/util/rng.hpp"

namespace mrcq {

Parameter& ParamStore::add(std::string name, Matrix value, bool trainable) {
    if (index_.count(name)) throw ArgumentError("duplicate parameter name: " + name);
    auto p = std::make_unique<Parameter>();
    p->name = name;
    p->value = std::move(value);
    p->trainable = trainable;
    p->zero_grad();
    index_.emplace(std::move(name), params_.size());
    params_.push_back(std::move(p));
    return *params_.back();
}

Parameter* ParamStore::find(std::string_view name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
}

const Parameter* ParamStore::find(std::string_view name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
}

Parameter& ParamStore::at(std::string_view name) {
    if (Parameter* p = find(name)) return *p;
    throw ArgumentError("unknown parameter: " + std::string(name));
}

const Parameter& ParamStore::at(std::string_view name) const {
    if (const Parameter* p = find(name)) return *p;
    throw ArgumentError("unknown parameter: " + std::string(name));
}

std::vector<Parameter*> ParamStore::all() {
    std::vector<Parameter*> out;
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

std::vector<const Parameter*> ParamStore::all() const {
    std::vector<const Parameter*> out;
    for (const auto& p : params_) out.push_back(p.get());
    return out;
}

std::vector<Parameter*> ParamStore::trainable() {
    std::vector<Parameter*> out;
    for (auto& p : params_) {
        if (p->trainable) out.push_back(p.get());
    }
    return out;
}

Index ParamStore::count_values(const std::function<bool(const Parameter&)>& pred) const {
    Index n = 0;
    for (const auto& p : params_) {
        if (pred(*p)) n += p->value.size();
    }
    return n;
}

void ParamStore::zero_grad() {
    for (auto& p : params_) p->zero_grad();
}

std::uint64_t ParamStore::checksum(const std::function<bool(const Parameter&)>& pred) const {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (const auto& p : params_) {
        if (!pred(*p)) continue;
        h = fnv1a64(p->name.data(), p->name.size(), h);
        const std::int64_t shape[2] = {p->value.rows(), p->value.cols()};
        h = fnv1a64(shape, sizeof(shape), h);
        h = fnv1a64(p->value.data(), sizeof(double) * static_cast<std::size_t>(p->value.size()), h);
    }
    return h;
}

Matrix init_normal(Index rows, Index cols, double std_dev, std::uint64_t seed, std::string_view name) {
    Rng rng(derive_seed(seed, name));
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * std_dev;
    return m;
}

}  // namespace mrcq
