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
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mrcq/numerics/tape.hpp"

namespace mrcq {

// Owns every named weight of a model in registration order. Parameter
// addresses are stable for the lifetime of the store.
class ParamStore {
public:
    ParamStore() = default;
    ParamStore(const ParamStore&) = delete;
    ParamStore& operator=(const ParamStore&) = delete;
    ParamStore(ParamStore&&) = default;
    ParamStore& operator=(ParamStore&&) = default;

    Parameter& add(std::string name, Matrix value, bool trainable);
    Parameter& at(std::string_view name);
    const Parameter& at(std::string_view name) const;
    Parameter* find(std::string_view name);
    const Parameter* find(std::string_view name) const;

    std::vector<Parameter*> all();
    std::vector<const Parameter*> all() const;
    std::vector<Parameter*> trainable();

    std::size_t size() const { return params_.size(); }
    Index count_values(const std::function<bool(const Parameter&)>& pred) const;
    void zero_grad();

    // FNV-1a over names, shapes and value bytes of the selected parameters.
    std::uint64_t checksum(const std::function<bool(const Parameter&)>& pred) const;

private:
    std::vector<std::unique_ptr<Parameter>> params_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

// Seeded N(0, std^2) initialiser; the stream depends only on (seed, name), so
// values do not shift when unrelated parameters are added.
Matrix init_normal(Index rows, Index cols, double std_dev, std::uint64_t seed, std::string_view name);

}  // namespace mrcq
