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

#include <optional>
#include <span>
#include <vector>

#include "mrcq/qformer/mrc_qformer.hpp"

namespace mrcq {

inline constexpr double kCosineNormFloor = 1e-12;

// Sum over levels r >= 2, windows with at least one real frame, and ordered
// pairs i != j of cosine(h_wi, h_wj), on the pre-projection rows. Level 1
// never contributes. A query row with norm below the floor raises
// NumericError.
Var diversity_loss(std::span<const ResolutionOutput> outputs);

// Mean pairwise cosine of one level over its non-padded windows; empty when
// the level has fewer than two queries per window. Diagnostic only.
std::optional<double> mean_pairwise_cosine(const ResolutionOutput& output);
std::vector<std::optional<double>> mean_pairwise_cosine(std::span<const ResolutionOutput> outputs);

// L = ce + lambda * div.
Var total_loss(const Var& ce, const Var& div, double lambda);
double total_loss(double ce, double div, double lambda);

}  // namespace mrcq
