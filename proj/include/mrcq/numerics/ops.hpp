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

// Differentiable primitives over Tape variables. Each op checks shapes,
// computes its value with the forward kernels, and records a closure that
// pushes gradients to its inputs.

#include <span>
#include <vector>

#include "mrcq/numerics/kernels.hpp"
#include "mrcq/numerics/tape.hpp"

namespace mrcq {

Var matmul(const Var& a, const Var& b);
// a * b^T without materialising the transpose.
Var matmul_nt(const Var& a, const Var& b);
Var transpose(const Var& a);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
// Adds a 1 x n row to every row of a.
Var add_row(const Var& a, const Var& row);
Var mul(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var gelu(const Var& a);

Var softmax_rows(const Var& x, const Mask* mask = nullptr);
Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps = kLayerNormEps);
// Rows scaled to unit L2 norm. A row with norm below `floor` raises
// NumericError.
Var normalize_rows(const Var& x, double floor = 1e-12);

// Mean token cross-entropy of row-wise logits against target ids.
Var cross_entropy(const Var& logits, std::span<const int> targets);

Var sum(const Var& a);

Var slice_rows(const Var& a, Index start, Index count);
Var slice_cols(const Var& a, Index start, Index count);
Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
// out.row(i) = table.row(ids[i])
Var gather_rows(const Var& table, std::span<const int> ids);

// softmax(Q K^T / sqrt(d), mask) V, composed from the primitives above.
Var masked_attention(const Var& q, const Var& k, const Var& v, const Mask& mask);

// Pairwise cosine similarity between the rows of a and the rows of b.
Var cosine_similarity(const Var& a, const Var& b, double floor = 1e-12);

}  // namespace mrcq
