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

#include "mrcq/training/losses.hpp"

#include <cmath>

#include "mrcq/errors.hpp"

namespace mrcq {

namespace {

// Off-diagonal sum of U U^T for row-normalised U: |1^T U|^2 - sum(U o U).
Var window_pairs(const Var& rows) {
    Tape& t = *rows.tape();
    const Var u = normalize_rows(rows, kCosineNormFloor);
    const Var col_sum = matmul(t.constant(Matrix::Ones(1, rows.rows())), u);
    return sub(matmul_nt(col_sum, col_sum), sum(mul(u, u)));
}

}  // namespace

Var diversity_loss(std::span<const ResolutionOutput> outputs) {
    std::vector<Var> terms;
    for (const auto& out : outputs) {
        if (out.level < 2) continue;
        const Index n = out.queries_per_window;
        if (n < 1) throw ArgumentError("diversity_loss: level " + std::to_string(out.level) + " has no queries");
        if (n < 2) continue;
        for (Index w = 0; w < out.windows; ++w) {
            if (!out.window_has_frames[static_cast<std::size_t>(w)]) continue;
            terms.push_back(window_pairs(slice_rows(out.rows, w * n, n)));
        }
    }
    if (terms.empty()) {
        if (outputs.empty()) throw ArgumentError("diversity_loss: no outputs");
        return outputs.front().rows.tape()->constant(Matrix::Zero(1, 1));
    }
    Var total = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) total = add(total, terms[i]);
    return total;
}

std::optional<double> mean_pairwise_cosine(const ResolutionOutput& out) {
    const Index n = out.queries_per_window;
    if (n < 2) return std::nullopt;
    double total = 0.0;
    Index pairs = 0;
    const Matrix& rows = out.rows.value();
    for (Index w = 0; w < out.windows; ++w) {
        if (!out.window_has_frames[static_cast<std::size_t>(w)]) continue;
        Matrix u = rows.middleRows(w * n, n);
        const auto norms = u.rowwise().norm().eval();
        if ((norms.array() < kCosineNormFloor).any()) {
            throw NumericError("mean_pairwise_cosine: query row below the norm floor");
        }
        u = (u.array().colwise() / norms.array()).matrix();
        const Matrix g = u * u.transpose();
        total += g.sum() - g.trace();
        pairs += n * (n - 1);
    }
    if (pairs == 0) return std::nullopt;
    return total / static_cast<double>(pairs);
}

std::vector<std::optional<double>> mean_pairwise_cosine(std::span<const ResolutionOutput> outputs) {
    std::vector<std::optional<double>> v;
    for (const auto& o : outputs) v.push_back(mean_pairwise_cosine(o));
    return v;
}

Var total_loss(const Var& ce, const Var& div, double lambda) {
    if (lambda == 0.0) return ce;
    return add(ce, scale(div, lambda));
}

double total_loss(double ce, double div, double lambda) { return ce + lambda * div; }

}  // namespace mrcq
