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

#include "mrcq/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mrcq/errors.hpp"
#include "mrcq/util/rng.hpp"

namespace mrcq {

double relative_error(double analytic, double numeric, double floor) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

namespace {

double eval_scalar(const std::function<Var(Tape&, const Var&)>& f, const Matrix& x) {
    Tape tape;
    Var xv = tape.constant(x);
    Var out = f(tape, xv);
    if (out.rows() != 1 || out.cols() != 1) throw ShapeError("grad_check: f must return a scalar");
    const double v = out.value()(0, 0);
    if (!std::isfinite(v)) throw NumericError("grad_check: f is not finite at a perturbed point");
    return v;
}

double eval_loss(const std::function<Var(Tape&)>& loss) {
    Tape tape;
    const double v = loss(tape).value()(0, 0);
    if (!std::isfinite(v)) throw NumericError("grad_check: loss is not finite at a perturbed point");
    return v;
}

}  // namespace

GradCheckResult grad_check(const std::function<Var(Tape&, const Var&)>& f, const Matrix& x, double h) {
    GradCheckResult result;
    {
        Tape tape;
        Var xv = tape.leaf(x);
        Var out = f(tape, xv);
        if (out.rows() != 1 || out.cols() != 1) throw ShapeError("grad_check: f must return a scalar");
        if (!std::isfinite(out.value()(0, 0))) throw NumericError("grad_check: f is not finite at x");
        tape.backward(out);
        result.analytic = xv.grad();
    }
    result.numeric = Matrix::Zero(x.rows(), x.cols());
    Matrix probe = x;
    for (Index i = 0; i < x.size(); ++i) {
        const double saved = probe.data()[i];
        probe.data()[i] = saved + h;
        const double up = eval_scalar(f, probe);
        probe.data()[i] = saved - h;
        const double down = eval_scalar(f, probe);
        probe.data()[i] = saved;
        result.numeric.data()[i] = (up - down) / (2.0 * h);
        result.max_rel_error =
            std::max(result.max_rel_error, relative_error(result.analytic.data()[i], result.numeric.data()[i]));
    }
    return result;
}

ParamGradCheck grad_check_params(const std::function<Var(Tape&)>& loss, std::span<Parameter* const> params,
                                 double h, std::size_t max_coords_per_param, std::uint64_t seed) {
    for (Parameter* p : params) p->zero_grad();
    {
        Tape tape;
        Var out = loss(tape);
        if (!std::isfinite(out.value()(0, 0))) throw NumericError("grad_check: loss is not finite");
        tape.backward(out);
    }
    ParamGradCheck result;
    Rng rng(seed);
    for (Parameter* p : params) {
        if (!p->trainable) continue;
        std::vector<Index> coords(static_cast<std::size_t>(p->value.size()));
        std::iota(coords.begin(), coords.end(), Index{0});
        if (max_coords_per_param > 0 && coords.size() > max_coords_per_param) {
            for (std::size_t i = 0; i < max_coords_per_param; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng.below(coords.size() - i));
                std::swap(coords[i], coords[j]);
            }
            coords.resize(max_coords_per_param);
        }
        for (Index c : coords) {
            double& slot = p->value.data()[c];
            const double saved = slot;
            slot = saved + h;
            const double up = eval_loss(loss);
            slot = saved - h;
            const double down = eval_loss(loss);
            slot = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double err = relative_error(p->grad.data()[c], numeric);
            ++result.coordinates;
            if (err > result.max_rel_error || result.worst.empty()) {
                if (err >= result.max_rel_error) {
                    result.max_rel_error = err;
                    result.worst = p->name + "[" + std::to_string(c / p->value.cols()) + "," +
                                   std::to_string(c % p->value.cols()) + "]";
                }
            }
        }
    }
    return result;
}

}  // namespace mrcq
