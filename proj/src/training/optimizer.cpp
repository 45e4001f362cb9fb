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

#include "mrcq/training/optimizer.hpp"

#include <cmath>

#include "mrcq/errors.hpp"

namespace mrcq {

Adam::Adam(std::vector<Parameter*> params, AdamConfig config) : config_(config) {
    if (!(config.lr > 0.0)) throw ArgumentError("adam: learning rate must be > 0");
    if (config.beta1 < 0.0 || config.beta1 >= 1.0 || config.beta2 < 0.0 || config.beta2 >= 1.0) {
        throw ArgumentError("adam: betas must lie in [0, 1)");
    }
    for (Parameter* p : params) {
        if (!p->trainable) continue;
        params_.push_back(p);
        m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
}

double global_grad_norm(const std::vector<Parameter*>& params) {
    double sq = 0.0;
    for (const Parameter* p : params) {
        if (p->grad.size() > 0) sq += p->grad.squaredNorm();
    }
    return std::sqrt(sq);
}

double Adam::step() {
    const double norm = global_grad_norm(params_);
    if (!std::isfinite(norm)) throw NumericError("adam: non-finite gradient norm");
    const double clip = (config_.clip_norm > 0.0 && norm > config_.clip_norm) ? config_.clip_norm / norm : 1.0;
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Parameter& p = *params_[i];
        if (p.grad.size() == 0) continue;
        const Matrix g = p.grad * clip;
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseProduct(g);
        p.value.array() -= config_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + config_.eps);
    }
    return norm;
}

}  // namespace mrcq
