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

#include <vector>

#include "mrcq/numerics/tape.hpp"

namespace mrcq {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 1.0;  // global L2 clip; <= 0 disables
};

// Adam with bias correction over a fixed parameter list. Frozen parameters
// are never touched, whatever their grad holds.
class Adam {
public:
    Adam(std::vector<Parameter*> params, AdamConfig config);

    // Clips, updates, and returns the global gradient norm before clipping.
    double step();

    long steps_taken() const { return t_; }
    const AdamConfig& config() const { return config_; }

private:
    std::vector<Parameter*> params_;
    std::vector<Matrix> m_, v_;
    AdamConfig config_;
    long t_ = 0;
};

// L2 norm over the grads of the given parameters (empty grads count as 0).
double global_grad_norm(const std::vector<Parameter*>& params);

}  // namespace mrcq
