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
#include <span>

#include "mrcq/numerics/tape.hpp"

namespace mrcq {

struct GradCheckResult {
    double max_rel_error = 0.0;
    Matrix analytic;
    Matrix numeric;
};

// Relative error used by every gradient check: |a - n| / max(|a|, |n|, floor).
// The floor keeps coordinates whose true gradient is ~0 from reporting the
// round-off of the difference quotient as a huge relative error.
inline constexpr double kGradCheckFloor = 1e-6;

double relative_error(double analytic, double numeric, double floor = kGradCheckFloor);

// Compares the tape gradient of a scalar f at x with central differences
// of step h, coordinate by coordinate.
GradCheckResult grad_check(const std::function<Var(Tape&, const Var&)>& f, const Matrix& x, double h = 1e-4);

struct ParamGradCheck {
    double max_rel_error = 0.0;
    std::size_t coordinates = 0;
    std::string worst;  // "<param>[r,c]" of the worst coordinate
};

// Same comparison for a loss over bound parameters. Checks every coordinate
// when max_coords_per_param == 0, otherwise a seeded sample per parameter.
ParamGradCheck grad_check_params(const std::function<Var(Tape&)>& loss, std::span<Parameter* const> params,
                                 double h = 1e-4, std::size_t max_coords_per_param = 0, std::uint64_t seed = 0);

}  // namespace mrcq
