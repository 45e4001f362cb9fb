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

#include "mrcq/frontend/feature_stream.hpp"

namespace mrcq {

// Splits a single image's square patch grid into grid x grid sub-images.
// Scan order is fixed: row-major starting at the top-left sub-image.
struct SpotlightSpec {
    Index grid = 2;
};

// Input: one frame whose F = P*P feature rows are a row-major P x P patch
// grid with P divisible by spec.grid. Output: a visual stream of grid^2
// frames, each holding its (P/grid)^2 patches in row-major order.
FeatureStream image_spotlight(const FeatureStream& image, const SpotlightSpec& spec);

}  // namespace mrcq
