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

#include "mrcq/frontend/spotlight.hpp"

#include <cmath>
#include <string>

#include "mrcq/errors.hpp"

namespace mrcq {

FeatureStream image_spotlight(const FeatureStream& image, const SpotlightSpec& spec) {
    if (spec.grid < 2) throw ArgumentError("image_spotlight: grid must be >= 2, got " + std::to_string(spec.grid));
    if (image.frames != 1) {
        throw ShapeError("image_spotlight: expected a single image frame, got " + std::to_string(image.frames));
    }
    const auto side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(image.features_per_frame))));
    if (side * side != image.features_per_frame) {
        throw ShapeError("image_spotlight: " + std::to_string(image.features_per_frame) +
                         " features do not form a square patch grid");
    }
    if (side % spec.grid != 0) {
        throw ShapeError("image_spotlight: a " + std::to_string(side) + "x" + std::to_string(side) +
                         " patch grid cannot be split " + std::to_string(spec.grid) + " ways");
    }
    const Index sub = side / spec.grid;
    FeatureStream out =
        make_stream(Modality::visual, image.frame_rate, spec.grid * spec.grid, sub * sub, image.channels);
    for (Index gr = 0; gr < spec.grid; ++gr) {
        for (Index gc = 0; gc < spec.grid; ++gc) {
            const Index frame = gr * spec.grid + gc;
            for (Index r = 0; r < sub; ++r) {
                for (Index c = 0; c < sub; ++c) {
                    const Index src = (gr * sub + r) * side + (gc * sub + c);
                    out.values.row(frame * sub * sub + r * sub + c) = image.values.row(src);
                }
            }
        }
    }
    out.source = image.source;
    return out;
}

}  // namespace mrcq
