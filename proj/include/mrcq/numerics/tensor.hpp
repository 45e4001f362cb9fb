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

#include <Eigen/Dense>

#include <sstream>
#include <string>

namespace mrcq {

// Row-major dense storage; every tensor in the library is rank 2, with
// vectors held as 1 x n rows.
template <class Scalar>
using Tensor = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = Tensor<double>;
using Mask = Tensor<bool>;
using Index = Eigen::Index;

template <class Derived>
std::string shape_str(const Eigen::EigenBase<Derived>& m) {
    std::ostringstream ss;
    ss << "[" << m.rows() << "x" << m.cols() << "]";
    return ss.str();
}

template <class Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
    return m.derived().array().isFinite().all();
}

}  // namespace mrcq
