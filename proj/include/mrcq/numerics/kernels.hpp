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

// Forward-only dense kernels. These are the reference definitions; the
// differentiable versions in ops.hpp call into them for their values.

#include <cmath>
#include <limits>

#include "mrcq/errors.hpp"
#include "mrcq/numerics/tensor.hpp"

namespace mrcq {

inline constexpr double kLayerNormEps = 1e-5;

template <class A, class B>
Tensor<typename A::Scalar> matmul(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ, " + shape_str(a) + " x " + shape_str(b));
    }
    return a * b;
}

// Row-wise softmax. Masked entries (mask == false) receive an additive -inf
// before normalisation and come out as exact zeros.
template <class Derived>
Tensor<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& x, const Mask* mask = nullptr) {
    using Scalar = typename Derived::Scalar;
    if (mask && (mask->rows() != x.rows() || mask->cols() != x.cols())) {
        throw ShapeError("softmax_rows: mask " + shape_str(*mask) + " does not match input " + shape_str(x));
    }
    constexpr Scalar neg_inf = -std::numeric_limits<Scalar>::infinity();
    Tensor<Scalar> out(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i) {
        Scalar row_max = neg_inf;
        Index admissible = 0;
        bool nan = false;
        for (Index j = 0; j < x.cols(); ++j) {
            const bool keep = !mask || (*mask)(i, j);
            const Scalar z = keep ? x(i, j) : neg_inf;
            out(i, j) = z;
            admissible += keep ? 1 : 0;
            nan = nan || std::isnan(z);
            row_max = std::max(row_max, z);
        }
        if (admissible == 0) {
            throw DegenerateMaskError("softmax_rows: row " + std::to_string(i) + " is fully masked");
        }
        // Non-finite scores propagate so callers can detect divergence.
        if (nan || row_max == neg_inf) {
            out.row(i).setConstant(std::numeric_limits<Scalar>::quiet_NaN());
            continue;
        }
        Scalar total = 0;
        for (Index j = 0; j < x.cols(); ++j) {
            out(i, j) = std::exp(out(i, j) - row_max);
            total += out(i, j);
        }
        out.row(i) /= total;
    }
    return out;
}

// Normalises each row of x to zero mean / unit variance, then applies the
// affine gain and bias (both 1 x n).
template <class X, class G, class B>
Tensor<typename X::Scalar> layer_norm(const Eigen::MatrixBase<X>& x, const Eigen::MatrixBase<G>& gain,
                                      const Eigen::MatrixBase<B>& bias, double eps = kLayerNormEps) {
    using Scalar = typename X::Scalar;
    const Index n = x.cols();
    if (n < 2) throw ShapeError("layer_norm: need at least 2 features, got " + shape_str(x));
    if (gain.size() != n || bias.size() != n) {
        throw ShapeError("layer_norm: gain " + shape_str(gain) + " / bias " + shape_str(bias) +
                         " do not match input " + shape_str(x));
    }
    Tensor<Scalar> out(x.rows(), n);
    for (Index i = 0; i < x.rows(); ++i) {
        const Scalar mean = x.row(i).mean();
        const auto centered = (x.row(i).array() - mean).eval();
        const Scalar var = centered.square().mean();
        const Scalar inv_std = Scalar(1) / std::sqrt(var + Scalar(eps));
        out.row(i) = (centered * inv_std * gain.reshaped().transpose().array() +
                      bias.reshaped().transpose().array())
                         .matrix();
    }
    return out;
}

// softmax(Q K^T / sqrt(d), mask) V
template <class Q, class K, class V>
Tensor<typename Q::Scalar> masked_attention(const Eigen::MatrixBase<Q>& q, const Eigen::MatrixBase<K>& k,
                                            const Eigen::MatrixBase<V>& v, const Mask& mask) {
    using Scalar = typename Q::Scalar;
    if (q.cols() != k.cols() || k.rows() != v.rows()) {
        throw ShapeError("masked_attention: Q " + shape_str(q) + ", K " + shape_str(k) + ", V " + shape_str(v));
    }
    if (mask.rows() != q.rows() || mask.cols() != k.rows()) {
        throw ShapeError("masked_attention: mask " + shape_str(mask) + " for " + std::to_string(q.rows()) +
                         " queries and " + std::to_string(k.rows()) + " keys");
    }
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(q.cols()));
    const Tensor<Scalar> scores = (q * k.transpose()) * scale;
    return softmax_rows(scores, &mask) * v;
}

}  // namespace mrcq
