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

#include "mrcq/numerics/ops.hpp"

#include <cmath>
#include <string>

namespace mrcq {

namespace {

Tape& tape_of(const Var& a) {
    if (!a.valid()) throw ArgumentError("operation on an unbound variable");
    return *a.tape();
}

void same_tape(const Var& a, const Var& b) {
    if (a.tape() != b.tape()) throw ArgumentError("operands recorded on different tapes");
}

void same_shape(const char* op, const Var& a, const Var& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": shapes differ, " + shape_str(a.value()) + " vs " +
                         shape_str(b.value()));
    }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
    same_tape(a, b);
    Tape& t = tape_of(a);
    const int ia = a.id();
    const int ib = b.id();
    return t.record(mrcq::matmul(a.value(), b.value()), {ia, ib}, [ia, ib](Tape& tp, int self) {
        const Matrix& g = tp.grad_of(self);
        if (tp.requires_grad(ia)) tp.accumulate(ia, g * tp.value(ib).transpose());
        if (tp.requires_grad(ib)) tp.accumulate(ib, tp.value(ia).transpose() * g);
    });
}

Var matmul_nt(const Var& a, const Var& b) {
    same_tape(a, b);
    if (a.cols() != b.cols()) {
        throw ShapeError("matmul_nt: column counts differ, " + shape_str(a.value()) + " vs " +
                         shape_str(b.value()));
    }
    Tape& t = tape_of(a);
    const int ia = a.id();
    const int ib = b.id();
    Matrix value = a.value() * b.value().transpose();
    return t.record(std::move(value), {ia, ib}, [ia, ib](Tape& tp, int self) {
        const Matrix& g = tp.grad_of(self);
        if (tp.requires_grad(ia)) tp.accumulate(ia, g * tp.value(ib));
        if (tp.requires_grad(ib)) tp.accumulate(ib, g.transpose() * tp.value(ia));
    });
}

Var transpose(const Var& a) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    return t.record(a.value().transpose(), {ia},
                    [ia](Tape& tp, int self) { tp.accumulate(ia, tp.grad_of(self).transpose()); });
}

Var add(const Var& a, const Var& b) {
    same_tape(a, b);
    same_shape("add", a, b);
    Tape& t = tape_of(a);
    const int ia = a.id();
    const int ib = b.id();
    return t.record(a.value() + b.value(), {ia, ib}, [ia, ib](Tape& tp, int self) {
        tp.accumulate(ia, tp.grad_of(self));
        tp.accumulate(ib, tp.grad_of(self));
    });
}

Var sub(const Var& a, const Var& b) {
    same_tape(a, b);
    same_shape("sub", a, b);
    Tape& t = tape_of(a);
    const int ia = a.id();
    const int ib = b.id();
    return t.record(a.value() - b.value(), {ia, ib}, [ia, ib](Tape& tp, int self) {
        tp.accumulate(ia, tp.grad_of(self));
        tp.accumulate(ib, -tp.grad_of(self));
    });
}

Var add_row(const Var& a, const Var& row) {
    same_tape(a, row);
    if (row.rows() != 1 || row.cols() != a.cols()) {
        throw ShapeError("add_row: row " + shape_str(row.value()) + " does not broadcast over " +
                         shape_str(a.value()));
    }
    Tape& t = tape_of(a);
    const int ia = a.id();
    const int ir = row.id();
    Matrix value = a.value().rowwise() + row.value().row(0);
    return t.record(std::move(value), {ia, ir}, [ia, ir](Tape& tp, int self) {
        const Matrix& g = tp.grad_of(self);
        tp.accumulate(ia, g);
        if (tp.requires_grad(ir)) tp.accumulate(ir, g.colwise().sum());
    });
}

Var mul(const Var& a, const Var& b) {
    same_tape(a, b);
    same_shape("mul", a, b);
    Tape& t = tape_of(a);
    const int ia = a.id();
    const int ib = b.id();
    Matrix value = a.value().cwiseProduct(b.value());
    return t.record(std::move(value), {ia, ib}, [ia, ib](Tape& tp, int self) {
        const Matrix& g = tp.grad_of(self);
        if (tp.requires_grad(ia)) tp.accumulate(ia, g.cwiseProduct(tp.value(ib)));
        if (tp.requires_grad(ib)) tp.accumulate(ib, g.cwiseProduct(tp.value(ia)));
    });
}

Var scale(const Var& a, double s) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    return t.record(a.value() * s, {ia}, [ia, s](Tape& tp, int self) { tp.accumulate(ia, tp.grad_of(self) * s); });
}

namespace {

constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

}  // namespace

// tanh approximation; smooth everywhere, which keeps finite-difference
// checks free of kinks.
Var gelu(const Var& a) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    Matrix value = a.value().unaryExpr([](double x) {
        return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
    });
    return t.record(std::move(value), {ia}, [ia](Tape& tp, int self) {
        const Matrix& x = tp.value(ia);
        Matrix d = x.unaryExpr([](double v) {
            const double inner = kGeluC * (v + kGeluA * v * v * v);
            const double th = std::tanh(inner);
            const double dinner = kGeluC * (1.0 + 3.0 * kGeluA * v * v);
            return 0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * dinner;
        });
        tp.accumulate(ia, tp.grad_of(self).cwiseProduct(d));
    });
}

Var softmax_rows(const Var& x, const Mask* mask) {
    Tape& t = tape_of(x);
    const int ix = x.id();
    Matrix y = mrcq::softmax_rows(x.value(), mask);
    return t.record(std::move(y), {ix}, [ix](Tape& tp, int self) {
        const Matrix& y = tp.value(self);
        const Matrix& g = tp.grad_of(self);
        const Eigen::VectorXd dots = (g.cwiseProduct(y)).rowwise().sum();
        Matrix dx = y.cwiseProduct(g.colwise() - dots);
        tp.accumulate(ix, dx);
    });
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps) {
    same_tape(x, gain);
    same_tape(x, bias);
    Tape& t = tape_of(x);
    const int ix = x.id();
    const int ig = gain.id();
    const int ib = bias.id();
    Matrix y = mrcq::layer_norm(x.value(), gain.value(), bias.value(), eps);
    return t.record(std::move(y), {ix, ig, ib}, [ix, ig, ib, eps](Tape& tp, int self) {
        const Matrix& xv = tp.value(ix);
        const Matrix& gv = tp.value(ig);
        const Matrix& g = tp.grad_of(self);
        const Index n = xv.cols();
        Matrix dx(xv.rows(), n);
        Matrix dgain = Matrix::Zero(1, n);
        Matrix dbias = Matrix::Zero(1, n);
        for (Index i = 0; i < xv.rows(); ++i) {
            const double mean = xv.row(i).mean();
            const Eigen::RowVectorXd centered = xv.row(i).array() - mean;
            const double var = centered.squaredNorm() / static_cast<double>(n);
            const double inv_std = 1.0 / std::sqrt(var + eps);
            const Eigen::RowVectorXd xhat = centered * inv_std;
            const Eigen::RowVectorXd dxhat = g.row(i).cwiseProduct(gv.row(0));
            const double m1 = dxhat.mean();
            const double m2 = dxhat.cwiseProduct(xhat).mean();
            dx.row(i) = (dxhat.array() - m1 - xhat.array() * m2) * inv_std;
            dgain.row(0) += g.row(i).cwiseProduct(xhat);
            dbias.row(0) += g.row(i);
        }
        tp.accumulate(ix, dx);
        if (tp.requires_grad(ig)) tp.accumulate(ig, dgain);
        if (tp.requires_grad(ib)) tp.accumulate(ib, dbias);
    });
}

Var normalize_rows(const Var& x, double floor) {
    Tape& t = tape_of(x);
    const int ix = x.id();
    const Eigen::VectorXd norms = x.value().rowwise().norm();
    for (Index i = 0; i < norms.size(); ++i) {
        if (norms(i) < floor) {
            throw NumericError("normalize_rows: row " + std::to_string(i) + " has norm " +
                               std::to_string(norms(i)) + " below floor; cosine undefined");
        }
    }
    Matrix u = x.value().array().colwise() / norms.array();
    return t.record(std::move(u), {ix}, [ix, norms](Tape& tp, int self) {
        const Matrix& u = tp.value(self);
        const Matrix& g = tp.grad_of(self);
        const Eigen::VectorXd dots = g.cwiseProduct(u).rowwise().sum();
        Matrix dx = ((g.array() - u.array().colwise() * dots.array()).colwise() / norms.array()).matrix();
        tp.accumulate(ix, dx);
    });
}

Var cross_entropy(const Var& logits, std::span<const int> targets) {
    Tape& t = tape_of(logits);
    const Matrix& z = logits.value();
    if (static_cast<Index>(targets.size()) != z.rows() || targets.empty()) {
        throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " +
                         shape_str(z));
    }
    for (int id : targets) {
        if (id < 0 || id >= z.cols()) throw ArgumentError("cross_entropy: target id out of range");
    }
    Matrix probs = mrcq::softmax_rows(z);
    double loss = 0.0;
    for (Index i = 0; i < z.rows(); ++i) {
        const double row_max = z.row(i).maxCoeff();
        const double lse = row_max + std::log((z.row(i).array() - row_max).exp().sum());
        loss += lse - z(i, targets[static_cast<std::size_t>(i)]);
    }
    const double n = static_cast<double>(z.rows());
    const int iz = logits.id();
    std::vector<int> ids(targets.begin(), targets.end());
    return t.record(Matrix::Constant(1, 1, loss / n), {iz},
                    [iz, probs = std::move(probs), ids = std::move(ids), n](Tape& tp, int self) {
                        Matrix d = probs;
                        for (std::size_t i = 0; i < ids.size(); ++i) d(static_cast<Index>(i), ids[i]) -= 1.0;
                        tp.accumulate(iz, d * (tp.grad_of(self)(0, 0) / n));
                    });
}

Var sum(const Var& a) {
    Tape& t = tape_of(a);
    const int ia = a.id();
    const Index r = a.rows();
    const Index c = a.cols();
    return t.record(Matrix::Constant(1, 1, a.value().sum()), {ia}, [ia, r, c](Tape& tp, int self) {
        tp.accumulate(ia, Matrix::Constant(r, c, tp.grad_of(self)(0, 0)));
    });
}

Var slice_rows(const Var& a, Index start, Index count) {
    if (start < 0 || count < 0 || start + count > a.rows()) {
        throw ShapeError("slice_rows: [" + std::to_string(start) + ", +" + std::to_string(count) +
                         ") outside " + shape_str(a.value()));
    }
    Tape& t = tape_of(a);
    const int ia = a.id();
    const Index r = a.rows();
    const Index c = a.cols();
    return t.record(a.value().middleRows(start, count), {ia}, [ia, r, c, start, count](Tape& tp, int self) {
        Matrix d = Matrix::Zero(r, c);
        d.middleRows(start, count) = tp.grad_of(self);
        tp.accumulate(ia, d);
    });
}

Var slice_cols(const Var& a, Index start, Index count) {
    if (start < 0 || count < 0 || start + count > a.cols()) {
        throw ShapeError("slice_cols: [" + std::to_string(start) + ", +" + std::to_string(count) +
                         ") outside " + shape_str(a.value()));
    }
    Tape& t = tape_of(a);
    const int ia = a.id();
    const Index r = a.rows();
    const Index c = a.cols();
    return t.record(a.value().middleCols(start, count), {ia}, [ia, r, c, start, count](Tape& tp, int self) {
        Matrix d = Matrix::Zero(r, c);
        d.middleCols(start, count) = tp.grad_of(self);
        tp.accumulate(ia, d);
    });
}

Var concat_rows(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no inputs");
    Tape& t = tape_of(parts[0]);
    const Index cols = parts[0].cols();
    Index rows = 0;
    std::vector<int> ids;
    std::vector<Index> offsets;
    for (const Var& p : parts) {
        same_tape(parts[0], p);
        if (p.cols() != cols) {
            throw ShapeError("concat_rows: column mismatch " + shape_str(parts[0].value()) + " vs " +
                             shape_str(p.value()));
        }
        ids.push_back(p.id());
        offsets.push_back(rows);
        rows += p.rows();
    }
    Matrix value(rows, cols);
    for (std::size_t i = 0; i < parts.size(); ++i) value.middleRows(offsets[i], parts[i].rows()) = parts[i].value();
    return t.record(std::move(value), ids, [ids, offsets](Tape& tp, int self) {
        const Matrix& g = tp.grad_of(self);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (tp.requires_grad(ids[i])) tp.accumulate(ids[i], g.middleRows(offsets[i], tp.value(ids[i]).rows()));
        }
    });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no inputs");
    Tape& t = tape_of(parts[0]);
    const Index rows = parts[0].rows();
    Index cols = 0;
    std::vector<int> ids;
    std::vector<Index> offsets;
    for (const Var& p : parts) {
        same_tape(parts[0], p);
        if (p.rows() != rows) {
            throw ShapeError("concat_cols: row mismatch " + shape_str(parts[0].value()) + " vs " +
                             shape_str(p.value()));
        }
        ids.push_back(p.id());
        offsets.push_back(cols);
        cols += p.cols();
    }
    Matrix value(rows, cols);
    for (std::size_t i = 0; i < parts.size(); ++i) value.middleCols(offsets[i], parts[i].cols()) = parts[i].value();
    return t.record(std::move(value), ids, [ids, offsets](Tape& tp, int self) {
        const Matrix& g = tp.grad_of(self);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (tp.requires_grad(ids[i])) tp.accumulate(ids[i], g.middleCols(offsets[i], tp.value(ids[i]).cols()));
        }
    });
}

Var gather_rows(const Var& table, std::span<const int> ids) {
    Tape& t = tape_of(table);
    const Matrix& tv = table.value();
    Matrix value(static_cast<Index>(ids.size()), tv.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || ids[i] >= tv.rows()) {
            throw ShapeError("gather_rows: id " + std::to_string(ids[i]) + " outside table " + shape_str(tv));
        }
        value.row(static_cast<Index>(i)) = tv.row(ids[i]);
    }
    const int it = table.id();
    std::vector<int> idx(ids.begin(), ids.end());
    const Index r = tv.rows();
    const Index c = tv.cols();
    return t.record(std::move(value), {it}, [it, idx = std::move(idx), r, c](Tape& tp, int self) {
        const Matrix& g = tp.grad_of(self);
        Matrix d = Matrix::Zero(r, c);
        for (std::size_t i = 0; i < idx.size(); ++i) d.row(idx[i]) += g.row(static_cast<Index>(i));
        tp.accumulate(it, d);
    });
}

Var masked_attention(const Var& q, const Var& k, const Var& v, const Mask& mask) {
    if (q.cols() != k.cols() || k.rows() != v.rows()) {
        throw ShapeError("masked_attention: Q " + shape_str(q.value()) + ", K " + shape_str(k.value()) + ", V " +
                         shape_str(v.value()));
    }
    if (mask.rows() != q.rows() || mask.cols() != k.rows()) {
        throw ShapeError("masked_attention: mask " + shape_str(mask) + " for " + std::to_string(q.rows()) +
                         " queries and " + std::to_string(k.rows()) + " keys");
    }
    const double s = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    Var scores = scale(matmul_nt(q, k), s);
    return matmul(softmax_rows(scores, &mask), v);
}

Var cosine_similarity(const Var& a, const Var& b, double floor) {
    return matmul_nt(normalize_rows(a, floor), normalize_rows(b, floor));
}

}  // namespace mrcq
