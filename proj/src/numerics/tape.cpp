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

#include "mrcq/numerics/tape.hpp"

#include "mrcq/errors.hpp"

namespace mrcq {

const Matrix& Var::value() const { return tape_->value(id_); }

Matrix Var::grad() const {
    if (tape_->has_grad(id_)) return tape_->grad_of(id_);
    return Matrix::Zero(rows(), cols());
}

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::constant(Matrix value) {
    Node n;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Tape::leaf(Matrix value) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = true;
    return push(std::move(n));
}

Var Tape::param(Parameter& p) {
    Node n;
    n.value = p.value;
    n.requires_grad = p.trainable;
    n.param = p.trainable ? &p : nullptr;
    return push(std::move(n));
}

Var Tape::record(Matrix value, std::initializer_list<int> inputs, Backward fn) {
    return record(std::move(value), std::vector<int>(inputs), std::move(fn));
}

Var Tape::record(Matrix value, const std::vector<int>& inputs, Backward fn) {
    Node n;
    n.value = std::move(value);
    for (int id : inputs) {
        if (nodes_[static_cast<std::size_t>(id)].requires_grad) {
            n.requires_grad = true;
            break;
        }
    }
    if (n.requires_grad) n.backward = std::move(fn);
    return push(std::move(n));
}

void Tape::backward(const Var& root) {
    if (root.tape() != this) throw ArgumentError("backward: root belongs to a different tape");
    if (root.rows() != 1 || root.cols() != 1) {
        throw ShapeError("backward: root must be a scalar, got " + shape_str(root.value()));
    }
    visits_ = 0;
    for (auto& n : nodes_) n.grad.resize(0, 0);
    accumulate(root.id(), Matrix::Ones(1, 1));
    for (int id = root.id(); id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.requires_grad || n.grad.size() == 0) continue;
        if (n.backward) {
            n.backward(*this, id);
            ++visits_;
        }
        if (n.param) {
            if (n.param->grad.size() == 0) {
                n.param->grad = n.grad;
            } else {
                n.param->grad += n.grad;
            }
        }
    }
}

}  // namespace mrcq
