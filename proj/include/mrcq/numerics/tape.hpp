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

#include <functional>
#include <string>
#include <vector>

#include "mrcq/numerics/tensor.hpp"

namespace mrcq {

// A named model weight. Gradients accumulate into `grad` across every tape
// the parameter is bound to, until zero_grad().
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
    bool trainable = true;

    void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
public:
    Var() = default;

    const Matrix& value() const;
    // Gradient after Tape::backward; a zero matrix when nothing flowed here.
    Matrix grad() const;
    bool requires_grad() const;

    Index rows() const { return value().rows(); }
    Index cols() const { return value().cols(); }

    Tape* tape() const { return tape_; }
    int id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    int id_ = -1;
};

// Reverse-mode tape over a fixed primitive set. Nodes are appended in
// evaluation order, so the record is already topologically sorted.
class Tape {
public:
    using Backward = std::function<void(Tape&, int self)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Matrix value);
    Var leaf(Matrix value);
    // Binds a parameter; its gradient is accumulated into p.grad on backward
    // when p.trainable is set.
    Var param(Parameter& p);

    // Appends an op node. `fn` is only kept when some input needs a gradient.
    Var record(Matrix value, std::initializer_list<int> inputs, Backward fn);
    Var record(Matrix value, const std::vector<int>& inputs, Backward fn);

    // Seeds d(root)/d(root) = 1 for a 1x1 root and replays the tape in reverse.
    void backward(const Var& root);

    const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
    bool has_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad.size() > 0; }
    const Matrix& grad_of(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

    template <class Expr>
    void accumulate(int id, const Expr& g) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.requires_grad) return;
        if (n.grad.size() == 0) {
            n.grad = g;
        } else {
            n.grad += g;
        }
    }

    std::size_t size() const { return nodes_.size(); }
    // Number of op backward functions executed by the last backward().
    std::size_t backward_visits() const { return visits_; }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        Backward backward;
        Parameter* param = nullptr;
    };

    Var push(Node node);

    std::vector<Node> nodes_;
    std::size_t visits_ = 0;
};

}  // namespace mrcq
