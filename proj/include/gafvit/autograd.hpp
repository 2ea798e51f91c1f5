#pragma once

// Tape-based reverse-mode differentiation over dense matrices.
//
// A Tape records every operation in creation order, so the recorded graph is
// acyclic by construction and backward() walks it in reverse. Parameters are
// bound by reference: their gradients accumulate straight into
// Parameter::grad.

#include "gafvit/matrix.hpp"

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gafvit::autograd {

struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
    bool frozen = false;
};

class Tape;

class Var {
public:
    Var() = default;

    const Matrix& value() const;
    std::size_t rows() const { return value().rows; }
    std::size_t cols() const { return value().cols; }
    // Scalar value of a 1 x 1 node.
    double item() const;

    Tape& tape() const { return *m_tape; }
    std::size_t id() const noexcept { return m_id; }
    bool valid() const noexcept { return m_tape != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : m_tape(tape), m_id(id) {}

    Tape* m_tape = nullptr;
    std::size_t m_id = 0;
};

class Tape {
public:
    using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

    // With record = false no backward closures are kept (inference mode).
    explicit Tape(bool record = true) : m_record(record) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const noexcept { return m_record; }

    Var constant(Matrix value);
    // Leaf whose gradient is kept on the tape; read it with grad().
    Var variable(Matrix value);
    // Leaf bound to a parameter; frozen parameters receive no gradient.
    Var param(Parameter& p);

    // Seeds d(loss)/d(loss) = seed and propagates to every reachable leaf.
    // The loss must be 1 x 1. Gradients accumulate, so several backward passes
    // over separate tapes sum into shared parameters.
    void backward(Var loss, double seed = 1.0);

    const Matrix& value(Var v) const;
    // Gradient of a leaf created with variable(); zeros if unreachable.
    Matrix grad(Var v) const;

    std::size_t size() const noexcept { return m_nodes.size(); }

    // Used by operation implementations.
    Var push(Matrix value, const std::vector<Var>& inputs, BackwardFn backward);
    bool requires_grad(Var v) const;
    // Gradient buffer of v, allocated on first use; nullptr if v needs none.
    Matrix* grad_buffer(Var v);

private:
    struct Node {
        Matrix value;
        const Matrix* external_value = nullptr;
        Matrix grad;
        Matrix* external_grad = nullptr;
        bool requires_grad = false;
        bool grad_ready = false;
        BackwardFn backward;
    };

    const Node& node(Var v) const;
    Node& node(Var v);

    bool m_record;
    std::deque<Node> m_nodes;
};

// x (r x k) times w^T (w is o x k) plus an optional 1 x o bias.
Var linear(Var x, Var w, std::optional<Var> bias = std::nullopt);
// a (r x k) times b^T (b is s x k).
Var matmul_nt(Var a, Var b);
// a (r x k) times b (k x s).
Var matmul(Var a, Var b);

Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var sum(Var a);

Var relu(Var x);
Var sigmoid(Var x);
// Exact Gaussian-CDF form: 0.5 x (1 + erf(x / sqrt 2)).
Var gelu(Var x);
Var softmax_rows(Var x);
// Row-wise normalization with per-column scale (1 x c) and shift (1 x c).
Var layer_norm(Var x, Var gamma, Var beta, double eps);

Var slice_rows(Var x, std::size_t start, std::size_t count);
Var slice_cols(Var x, std::size_t start, std::size_t count);
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var reshape(Var x, std::size_t rows, std::size_t cols);
// out.data[i] = x.data[index[i]]; gradients scatter-add back.
Var gather(Var x, std::shared_ptr<const std::vector<std::size_t>> index, std::size_t rows, std::size_t cols);

// 1 x c vector of column means.
Var col_mean(Var x);
// out(i, c) = x(i, c) * s(0, c).
Var scale_cols(Var x, Var s);

// -log softmax(logits)[label] for a 1 x K row, log-sum-exp stabilized.
Var cross_entropy(Var logits, std::size_t label);

} // namespace gafvit::autograd
