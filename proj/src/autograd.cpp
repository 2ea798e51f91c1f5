#include "gafvit/autograd.hpp"

#include "gafvit/error.hpp"
#include "gafvit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace gafvit::autograd {

namespace {

std::string shape_str(const Matrix& m) { return std::to_string(m.rows) + "x" + std::to_string(m.cols); }

void require(bool ok, const std::string& what) {
    if (!ok) raise(Errc::ShapeMismatch, what);
}

void check_same_tape(Var a, Var b) {
    if (&a.tape() != &b.tape()) raise(Errc::InvalidArgument, "operands recorded on different tapes");
}

} // namespace

const Matrix& Var::value() const { return m_tape->value(*this); }

double Var::item() const {
    const Matrix& v = value();
    require(v.size() == 1, "item() on " + shape_str(v));
    return v.data[0];
}

const Tape::Node& Tape::node(Var v) const { return m_nodes.at(v.id()); }
Tape::Node& Tape::node(Var v) { return m_nodes.at(v.id()); }

const Matrix& Tape::value(Var v) const {
    const Node& n = node(v);
    return n.external_value ? *n.external_value : n.value;
}

Var Tape::constant(Matrix value) {
    Node n;
    n.value = std::move(value);
    m_nodes.push_back(std::move(n));
    return Var(this, m_nodes.size() - 1);
}

Var Tape::variable(Matrix value) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = m_record;
    m_nodes.push_back(std::move(n));
    return Var(this, m_nodes.size() - 1);
}

Var Tape::param(Parameter& p) {
    Node n;
    n.external_value = &p.value;
    n.requires_grad = m_record && !p.frozen;
    if (n.requires_grad) {
        if (!p.grad.same_shape(p.value)) p.grad = Matrix(p.value.rows, p.value.cols);
        n.external_grad = &p.grad;
        n.grad_ready = true;
    }
    m_nodes.push_back(std::move(n));
    return Var(this, m_nodes.size() - 1);
}

Var Tape::push(Matrix value, const std::vector<Var>& inputs, BackwardFn backward) {
    Node n;
    n.value = std::move(value);
    if (m_record) {
        for (Var in : inputs) {
            if (&in.tape() != this) raise(Errc::InvalidArgument, "operand recorded on a different tape");
            if (node(in).requires_grad) n.requires_grad = true;
        }
        if (n.requires_grad) n.backward = std::move(backward);
    }
    m_nodes.push_back(std::move(n));
    return Var(this, m_nodes.size() - 1);
}

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

Matrix* Tape::grad_buffer(Var v) {
    Node& n = node(v);
    if (!n.requires_grad) return nullptr;
    if (n.external_grad) return n.external_grad;
    if (!n.grad_ready) {
        const Matrix& val = value(v);
        n.grad = Matrix(val.rows, val.cols);
        n.grad_ready = true;
    }
    return &n.grad;
}

Matrix Tape::grad(Var v) const {
    const Node& n = node(v);
    if (n.external_grad) return *n.external_grad;
    if (n.grad_ready) return n.grad;
    const Matrix& val = value(v);
    return Matrix(val.rows, val.cols);
}

void Tape::backward(Var loss, double seed) {
    if (!m_record) raise(Errc::InvalidArgument, "backward() on a non-recording tape");
    require(value(loss).size() == 1, "backward() needs a scalar loss, got " + shape_str(value(loss)));
    if (!node(loss).requires_grad) return;
    grad_buffer(loss)->data[0] += seed;
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& n = m_nodes[i];
        if (!n.backward || !n.grad_ready) continue;
        n.backward(*this, n.grad);
    }
}

// ---------------------------------------------------------------------------
// Linear algebra

Var linear(Var x, Var w, std::optional<Var> bias) {
    check_same_tape(x, w);
    const Matrix& xv = x.value();
    const Matrix& wv = w.value();
    require(xv.cols == wv.cols, "linear: input " + shape_str(xv) + " vs weight " + shape_str(wv));
    if (bias) require(bias->value().rows == 1 && bias->value().cols == wv.rows, "linear: bias shape");

    const auto& k = kernels::active();
    const std::size_t r = xv.rows, in = xv.cols, out = wv.rows;
    Matrix y(r, out);
    for (std::size_t o = 0; o < out; ++o) {
        const double* wrow = wv.data.data() + o * in;
        const double b = bias ? bias->value().data[o] : 0.0;
        for (std::size_t i = 0; i < r; ++i) y.data[i * out + o] = k.dot(xv.data.data() + i * in, wrow, in) + b;
    }

    std::vector<Var> inputs{x, w};
    if (bias) inputs.push_back(*bias);
    return x.tape().push(std::move(y), inputs, [x, w, bias, r, in, out](Tape& t, const Matrix& g) {
        const auto& k = kernels::active();
        const Matrix& xv = x.value();
        const Matrix& wv = w.value();
        if (Matrix* gx = t.grad_buffer(x)) {
            for (std::size_t o = 0; o < out; ++o)
                for (std::size_t i = 0; i < r; ++i)
                    k.axpy(g.data[i * out + o], wv.data.data() + o * in, gx->data.data() + i * in, in);
        }
        if (Matrix* gw = t.grad_buffer(w)) {
            for (std::size_t o = 0; o < out; ++o)
                for (std::size_t i = 0; i < r; ++i)
                    k.axpy(g.data[i * out + o], xv.data.data() + i * in, gw->data.data() + o * in, in);
        }
        if (bias) {
            if (Matrix* gb = t.grad_buffer(*bias)) {
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t o = 0; o < out; ++o) gb->data[o] += g.data[i * out + o];
            }
        }
    });
}

Var matmul_nt(Var a, Var b) { return linear(a, b); }

Var matmul(Var a, Var b) {
    check_same_tape(a, b);
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    require(av.cols == bv.rows, "matmul: " + shape_str(av) + " x " + shape_str(bv));
    const auto& k = kernels::active();
    const std::size_t r = av.rows, inner = av.cols, c = bv.cols;
    Matrix y(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t t = 0; t < inner; ++t)
            k.axpy(av.data[i * inner + t], bv.data.data() + t * c, y.data.data() + i * c, c);

    return a.tape().push(std::move(y), {a, b}, [a, b, r, inner, c](Tape& t, const Matrix& g) {
        const auto& k = kernels::active();
        const Matrix& av = a.value();
        const Matrix& bv = b.value();
        if (Matrix* ga = t.grad_buffer(a)) {
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t s = 0; s < inner; ++s)
                    ga->data[i * inner + s] += k.dot(g.data.data() + i * c, bv.data.data() + s * c, c);
        }
        if (Matrix* gb = t.grad_buffer(b)) {
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t s = 0; s < inner; ++s)
                    k.axpy(av.data[i * inner + s], g.data.data() + i * c, gb->data.data() + s * c, c);
        }
    });
}

// ---------------------------------------------------------------------------
// Elementwise

Var add(Var a, Var b) {
    check_same_tape(a, b);
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    require(av.same_shape(bv), "add: " + shape_str(av) + " + " + shape_str(bv));
    Matrix y = av;
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] += bv.data[i];
    return a.tape().push(std::move(y), {a, b}, [a, b](Tape& t, const Matrix& g) {
        for (Var v : {a, b})
            if (Matrix* gv = t.grad_buffer(v))
                for (std::size_t i = 0; i < g.size(); ++i) gv->data[i] += g.data[i];
    });
}

Var mul(Var a, Var b) {
    check_same_tape(a, b);
    const Matrix& av = a.value();
    const Matrix& bv = b.value();
    require(av.same_shape(bv), "mul: " + shape_str(av) + " * " + shape_str(bv));
    Matrix y = av;
    for (std::size_t i = 0; i < y.size(); ++i) y.data[i] *= bv.data[i];
    return a.tape().push(std::move(y), {a, b}, [a, b](Tape& t, const Matrix& g) {
        const Matrix& av = a.value();
        const Matrix& bv = b.value();
        if (Matrix* ga = t.grad_buffer(a))
            for (std::size_t i = 0; i < g.size(); ++i) ga->data[i] += g.data[i] * bv.data[i];
        if (Matrix* gb = t.grad_buffer(b))
            for (std::size_t i = 0; i < g.size(); ++i) gb->data[i] += g.data[i] * av.data[i];
    });
}

Var scale(Var a, double factor) {
    Matrix y = a.value();
    for (double& v : y.data) v *= factor;
    return a.tape().push(std::move(y), {a}, [a, factor](Tape& t, const Matrix& g) {
        if (Matrix* ga = t.grad_buffer(a))
            for (std::size_t i = 0; i < g.size(); ++i) ga->data[i] += factor * g.data[i];
    });
}

Var sum(Var a) {
    double acc = 0.0;
    for (double v : a.value().data) acc += v;
    return a.tape().push(Matrix(1, 1, acc), {a}, [a](Tape& t, const Matrix& g) {
        if (Matrix* ga = t.grad_buffer(a))
            for (double& v : ga->data) v += g.data[0];
    });
}

Var relu(Var x) {
    Matrix y = x.value();
    for (double& v : y.data) v = v > 0.0 ? v : 0.0;
    return x.tape().push(std::move(y), {x}, [x](Tape& t, const Matrix& g) {
        const Matrix& xv = x.value();
        if (Matrix* gx = t.grad_buffer(x))
            for (std::size_t i = 0; i < g.size(); ++i)
                if (xv.data[i] > 0.0) gx->data[i] += g.data[i];
    });
}

Var sigmoid(Var x) {
    Matrix y = x.value();
    for (double& v : y.data) v = 1.0 / (1.0 + std::exp(-v));
    auto out = std::make_shared<Matrix>(y);
    return x.tape().push(std::move(y), {x}, [x, out](Tape& t, const Matrix& g) {
        if (Matrix* gx = t.grad_buffer(x))
            for (std::size_t i = 0; i < g.size(); ++i)
                gx->data[i] += g.data[i] * out->data[i] * (1.0 - out->data[i]);
    });
}

Var gelu(Var x) {
    Matrix y = x.value();
    for (double& v : y.data) v = 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2));
    return x.tape().push(std::move(y), {x}, [x](Tape& t, const Matrix& g) {
        const Matrix& xv = x.value();
        if (Matrix* gx = t.grad_buffer(x)) {
            const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double v = xv.data[i];
                const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
                const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
                gx->data[i] += g.data[i] * (cdf + v * pdf);
            }
        }
    });
}

Var softmax_rows(Var x) {
    const Matrix& xv = x.value();
    Matrix y(xv.rows, xv.cols);
    for (std::size_t i = 0; i < xv.rows; ++i) {
        const auto in = xv.row(i);
        auto out = y.row(i);
        const double mx = *std::max_element(in.begin(), in.end());
        double z = 0.0;
        for (std::size_t j = 0; j < in.size(); ++j) {
            out[j] = std::exp(in[j] - mx);
            z += out[j];
        }
        for (double& v : out) v /= z;
    }
    auto probs = std::make_shared<Matrix>(y);
    return x.tape().push(std::move(y), {x}, [x, probs](Tape& t, const Matrix& g) {
        Matrix* gx = t.grad_buffer(x);
        if (!gx) return;
        const Matrix& p = *probs;
        for (std::size_t i = 0; i < p.rows; ++i) {
            double dotgp = 0.0;
            for (std::size_t j = 0; j < p.cols; ++j) dotgp += g(i, j) * p(i, j);
            for (std::size_t j = 0; j < p.cols; ++j) (*gx)(i, j) += p(i, j) * (g(i, j) - dotgp);
        }
    });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
    check_same_tape(x, gamma);
    check_same_tape(x, beta);
    const Matrix& xv = x.value();
    const Matrix& gv = gamma.value();
    const Matrix& bv = beta.value();
    require(gv.rows == 1 && gv.cols == xv.cols && bv.same_shape(gv), "layer_norm: scale/shift shape");
    const std::size_t r = xv.rows, c = xv.cols;

    auto xhat = std::make_shared<Matrix>(r, c);
    auto rstd = std::make_shared<std::vector<double>>(r);
    Matrix y(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        const auto in = xv.row(i);
        double mean = 0.0;
        for (double v : in) mean += v;
        mean /= static_cast<double>(c);
        double var = 0.0;
        for (double v : in) var += (v - mean) * (v - mean);
        var /= static_cast<double>(c);
        const double inv = 1.0 / std::sqrt(var + eps);
        (*rstd)[i] = inv;
        for (std::size_t j = 0; j < c; ++j) {
            const double h = (in[j] - mean) * inv;
            (*xhat)(i, j) = h;
            y(i, j) = gv.data[j] * h + bv.data[j];
        }
    }
    return x.tape().push(std::move(y), {x, gamma, beta}, [x, gamma, beta, xhat, rstd, r, c](Tape& t, const Matrix& g) {
        const Matrix& gv = gamma.value();
        if (Matrix* gg = t.grad_buffer(gamma))
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) gg->data[j] += g(i, j) * (*xhat)(i, j);
        if (Matrix* gb = t.grad_buffer(beta))
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) gb->data[j] += g(i, j);
        if (Matrix* gx = t.grad_buffer(x)) {
            std::vector<double> dh(c);
            for (std::size_t i = 0; i < r; ++i) {
                double mean_dh = 0.0, mean_dh_h = 0.0;
                for (std::size_t j = 0; j < c; ++j) {
                    dh[j] = g(i, j) * gv.data[j];
                    mean_dh += dh[j];
                    mean_dh_h += dh[j] * (*xhat)(i, j);
                }
                mean_dh /= static_cast<double>(c);
                mean_dh_h /= static_cast<double>(c);
                for (std::size_t j = 0; j < c; ++j)
                    (*gx)(i, j) += (*rstd)[i] * (dh[j] - mean_dh - (*xhat)(i, j) * mean_dh_h);
            }
        }
    });
}

// ---------------------------------------------------------------------------
// Shape plumbing

Var slice_rows(Var x, std::size_t start, std::size_t count) {
    const Matrix& xv = x.value();
    require(start + count <= xv.rows, "slice_rows out of range");
    const std::size_t c = xv.cols;
    Matrix y(count, c,
             std::vector<double>(xv.data.begin() + static_cast<std::ptrdiff_t>(start * c),
                                 xv.data.begin() + static_cast<std::ptrdiff_t>((start + count) * c)));
    return x.tape().push(std::move(y), {x}, [x, start, c](Tape& t, const Matrix& g) {
        if (Matrix* gx = t.grad_buffer(x))
            for (std::size_t i = 0; i < g.size(); ++i) gx->data[start * c + i] += g.data[i];
    });
}

Var slice_cols(Var x, std::size_t start, std::size_t count) {
    const Matrix& xv = x.value();
    require(start + count <= xv.cols, "slice_cols out of range");
    Matrix y(xv.rows, count);
    for (std::size_t i = 0; i < xv.rows; ++i)
        for (std::size_t j = 0; j < count; ++j) y(i, j) = xv(i, start + j);
    return x.tape().push(std::move(y), {x}, [x, start, count](Tape& t, const Matrix& g) {
        if (Matrix* gx = t.grad_buffer(x))
            for (std::size_t i = 0; i < g.rows; ++i)
                for (std::size_t j = 0; j < count; ++j) (*gx)(i, start + j) += g(i, j);
    });
}

Var concat_rows(const std::vector<Var>& parts) {
    require(!parts.empty(), "concat_rows of nothing");
    const std::size_t c = parts.front().cols();
    std::size_t rows = 0;
    for (Var p : parts) {
        check_same_tape(parts.front(), p);
        require(p.cols() == c, "concat_rows: column mismatch");
        rows += p.rows();
    }
    Matrix y(rows, c);
    std::size_t offset = 0;
    for (Var p : parts) {
        const Matrix& pv = p.value();
        std::copy(pv.data.begin(), pv.data.end(), y.data.begin() + static_cast<std::ptrdiff_t>(offset));
        offset += pv.size();
    }
    return parts.front().tape().push(std::move(y), parts, [parts](Tape& t, const Matrix& g) {
        std::size_t offset = 0;
        for (Var p : parts) {
            const std::size_t n = p.value().size();
            if (Matrix* gp = t.grad_buffer(p))
                for (std::size_t i = 0; i < n; ++i) gp->data[i] += g.data[offset + i];
            offset += n;
        }
    });
}

Var concat_cols(const std::vector<Var>& parts) {
    require(!parts.empty(), "concat_cols of nothing");
    const std::size_t r = parts.front().rows();
    std::size_t cols = 0;
    for (Var p : parts) {
        check_same_tape(parts.front(), p);
        require(p.rows() == r, "concat_cols: row mismatch");
        cols += p.cols();
    }
    Matrix y(r, cols);
    std::size_t offset = 0;
    for (Var p : parts) {
        const Matrix& pv = p.value();
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < pv.cols; ++j) y(i, offset + j) = pv(i, j);
        offset += pv.cols;
    }
    return parts.front().tape().push(std::move(y), parts, [parts](Tape& t, const Matrix& g) {
        std::size_t offset = 0;
        for (Var p : parts) {
            const std::size_t pc = p.value().cols;
            if (Matrix* gp = t.grad_buffer(p))
                for (std::size_t i = 0; i < g.rows; ++i)
                    for (std::size_t j = 0; j < pc; ++j) (*gp)(i, j) += g(i, offset + j);
            offset += pc;
        }
    });
}

Var reshape(Var x, std::size_t rows, std::size_t cols) {
    const Matrix& xv = x.value();
    require(rows * cols == xv.size(), "reshape " + shape_str(xv) + " to " + std::to_string(rows) + "x" +
                                          std::to_string(cols));
    Matrix y(rows, cols, xv.data);
    return x.tape().push(std::move(y), {x}, [x](Tape& t, const Matrix& g) {
        if (Matrix* gx = t.grad_buffer(x))
            for (std::size_t i = 0; i < g.size(); ++i) gx->data[i] += g.data[i];
    });
}

Var gather(Var x, std::shared_ptr<const std::vector<std::size_t>> index, std::size_t rows, std::size_t cols) {
    const Matrix& xv = x.value();
    require(index->size() == rows * cols, "gather: index size");
    Matrix y(rows, cols);
    for (std::size_t i = 0; i < index->size(); ++i) {
        const std::size_t src = (*index)[i];
        require(src < xv.size(), "gather: index out of range");
        y.data[i] = xv.data[src];
    }
    return x.tape().push(std::move(y), {x}, [x, index](Tape& t, const Matrix& g) {
        if (Matrix* gx = t.grad_buffer(x))
            for (std::size_t i = 0; i < index->size(); ++i) gx->data[(*index)[i]] += g.data[i];
    });
}

Var col_mean(Var x) {
    const Matrix& xv = x.value();
    require(xv.rows > 0, "col_mean of an empty matrix");
    Matrix y(1, xv.cols);
    for (std::size_t i = 0; i < xv.rows; ++i)
        for (std::size_t j = 0; j < xv.cols; ++j) y.data[j] += xv(i, j);
    const double inv = 1.0 / static_cast<double>(xv.rows);
    for (double& v : y.data) v *= inv;
    return x.tape().push(std::move(y), {x}, [x, inv](Tape& t, const Matrix& g) {
        if (Matrix* gx = t.grad_buffer(x))
            for (std::size_t i = 0; i < gx->rows; ++i)
                for (std::size_t j = 0; j < gx->cols; ++j) (*gx)(i, j) += inv * g.data[j];
    });
}

Var scale_cols(Var x, Var s) {
    check_same_tape(x, s);
    const Matrix& xv = x.value();
    const Matrix& sv = s.value();
    require(sv.rows == 1 && sv.cols == xv.cols, "scale_cols: " + shape_str(sv) + " for " + shape_str(xv));
    Matrix y = xv;
    for (std::size_t i = 0; i < y.rows; ++i)
        for (std::size_t j = 0; j < y.cols; ++j) y(i, j) *= sv.data[j];
    return x.tape().push(std::move(y), {x, s}, [x, s](Tape& t, const Matrix& g) {
        const Matrix& xv = x.value();
        const Matrix& sv = s.value();
        if (Matrix* gx = t.grad_buffer(x))
            for (std::size_t i = 0; i < g.rows; ++i)
                for (std::size_t j = 0; j < g.cols; ++j) (*gx)(i, j) += g(i, j) * sv.data[j];
        if (Matrix* gs = t.grad_buffer(s))
            for (std::size_t i = 0; i < g.rows; ++i)
                for (std::size_t j = 0; j < g.cols; ++j) gs->data[j] += g(i, j) * xv(i, j);
    });
}

Var cross_entropy(Var logits, std::size_t label) {
    const Matrix& z = logits.value();
    require(z.rows == 1, "cross_entropy expects a single row of logits");
    if (label >= z.cols)
        raise(Errc::LabelOutOfRange, "label " + std::to_string(label) + " with " + std::to_string(z.cols) + " classes");
    const double mx = *std::max_element(z.data.begin(), z.data.end());
    double total = 0.0;
    for (double v : z.data) total += std::exp(v - mx);
    const double lse = mx + std::log(total);
    auto probs = std::make_shared<std::vector<double>>(z.cols);
    for (std::size_t j = 0; j < z.cols; ++j) (*probs)[j] = std::exp(z.data[j] - lse);
    return logits.tape().push(Matrix(1, 1, lse - z.data[label]), {logits}, [logits, label, probs](Tape& t, const Matrix& g) {
        if (Matrix* gz = t.grad_buffer(logits))
            for (std::size_t j = 0; j < probs->size(); ++j)
                gz->data[j] += g.data[0] * ((*probs)[j] - (j == label ? 1.0 : 0.0));
    });
}

} // namespace gafvit::autograd
