#include "doctest.h"

#include "gafvit/autograd.hpp"
#include "gafvit/error.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace gafvit;
namespace ag = gafvit::autograd;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1, 1);
    Matrix m(r, c);
    for (double& v : m.data) v = u(rng);
    return m;
}

// Checks d sum(R * f(x)) / dx against central differences for a unary op.
void check_unary(const std::function<ag::Var(ag::Var)>& op, Matrix x, double tol = 1e-7) {
    std::mt19937_64 rng(99);
    ag::Tape probe(false);
    const Matrix out_shape = op(probe.constant(x)).value();
    const Matrix r = random_matrix(out_shape.rows, out_shape.cols, rng);
    auto f = [&](const Matrix& in) {
        ag::Tape t(false);
        return ag::sum(ag::mul(op(t.constant(in)), t.constant(r))).item();
    };
    ag::Tape tape;
    ag::Var v = tape.variable(x);
    tape.backward(ag::sum(ag::mul(op(v), tape.constant(r))));
    const Matrix g = tape.grad(v);
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        Matrix up = x, down = x;
        up.data[i] += 1e-6;
        down.data[i] -= 1e-6;
        const double numeric = (f(up) - f(down)) / 2e-6;
        CHECK(g.data[i] == doctest::Approx(numeric).epsilon(tol).scale(1.0));
    }
}

} // namespace

TEST_CASE("gradient of sum is ones") {
    ag::Tape t;
    ag::Var p = t.variable(Matrix(2, 3, {1, 2, 3, 4, 5, 6}));
    t.backward(ag::sum(p));
    for (double g : t.grad(p).data) CHECK(g == 1.0);
}

TEST_CASE("gradient of sum of squares") {
    ag::Tape t;
    ag::Var p = t.variable(Matrix(1, 2, {1, 2}));
    t.backward(ag::sum(ag::mul(p, p)));
    CHECK(t.grad(p).data == std::vector<double>{2, 4});
}

TEST_CASE("unreachable variables get zero gradient") {
    ag::Tape t;
    ag::Var a = t.variable(Matrix(1, 2, {1, 2}));
    ag::Var b = t.variable(Matrix(1, 2, {3, 4}));
    t.backward(ag::sum(a));
    CHECK(t.grad(b).data == std::vector<double>{0, 0});
}

TEST_CASE("backward rejects non-scalar losses") {
    ag::Tape t;
    ag::Var a = t.variable(Matrix(1, 2, {1, 2}));
    CHECK_THROWS_AS(t.backward(a), Error);
}

TEST_CASE("parameters accumulate gradients across tapes") {
    ag::Parameter p{"p", Matrix(1, 2, {1, 2}), Matrix(1, 2), false};
    for (int i = 0; i < 2; ++i) {
        ag::Tape t;
        t.backward(ag::sum(t.param(p)), 0.5);
    }
    CHECK(p.grad.data == std::vector<double>{1, 1});
    ag::Parameter frozen{"f", Matrix(1, 2, {1, 2}), Matrix(1, 2), true};
    ag::Tape t;
    t.backward(ag::sum(ag::mul(t.param(frozen), t.param(p))));
    CHECK(frozen.grad.data == std::vector<double>{0, 0});
}

TEST_CASE("shape mismatches throw") {
    ag::Tape t;
    ag::Var a = t.constant(Matrix(2, 3));
    ag::Var b = t.constant(Matrix(3, 2));
    CHECK_THROWS_AS(ag::add(a, b), Error);
    CHECK_THROWS_AS(ag::matmul_nt(a, b), Error);
    CHECK_THROWS_AS(ag::reshape(a, 4, 2), Error);
}

TEST_CASE("matmul variants") {
    ag::Tape t;
    ag::Var a = t.constant(Matrix(2, 2, {1, 2, 3, 4}));
    ag::Var b = t.constant(Matrix(2, 2, {5, 6, 7, 8}));
    CHECK(ag::matmul(a, b).value().data == std::vector<double>{19, 22, 43, 50});
    CHECK(ag::matmul_nt(a, b).value().data == std::vector<double>{17, 23, 39, 53});
    ag::Var bias = t.constant(Matrix(1, 2, {1, -1}));
    CHECK(ag::linear(a, b, bias).value().data == std::vector<double>{18, 22, 40, 52});
}

TEST_CASE("op gradients match finite differences") {
    std::mt19937_64 rng(7);
    const Matrix x = random_matrix(3, 4, rng);
    const Matrix w = random_matrix(5, 4, rng);
    const Matrix b = random_matrix(1, 5, rng);
    const Matrix g = random_matrix(1, 4, rng);
    const Matrix s = random_matrix(1, 4, rng);
    SUBCASE("linear") {
        check_unary([&](ag::Var v) { return ag::linear(v, v.tape().constant(w), v.tape().constant(b)); }, x);
    }
    SUBCASE("linear weight") {
        check_unary([&](ag::Var v) { return ag::linear(v.tape().constant(x), v); }, w);
    }
    const Matrix rhs = random_matrix(4, 2, rng);
    SUBCASE("matmul") { check_unary([&](ag::Var v) { return ag::matmul(v, v.tape().constant(rhs)); }, x); }
    SUBCASE("relu") { check_unary([](ag::Var v) { return ag::relu(v); }, x); }
    SUBCASE("sigmoid") { check_unary([](ag::Var v) { return ag::sigmoid(v); }, x); }
    SUBCASE("gelu") { check_unary([](ag::Var v) { return ag::gelu(v); }, x); }
    SUBCASE("softmax_rows") { check_unary([](ag::Var v) { return ag::softmax_rows(v); }, x); }
    SUBCASE("layer_norm input") {
        check_unary([&](ag::Var v) {
            return ag::layer_norm(v, v.tape().constant(g), v.tape().constant(s), 1e-9);
        }, x);
    }
    SUBCASE("layer_norm gamma") {
        check_unary([&](ag::Var v) { return ag::layer_norm(v.tape().constant(x), v, v.tape().constant(s), 1e-9); }, g);
    }
    SUBCASE("slices and concat") {
        check_unary([](ag::Var v) { return ag::concat_cols({ag::slice_cols(v, 2, 2), ag::slice_cols(v, 0, 1)}); }, x);
        check_unary([](ag::Var v) { return ag::concat_rows({ag::slice_rows(v, 2, 1), ag::slice_rows(v, 0, 2)}); }, x);
    }
    SUBCASE("reshape and gather") {
        auto idx = std::make_shared<std::vector<std::size_t>>(std::vector<std::size_t>{3, 3, 0, 11, 5, 7});
        check_unary([&](ag::Var v) { return ag::gather(ag::reshape(v, 2, 6), idx, 2, 3); }, x);
    }
    SUBCASE("col_mean and scale_cols") {
        check_unary([](ag::Var v) { return ag::scale_cols(v, ag::sigmoid(ag::col_mean(v))); }, x);
    }
    SUBCASE("cross_entropy") {
        check_unary([](ag::Var v) { return ag::cross_entropy(ag::slice_rows(v, 0, 1), 2); }, x);
    }
}

TEST_CASE("cross_entropy values") {
    ag::Tape t;
    CHECK(ag::cross_entropy(t.constant(Matrix(1, 4)), 3).item() == doctest::Approx(std::log(4.0)).epsilon(1e-15));
    const double big = ag::cross_entropy(t.constant(Matrix(1, 4, {1000, 0, 0, 0})), 0).item();
    CHECK(std::isfinite(big));
    CHECK(big < 1e-300);
    std::mt19937_64 rng(8);
    for (int i = 0; i < 20; ++i) {
        Matrix l = random_matrix(1, 4, rng);
        for (double& v : l.data) v *= 10;
        double z = 0;
        for (double v : l.data) z += std::exp(v);
        const std::size_t label = static_cast<std::size_t>(i % 4);
        const double naive = -std::log(std::exp(l.data[label]) / z);
        CHECK(std::abs(ag::cross_entropy(t.constant(l), label).item() - naive) < 1e-9);
    }
    try {
        ag::cross_entropy(t.constant(Matrix(1, 4)), 4);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::LabelOutOfRange);
    }
}
