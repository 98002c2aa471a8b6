#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "asr/errors.hpp"
#include "asr/grad_check.hpp"
#include "asr/ops.hpp"
#include "test_helpers.hpp"

using namespace asr;

TEST_CASE("tensor init: zeros, constant, shape errors") {
    auto z = Tensor::zeros({2, 2});
    CHECK(z->data == std::vector<double>{0, 0, 0, 0});

    auto c = Tensor::constant({3}, 1.5);
    CHECK(c->data == std::vector<double>{1.5, 1.5, 1.5});

    CHECK_THROWS_AS(Tensor::zeros({0, 2}), ShapeError);
    CHECK_THROWS_AS(Tensor::zeros({-1}), ShapeError);
    CHECK_THROWS_AS(Tensor::from({2, 2}, {1.0, 2.0}), ShapeError);
}

TEST_CASE("tensor init: uniform is deterministic under the seed") {
    Rng a(7), b(7);
    auto x = Tensor::uniform({4}, 0.0, 1.0, a);
    auto y = Tensor::uniform({4}, 0.0, 1.0, b);
    CHECK(x->data == y->data);
    for (double v : x->data) {
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
    CHECK_THROWS_AS(Tensor::uniform({4}, 1.0, 0.0, a), ContractError);
}

TEST_CASE("tensor init: scaled_uniform bounds follow fan-in") {
    Rng rng(3);
    auto t = Tensor::scaled_uniform({100}, 16, rng);
    for (double v : t->data) CHECK(std::fabs(v) <= 0.25);
}

TEST_CASE("matmul forward: identity and hand arithmetic") {
    Graph g;
    auto eye = Tensor::from({2, 2}, {1, 0, 0, 1});
    auto x = Tensor::from({2, 2}, {3, 4, 5, 6});
    CHECK(ops::matmul(g, eye, x)->data == x->data);

    auto a = Tensor::from({1, 2}, {1, 2});
    auto b = Tensor::from({2, 1}, {3, 4});
    CHECK(ops::matmul(g, a, b)->data == std::vector<double>{11});

    auto bad = Tensor::from({3, 1}, {1, 2, 3});
    CHECK_THROWS_AS(ops::matmul(g, a, bad), ShapeError);
}

TEST_CASE("matmul gradient vs finite differences") {
    Rng rng(11);
    auto a = test::random_tensor({3, 4}, rng);
    auto b = test::random_tensor({4, 2}, rng);
    const double err = grad_check(
        [&](Graph& g) { return ops::sum(g, ops::matmul(g, a, b)); }, {a, b}, 1e-6);
    CHECK(err < 1e-6);
}

TEST_CASE("elementwise forward values") {
    Graph g;
    auto zero = Tensor::from({1}, {0.0});
    CHECK(ops::sigmoid(g, zero)->data[0] == doctest::Approx(0.5));

    auto clip_in = Tensor::from({2}, {25.0, -1.0});
    auto clipped = ops::relu_clip(g, clip_in, 20.0);
    CHECK(clipped->data[0] == 20.0);
    CHECK(clipped->data[1] == 0.0);

    auto a = Tensor::from({2}, {1.0, 2.0});
    auto b = Tensor::from({2}, {3.0, 5.0});
    CHECK(ops::add(g, a, b)->data == std::vector<double>{4, 7});
    CHECK(ops::sub(g, a, b)->data == std::vector<double>{-2, -3});
    CHECK(ops::mul(g, a, b)->data == std::vector<double>{3, 10});
    CHECK(ops::scale(g, a, 2.0)->data == std::vector<double>{2, 4});

    auto mismatched = Tensor::from({3}, {1.0, 2.0, 3.0});
    CHECK_THROWS_AS(ops::add(g, a, mismatched), ShapeError);

    auto nonpositive = Tensor::from({1}, {-0.5});
    CHECK_THROWS_AS(ops::log(g, nonpositive), DomainError);
}

TEST_CASE("elementwise gradients vs finite differences") {
    Rng rng(23);
    auto x = test::random_tensor({3, 3}, rng, 0.1, 2.0);

    SUBCASE("tanh at 0.3") {
        auto p = Tensor::from({1}, {0.3}, true);
        const double err =
            grad_check([&](Graph& g) { return ops::sum(g, ops::tanh(g, p)); }, {p}, 1e-5);
        CHECK(err < 1e-8);
    }
    SUBCASE("sigmoid, exp, log, mul chain") {
        const double err = grad_check(
            [&](Graph& g) {
                auto y = ops::mul(g, ops::sigmoid(g, x), ops::log(g, x));
                return ops::sum(g, ops::exp(g, ops::scale(g, y, 0.3)));
            },
            {x}, 1e-5);
        CHECK(err < 1e-6);
    }
    SUBCASE("scale_by and add_bias") {
        auto s = Tensor::from({1}, {0.7}, true);
        auto bias = test::random_tensor({1, 3}, rng);
        const double err = grad_check(
            [&](Graph& g) {
                return ops::sum(g, ops::add_bias(g, ops::scale_by(g, x, s), bias));
            },
            {x, s, bias}, 1e-5);
        CHECK(err < 1e-6);
    }
    SUBCASE("slicing and reversal") {
        const double err = grad_check(
            [&](Graph& g) {
                auto r = ops::row(g, ops::reverse_rows(g, x), 1);
                auto c = ops::col(g, x, 2);
                return ops::add(g, ops::sum(g, r), ops::sum(g, ops::mul(g, c, c)));
            },
            {x}, 1e-5);
        CHECK(err < 1e-6);
    }
    SUBCASE("rowwise_dot, scale_rows, concat_cols") {
        auto y = test::random_tensor({3, 3}, rng);
        auto s = test::random_tensor({3, 1}, rng);
        const double err = grad_check(
            [&](Graph& g) {
                auto d = ops::rowwise_dot(g, x, y);
                auto scaled = ops::scale_rows(g, y, s);
                return ops::sum(g, ops::concat_cols(g, {d, scaled}));
            },
            {x, y, s}, 1e-5);
        CHECK(err < 1e-6);
    }
}

TEST_CASE("softmax: symmetry, ratios, shift invariance") {
    Graph g;
    auto equal = Tensor::from({3}, {0.4, 0.4, 0.4});
    auto sm = ops::softmax(g, equal);
    for (double v : sm->data) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));

    const double ln2 = std::log(2.0);
    auto ratios = ops::softmax(g, Tensor::from({3}, {2 * ln2, ln2, ln2}));
    CHECK(ratios->data[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(ratios->data[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(ratios->data[2] == doctest::Approx(0.25).epsilon(1e-12));

    Rng rng(5);
    auto v = test::random_tensor({6}, rng, -3.0, 3.0, false);
    auto shifted = Tensor::zeros({6});
    for (int i = 0; i < 6; ++i) shifted->data[i] = v->data[i] + 10.0;
    auto s1 = ops::softmax(g, v);
    auto s2 = ops::softmax(g, shifted);
    double total = 0.0;
    for (int i = 0; i < 6; ++i) {
        CHECK(std::fabs(s1->data[i] - s2->data[i]) < 1e-12);
        CHECK(s1->data[i] > 0.0);
        CHECK(s1->data[i] < 1.0);
        total += s1->data[i];
    }
    CHECK(std::fabs(total - 1.0) < 1e-12);

    CHECK_THROWS_AS(ops::softmax(g, Tensor::from({1, 1}, {})), ShapeError);
}

TEST_CASE("log_softmax: values, consistency, gradient") {
    Graph g;
    auto two = ops::log_softmax(g, Tensor::from({2}, {0.0, 0.0}));
    CHECK(two->data[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
    CHECK(two->data[1] == doctest::Approx(-std::log(2.0)).epsilon(1e-15));

    Rng rng(9);
    auto v = test::random_tensor({7}, rng, -4.0, 4.0, false);
    auto ls = ops::log_softmax(g, v);
    auto sm = ops::softmax(g, v);
    double exp_sum = 0.0;
    for (int i = 0; i < 7; ++i) {
        CHECK(std::fabs(std::exp(ls->data[i]) - sm->data[i]) < 1e-12);
        exp_sum += std::exp(ls->data[i]);
    }
    CHECK(std::fabs(exp_sum - 1.0) < 1e-12);

    auto p = test::random_tensor({2, 5}, rng, -2.0, 2.0);
    auto weights = test::random_tensor({2, 5}, rng, 0.1, 1.0, false);
    const double err = grad_check(
        [&](Graph& g2) { return ops::sum(g2, ops::mul(g2, ops::log_softmax(g2, p), weights)); },
        {p}, 1e-5);
    CHECK(err < 1e-6);

    const double err_sm = grad_check(
        [&](Graph& g2) { return ops::sum(g2, ops::mul(g2, ops::softmax(g2, p), weights)); }, {p},
        1e-5);
    CHECK(err_sm < 1e-6);
}

TEST_CASE("masked softmax zeroes masked entries and keeps gradients inside the mask") {
    Graph g;
    auto v = Tensor::from({1, 3}, {1.0, 5.0, 1.0}, true);
    auto a = ops::masked_softmax(g, v, {true, false, true});
    CHECK(a->data[1] == 0.0);
    CHECK(a->data[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a->data[2] == doctest::Approx(0.5).epsilon(1e-12));

    Rng rng(31);
    auto p = test::random_tensor({1, 3}, rng);
    auto w = Tensor::from({1, 3}, {0.3, 0.9, 0.4}, false);
    const double err = grad_check(
        [&](Graph& g2) {
            return ops::sum(g2, ops::mul(g2, ops::masked_softmax(g2, p, {true, true, false}), w));
        },
        {p}, 1e-5);
    CHECK(err < 1e-6);
    CHECK_THROWS_AS(ops::masked_softmax(g, v, {false, false, false}), ContractError);
}

TEST_CASE("backward: sum gives ones, quadratic gives 2x, accumulation stacks") {
    auto x = Tensor::from({2, 3}, {1, 2, 3, 4, 5, 6}, true);
    {
        Graph g;
        auto loss = ops::sum(g, x);
        g.backward(loss);
    }
    for (double gv : x->grad) CHECK(gv == 1.0);

    auto y = Tensor::from({2}, {1.0, 2.0}, true);
    {
        Graph g;
        auto loss = ops::sum(g, ops::mul(g, y, y));
        g.backward(loss);
        CHECK(y->grad[0] == doctest::Approx(2.0));
        CHECK(y->grad[1] == doctest::Approx(4.0));
        // second backward without zeroing accumulates
        g.backward(loss);
        CHECK(y->grad[0] == doctest::Approx(4.0));
        CHECK(y->grad[1] == doctest::Approx(8.0));
    }

    Graph g;
    auto not_scalar = ops::mul(g, y, y);
    CHECK_THROWS_AS(g.backward(not_scalar), ContractError);
}

TEST_CASE("graph invariants: input ids precede nodes, reverse visit order") {
    Rng rng(17);
    auto a = test::random_tensor({2, 2}, rng);
    auto b = test::random_tensor({2, 2}, rng);
    Graph g;
    auto loss = ops::sum(g, ops::mul(g, ops::add(g, a, b), a));
    g.backward(loss);

    for (std::size_t i = 0; i < g.nodes().size(); ++i) {
        for (std::size_t input : g.nodes()[i].inputs) CHECK(input < i);
    }
    const auto& order = g.last_backward_order();
    REQUIRE(order.size() == g.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        CHECK(order[i] == g.nodes()[g.size() - 1 - i].op);
    }
}

TEST_CASE("grad_check catches a deliberately wrong backward") {
    auto x = Tensor::from({3}, {0.4, -0.2, 0.9}, true);

    // Mutant op: forward is x*x, backward claims d/dx = 3x instead of 2x.
    auto mutant_square = [&](Graph& g) {
        auto out = Tensor::zeros(x->shape);
        for (std::size_t i = 0; i < x->data.size(); ++i) out->data[i] = x->data[i] * x->data[i];
        g.append("mutant_square", {x}, out, [out, xp = x] {
            xp->ensure_grad();
            for (std::size_t i = 0; i < xp->data.size(); ++i) {
                xp->grad[i] += 3.0 * xp->data[i] * out->grad[i];
            }
        });
        return ops::sum(g, out);
    };
    CHECK(grad_check(mutant_square, {x}, 1e-5) > 1e-2);

    // Sanity: the honest version passes at high precision.
    const double err =
        grad_check([&](Graph& g) { return ops::sum(g, ops::mul(g, x, x)); }, {x}, 1e-5);
    CHECK(err < 1e-9);

    // f = sum(p) has exact gradient one.
    auto p = Tensor::from({4}, {1, 2, 3, 4}, true);
    CHECK(grad_check([&](Graph& g) { return ops::sum(g, p); }, {p}, 1e-5) < 1e-9);
}

TEST_CASE("determinism: same seed, same graph, same gradients") {
    auto build = [](std::uint64_t seed) {
        Rng rng(seed);
        auto a = Tensor::uniform({4, 4}, -1, 1, rng, true);
        auto b = Tensor::uniform({4, 4}, -1, 1, rng, true);
        Graph g;
        auto loss = ops::sum(g, ops::tanh(g, ops::matmul(g, a, b)));
        g.backward(loss);
        return std::make_tuple(a->data, a->grad, loss->data[0]);
    };
    CHECK(build(99) == build(99));
}
