#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "saddlecl/mlp.hpp"

#include <cmath>

using namespace saddlecl;

namespace {

MlpModel single_layer(const Matrix& w, const Vector& b, Activation act) {
    MlpModel m;
    m.layers.push_back({w, b, act});
    return m;
}

Matrix random_batch(int n, int d, Rng& rng) {
    Matrix x(n, d);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = gaussian(rng);
    return x;
}

Labels random_labels(int n, int c, Rng& rng) {
    Labels y(static_cast<std::size_t>(n));
    for (auto& v : y) v = static_cast<int>(rng_index(rng, static_cast<std::size_t>(c)));
    return y;
}

}  // namespace

TEST_CASE("identity layer passes the batch through") {
    MlpModel m = single_layer(Matrix::Identity(3, 3), Vector::Zero(3), Activation::Identity);
    Rng rng = make_rng(7);
    Matrix x = random_batch(4, 3, rng);
    Matrix logits = forward(m, x);
    CHECK((logits - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("relu clamps a negative pre-activation") {
    Matrix w(1, 1);
    w << 2.0;
    Vector b(1);
    b << 1.0;
    MlpModel m = single_layer(w, b, Activation::Relu);
    Matrix x(1, 1);
    x << -3.0;
    CHECK(forward(m, x)(0, 0) == 0.0);  // 2*(-3)+1 = -5 -> 0
}

TEST_CASE("forward matches the naive matmul oracle") {
    Rng rng = make_rng(42);
    MlpModel m = make_mlp({5, 8, 3}, rng);
    Matrix x = random_batch(6, 5, rng);
    Matrix got = forward(m, x);
    Matrix want = oracle::naive_forward(m, x);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("forward rejects a batch of the wrong width") {
    Rng rng = make_rng(1);
    MlpModel m = make_mlp({5, 3}, rng);
    Matrix x = random_batch(2, 4, rng);
    CHECK_THROWS_WITH_AS(forward(m, x), doctest::Contains("2x4"), std::invalid_argument);
}

TEST_CASE("uniform logits cost ln(c)") {
    MlpModel m = single_layer(Matrix::Zero(7, 4), Vector::Zero(7), Activation::Identity);
    Matrix x = Matrix::Ones(4, 4);
    Labels y{0, 3, 6, 2};
    CHECK(batch_loss(m, x, y) == std::log(7.0));
}

TEST_CASE("label out of range is a domain error") {
    MlpModel m = single_layer(Matrix::Zero(3, 2), Vector::Zero(3), Activation::Identity);
    Matrix x = Matrix::Ones(1, 2);
    CHECK_THROWS_AS(batch_loss(m, x, Labels{3}), std::domain_error);
    CHECK_THROWS_AS(batch_loss(m, x, Labels{-1}), std::domain_error);
}

TEST_CASE("parameter and input gradients match finite differences") {
    Rng rng = make_rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        MlpModel m = make_mlp({4, 6, 3}, rng);
        Matrix x = random_batch(5, 4, rng);
        Labels y = random_labels(5, 3, rng);
        auto rep_fd = oracle::fd_gradient_check(m, x, y, /*check_inputs=*/true);
        CAPTURE(rep);
        CHECK(rep_fd.failed == 0);
    }
}

TEST_CASE("weighted loss reduces to the mean-loss path") {
    Rng rng = make_rng(13);
    MlpModel m = make_mlp({4, 5, 3}, rng);
    Matrix x = random_batch(6, 4, rng);
    Labels y = random_labels(6, 3, rng);
    std::vector<double> w(6, 1.0 / 6.0);
    auto a = loss_and_grads(m, x, y, true);
    auto b = weighted_loss_and_grads(m, x, y, w, true);
    CHECK(a.loss == b.loss);
    CHECK((a.grads.input_grads - b.grads.input_grads).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("head slice trains only its logit columns") {
    Rng rng = make_rng(17);
    MlpModel m = make_mlp({4, 6}, rng);
    Matrix x = random_batch(3, 4, rng);
    Labels y{0, 1, 1};
    HeadSlice head{2, 2};
    auto res = loss_and_grads(m, x, y, false, head);
    // rows of the last-layer weight grad outside the head stay zero
    for (Eigen::Index r = 0; r < 6; ++r) {
        const double norm = res.grads.weight_grads[0].row(r).cwiseAbs().maxCoeff();
        if (r == 2 || r == 3)
            CHECK(norm > 0.0);
        else
            CHECK(norm == 0.0);
    }
}

TEST_CASE("apply_update arithmetic") {
    Matrix w(1, 1);
    w << 1.0;
    MlpModel m = single_layer(w, Vector::Zero(1), Activation::Identity);
    GradientBundle g;
    g.weight_grads.push_back((Matrix(1, 1) << 2.0).finished());
    g.bias_grads.push_back(Vector::Zero(1));

    SUBCASE("step 0 leaves the model bitwise intact") {
        MlpModel m2 = apply_update(m, g, 0.0);
        CHECK(models_equal(m, m2));
    }
    SUBCASE("p=1, g=2, step=0.5 lands on 0") {
        MlpModel m2 = apply_update(m, g, 0.5);
        CHECK(m2.layers[0].weight(0, 0) == 0.0);
    }
    SUBCASE("non-finite grads are rejected") {
        g.weight_grads[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(apply_update(m, g, 0.1), numeric_error);
    }
}

TEST_CASE("descent contracts a quadratic bowl") {
    // loss (p-3)^2, grad 2(p-3); closed form p_i = 3(1 - 0.8^i)
    double p = 0.0;
    MlpModel m = single_layer((Matrix(1, 1) << p).finished(), Vector::Zero(1), Activation::Identity);
    for (int i = 0; i < 100; ++i) {
        GradientBundle g;
        g.weight_grads.push_back((Matrix(1, 1) << 2.0 * (m.layers[0].weight(0, 0) - 3.0)).finished());
        g.bias_grads.push_back(Vector::Zero(1));
        apply_update_inplace(m, g, 0.1);
    }
    CHECK(std::abs(m.layers[0].weight(0, 0) - 3.0) < 1e-6);
}

TEST_CASE("clone_model is a deep, mutation-independent copy") {
    Rng rng = make_rng(23);
    MlpModel m = make_mlp({3, 4, 2}, rng);
    Matrix x = random_batch(2, 3, rng);

    MlpModel copy = clone_model(m);
    MlpModel copy2 = clone_model(copy);
    CHECK((forward(copy, x) - forward(m, x)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(models_equal(copy2, m));

    copy.layers[0].weight(0, 0) += 5.0;
    CHECK(m.layers[0].weight(0, 0) != copy.layers[0].weight(0, 0));
}

TEST_CASE("identical seeds give bitwise identical forward and backward") {
    auto build = [] {
        Rng rng = make_rng(99);
        MlpModel m = make_mlp({4, 5, 3}, rng);
        Matrix x = random_batch(4, 4, rng);
        Labels y = random_labels(4, 3, rng);
        return std::tuple{m, x, y};
    };
    auto [m1, x1, y1] = build();
    auto [m2, x2, y2] = build();
    CHECK(models_equal(m1, m2));
    auto r1 = loss_and_grads(m1, x1, y1, true);
    auto r2 = loss_and_grads(m2, x2, y2, true);
    CHECK(r1.loss == r2.loss);
    CHECK((r1.grads.input_grads.array() == r2.grads.input_grads.array()).all());
}

TEST_CASE("cross-entropy is nonnegative") {
    Rng rng = make_rng(31);
    for (int rep = 0; rep < 50; ++rep) {
        MlpModel m = make_mlp({3, 4, 4}, rng);
        Matrix x = random_batch(5, 3, rng);
        Labels y = random_labels(5, 4, rng);
        CHECK(batch_loss(m, x, y) >= 0.0);
    }
}
