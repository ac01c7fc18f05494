#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "saddlecl/cost.hpp"

#include <cmath>

using namespace saddlecl;

namespace {

MlpModel zero_model(int in, int out) {
    MlpModel m;
    m.layers.push_back({Matrix::Zero(out, in), Vector::Zero(out), Activation::Identity});
    return m;
}

Task tiny_task(int id, int classes, int dim, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    Task t;
    t.id = id;
    t.scenario = Scenario::IDL;
    t.head_offset = 0;
    t.head_size = classes;
    auto fill = [&](Dataset& ds, int n) {
        ds.class_count = classes;
        ds.images.resize(n, dim);
        ds.labels.resize(static_cast<std::size_t>(n));
        for (Eigen::Index r = 0; r < n; ++r) {
            ds.labels[static_cast<std::size_t>(r)] = static_cast<int>(r) % classes;
            for (Eigen::Index j = 0; j < dim; ++j) ds.images(r, j) = gaussian(rng);
        }
    };
    fill(t.train, 8);
    fill(t.test, 4);
    return t;
}

}  // namespace

TEST_CASE("schedule weights") {
    SUBCASE("uniform is all ones") {
        const auto w = GammaSchedule::uniform().weights(5);
        for (double v : w) CHECK(v == 1.0);
    }
    SUBCASE("geometric weights newest task with 1") {
        const auto w = GammaSchedule::geometric(0.5).weights(4);
        CHECK(w == std::vector<double>{0.125, 0.25, 0.5, 1.0});
    }
    SUBCASE("geometric closed form: sum of 11 weights is 2 - 2^-10") {
        const auto w = GammaSchedule::geometric(0.5).weights(11);
        double sum = 0.0;
        for (double v : w) sum += v;  // ascending: adds exactly in binary
        CHECK(sum == 2.0 - std::pow(2.0, -10.0));
    }
    SUBCASE("ratio outside (0,1) is rejected") {
        CHECK_THROWS_AS(GammaSchedule::geometric(1.0), std::invalid_argument);
        CHECK_THROWS_AS(GammaSchedule::geometric(0.0), std::invalid_argument);
    }
    SUBCASE("custom weights must be nonnegative and long enough") {
        CHECK_THROWS_AS(GammaSchedule::custom_weights({1.0, -0.5}), std::invalid_argument);
        CHECK_THROWS_AS(GammaSchedule::custom_weights({1.0, 2.0}).weights(3), std::invalid_argument);
    }
}

TEST_CASE("task_loss") {
    SUBCASE("uniform-logit model costs ln(c)") {
        const Task t = tiny_task(0, 4, 3, 7);
        CHECK(task_loss(zero_model(3, 4), t) == std::log(4.0));
    }
    SUBCASE("saturated logits cost under 1e-3") {
        Task t = tiny_task(0, 2, 2, 9);
        // classify by a huge-margin rule aligned with the labels
        t.test.images.resize(2, 2);
        t.test.images << 1.0, 0.0, 0.0, 1.0;
        t.test.labels = {0, 1};
        MlpModel m = zero_model(2, 2);
        m.layers[0].weight << 50.0, 0.0, 0.0, 50.0;
        CHECK(task_loss(m, t) < 1e-3);
    }
    SUBCASE("equals the tensor-level loss on the same batch exactly") {
        const Task t = tiny_task(0, 3, 4, 11);
        Rng rng = make_rng(2);
        const MlpModel m = make_mlp({4, 6, 3}, rng);
        CHECK(task_loss(m, t) == batch_loss(m, t.test.images, t.test.labels, t.head()));
    }
    SUBCASE("head wider than the model is an argument error") {
        Task t = tiny_task(0, 4, 3, 13);
        t.head_size = 9;
        CHECK_THROWS_AS(task_loss(zero_model(3, 4), t), std::invalid_argument);
    }
}

TEST_CASE("total_cost") {
    Rng rng = make_rng(3);
    const MlpModel m = make_mlp({3, 5, 4}, rng);
    std::vector<Task> tasks{tiny_task(0, 4, 3, 21), tiny_task(1, 4, 3, 22), tiny_task(2, 4, 3, 23)};

    SUBCASE("k=0 reduces to gamma_0 * l_0") {
        const auto report = total_cost(m, std::span(tasks.data(), 1), GammaSchedule::uniform(), 1.0);
        CHECK(report.weighted_total == report.per_task_losses[0]);
    }
    SUBCASE("uniform weights with equal losses double up") {
        std::vector<Task> twins{tasks[0], tasks[0]};
        twins[1].id = 1;
        const auto report = total_cost(m, twins, GammaSchedule::uniform(), 1.0);
        CHECK(report.weighted_total == doctest::Approx(2.0 * report.per_task_losses[0]).epsilon(1e-15));
    }
    SUBCASE("report invariant: weighted total recomputes to 1e-12") {
        const auto g = GammaSchedule::geometric(0.5);
        const auto report = total_cost(m, tasks, g, 0.7);
        const auto w = g.weights(3);
        double total = 0.0;
        for (std::size_t i = 0; i < 3; ++i) total += w[i] * report.per_task_losses[i];
        CHECK(std::abs(total - report.weighted_total) <= 1e-12);
        CHECK(report.beta_k == 0.7);
    }
    SUBCASE("linearity: scaling the schedule scales the total") {
        const auto base = GammaSchedule::custom_weights({1.0, 0.5, 0.25});
        const auto scaled = GammaSchedule::custom_weights({3.0, 1.5, 0.75});
        const double a = total_cost(m, tasks, base, 1.0).weighted_total;
        const double b = total_cost(m, tasks, scaled, 1.0).weighted_total;
        CHECK(std::abs(b - 3.0 * a) <= 1e-12 * std::abs(b));
    }
    SUBCASE("schedule shorter than the task list is an argument error") {
        CHECK_THROWS_AS(total_cost(m, tasks, GammaSchedule::custom_weights({1.0}), 1.0),
                        std::invalid_argument);
    }
    SUBCASE("beta outside [0,1] is rejected") {
        CHECK_THROWS_AS(total_cost(m, tasks, GammaSchedule::uniform(), 1.5), std::invalid_argument);
    }
}

TEST_CASE("partial_sum_trace") {
    SUBCASE("uniform schedule grows linearly and exactly") {
        const auto sums = partial_sum_trace(GammaSchedule::uniform(), 0.01, 1000);
        REQUIRE(sums.size() == 1000);
        CHECK(sums[999] == 10.0);
        for (std::size_t k = 0; k < sums.size(); ++k)
            CHECK(sums[k] == static_cast<double>(k + 1) * 0.01);  // divergence witness
    }
    SUBCASE("geometric schedule stays below eps/(1-r)") {
        for (int count : {1, 5, 17, 41, 60}) {
            const auto sums = partial_sum_trace(GammaSchedule::geometric(0.5), 1.0, count);
            for (double s : sums) CHECK(s <= 2.0 + 1e-12);  // convergence witness
            // strictly below the limit while 2 - 2^-(count-1) is still
            // representable; for count > 53 it rounds to 2.0 exactly
            if (count <= 53) CHECK(sums.back() < 2.0);
        }
    }
    SUBCASE("geometric with 41 tasks lands 2^-40 below the limit") {
        const auto sums = partial_sum_trace(GammaSchedule::geometric(0.5), 1.0, 41);
        CHECK(std::abs(sums[40] - 2.0) < 1e-9);
    }
    SUBCASE("single entry is gamma_0 * eps") {
        const auto sums = partial_sum_trace(GammaSchedule::uniform(), 0.25, 1);
        CHECK(sums == std::vector<double>{0.25});
    }
    SUBCASE("partial sums are nondecreasing") {
        const auto sums = partial_sum_trace(GammaSchedule::geometric(0.9), 0.5, 30);
        for (std::size_t k = 1; k < sums.size(); ++k) CHECK(sums[k] >= sums[k - 1]);
    }
    SUBCASE("eps must be positive") {
        CHECK_THROWS_AS(partial_sum_trace(GammaSchedule::uniform(), 0.0, 3), std::invalid_argument);
    }
}
