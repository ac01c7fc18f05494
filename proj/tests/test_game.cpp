#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "saddlecl/game.hpp"

#include <cmath>

using namespace saddlecl;

namespace {

Vector vec1(double v) {
    Vector x(1);
    x << v;
    return x;
}

std::vector<double> mean_weights(Eigen::Index n) {
    return std::vector<double>(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
}

}  // namespace

TEST_CASE("step schedules decay and validate") {
    const StepSchedule inv = StepSchedule::inverse(0.05, 0.01);
    CHECK(inv.at(0) == 0.05);
    CHECK(inv.at(100) == doctest::Approx(0.025));
    const StepSchedule expo = StepSchedule::exponential(0.1, 0.5);
    CHECK(expo.at(3) == doctest::Approx(0.0125));
    for (long i = 1; i < 50; ++i) {
        CHECK(inv.at(i) < inv.at(i - 1));
        CHECK(expo.at(i) < expo.at(i - 1));
        CHECK(inv.at(i) > 0.0);
    }
    CHECK_THROWS_AS(StepSchedule::inverse(0.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(StepSchedule::exponential(0.1, 1.0), std::invalid_argument);
}

TEST_CASE("normalized ascent displacement is alpha over the gradient norm") {
    // |g| = 2, alpha = 0.1 -> displacement 0.05
    Vector x = vec1(1.0);
    Vector g = vec1(2.0);
    Vector moved = ascent_step_normalized(x, g, 0.1);
    CHECK(std::abs((moved - x).norm() - 0.05) < 1e-15);

    GameState st;
    st.x_pert = Matrix::Zero(1, 2);
    Matrix grad(1, 2);
    grad << 2.0, 0.0;  // Frobenius norm 2
    GameState moved_state = player1_step(st, grad, 0.1);
    CHECK(std::abs((moved_state.x_pert - st.x_pert).norm() - 0.05) < 1e-15);
    CHECK(moved_state.i == st.i);
}

TEST_CASE("vanishing player-1 gradient raises the stationary error") {
    CHECK_THROWS_AS(ascent_step_normalized(vec1(0.0), vec1(1e-13), 0.1), stationary_gradient_error);
    GameState st;
    st.x_pert = Matrix::Zero(1, 1);
    CHECK_THROWS_AS(player1_step(st, Matrix::Zero(1, 1), 0.1), stationary_gradient_error);
}

TEST_CASE("concave peak: ascent climbs monotonically within the per-step bound") {
    // H = -x^2 from x = 1; pre-tracking regime of the default schedule
    const AnalyticGame game = concave_peak_game();
    const StepSchedule sched = StepSchedule::inverse(0.05, 0.01);
    Vector x = vec1(1.0);
    const Vector theta(0);
    double h = game.value(x, theta);
    for (long i = 0; i < 15; ++i) {
        const double alpha = sched.at(i);
        x = ascent_step_normalized(x, game.grad_x(x, theta), alpha);
        const double h_next = game.value(x, theta);
        CHECK(h_next - h >= 0.0);          // maximizing
        CHECK(h_next - h <= alpha + 1e-9); // per-step cap
        h = h_next;
    }
    CHECK(std::abs(x(0)) < 1.0);  // moved toward the peak
}

TEST_CASE("plain descent arithmetic and convergence") {
    // H = theta^2: grad 2*theta, one step of 0.1 from 1 lands on 0.8
    Vector th = vec1(1.0);
    th = descent_step(th, vec1(2.0 * th(0)), 0.1);
    CHECK(th(0) == 0.8);

    // decaying steps contract to the minimizer
    const StepSchedule sched = StepSchedule::inverse(0.2, 0.01);
    Vector t2 = vec1(1.0);
    for (long i = 0; i < 2000; ++i) t2 = descent_step(t2, vec1(2.0 * t2(0)), sched.at(i));
    CHECK(std::abs(t2(0)) < 1e-6);
}

TEST_CASE("player2_step with alpha 0 leaves the state unchanged") {
    Rng rng = make_rng(5);
    GameState st;
    st.x_pert = Matrix::Ones(2, 3);
    st.theta = make_mlp({3, 2}, rng);
    GradientBundle g;
    g.weight_grads.push_back(Matrix::Ones(2, 3));
    g.bias_grads.push_back(Vector::Ones(2));
    const GameState next = player2_step(st, g, 0.0);
    CHECK(models_equal(next.theta, st.theta));
    CHECK(next.i == st.i);
}

TEST_CASE("sequential play on the quadratic saddle reaches the origin") {
    const AnalyticGame game = quadratic_saddle_game();
    const StepSchedule sched = StepSchedule::inverse(0.2, 0.01);
    const Trajectory traj =
        play_sequential_game(game, vec1(1.0), vec1(1.0), sched, 5000, LeaderRule::Plain);
    REQUIRE(traj.points.size() == 5000);

    const TrajectoryPoint& last = traj.points.back();
    const double norm = std::sqrt(last.x.squaredNorm() + last.theta.squaredNorm());
    CAPTURE(norm);
    CHECK(norm < 1e-3);

    // the certificate holds at the final iterate
    const SaddleCertificate cert = check_saddle(game, last.x, last.theta, 500, 0.1, 1e-6);
    CAPTURE(cert.worst_violation);
    CHECK(cert.holds);

    // follower moves never increase H at these step sizes
    for (const TrajectoryPoint& p : traj.points) CHECK(p.h_after <= p.h_mid + 1e-12);
}

TEST_CASE("normalized leader keeps the per-step gain inside [0, alpha] before tracking") {
    // pre-tracking stretch of the quadratic saddle from (1,1)
    const AnalyticGame game = quadratic_saddle_game();
    const StepSchedule sched = StepSchedule::inverse(0.05, 0.01);
    const Trajectory traj =
        play_sequential_game(game, vec1(1.0), vec1(1.0), sched, 15, LeaderRule::Normalized);
    for (const TrajectoryPoint& p : traj.points) {
        CHECK(p.leader_gain() >= 0.0);
        CHECK(p.leader_gain() <= p.alpha + 1e-9);
        CHECK(p.h_after <= p.h_mid + 1e-12);  // follower side is monotone too
    }
}

TEST_CASE("one iteration is exactly leader then follower") {
    const AnalyticGame game = quadratic_saddle_game();
    const StepSchedule sched = StepSchedule::inverse(0.2, 0.01);
    const Trajectory traj = play_sequential_game(game, vec1(1.0), vec1(1.0), sched, 1);
    REQUIRE(traj.points.size() == 1);
    const TrajectoryPoint& p = traj.points[0];
    // leader moved x while theta was still theta0
    CHECK(p.h_mid == game.value(p.x, traj.theta0));
    CHECK(p.x(0) != traj.x0(0));
    // follower then moved theta against the fresh x
    CHECK(p.h_after == game.value(p.x, p.theta));
    CHECK(p.theta(0) != traj.theta0(0));
    // and the mid-point differs from both endpoints: x changed first
    CHECK(p.h_mid != p.h_before);
}

TEST_CASE("bilinear play stays bounded with a decaying schedule") {
    const AnalyticGame game = bilinear_game();
    const StepSchedule sched = StepSchedule::exponential(0.01, 0.99);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = make_rng(seed, 0xb111);
        const Vector x0 = vec1(uniform(rng, 0.8, 1.2) * (rng() % 2 ? 1.0 : -1.0));
        const Vector th0 = vec1(uniform(rng, 0.8, 1.2) * (rng() % 2 ? 1.0 : -1.0));
        const double r0 = std::sqrt(x0.squaredNorm() + th0.squaredNorm());
        const Trajectory traj = play_sequential_game(game, x0, th0, sched, 1000);
        for (const TrajectoryPoint& p : traj.points) {
            const double r = std::sqrt(p.x.squaredNorm() + p.theta.squaredNorm());
            CAPTURE(seed);
            REQUIRE(r <= 10.0 * r0);
        }
    }
}

TEST_CASE("check_saddle certifies the true saddle and rejects impostors") {
    const AnalyticGame game = quadratic_saddle_game();
    SUBCASE("origin of theta^2 - x^2 holds") {
        const SaddleCertificate cert = check_saddle(game, vec1(0.0), vec1(0.0), 200, 0.1);
        CHECK(cert.holds);
        CHECK(cert.worst_violation >= -1e-12);
    }
    SUBCASE("shifted x fails the max side") {
        const SaddleCertificate cert = check_saddle(game, vec1(0.5), vec1(0.0), 200, 0.2);
        CHECK(!cert.holds);
        CHECK(cert.worst_violation < -1e-3);  // H(x*,th*) = -0.25 < H(x,th*) for |x| < 0.5
    }
    SUBCASE("a pure minimum fails the x side of the condition") {
        AnalyticGame bowl;
        bowl.value = [](const Vector& x, const Vector& th) { return th.squaredNorm() + x.squaredNorm(); };
        bowl.grad_x = [](const Vector& x, const Vector&) { return Vector(2.0 * x); };
        bowl.grad_theta = [](const Vector&, const Vector& th) { return Vector(2.0 * th); };
        const SaddleCertificate cert = check_saddle(bowl, vec1(0.0), vec1(0.0), 200, 0.1);
        CHECK(!cert.holds);
    }
    SUBCASE("probe and radius validation") {
        CHECK_THROWS_AS(check_saddle(game, vec1(0.0), vec1(0.0), 0, 0.1), std::invalid_argument);
        CHECK_THROWS_AS(check_saddle(game, vec1(0.0), vec1(0.0), 10, 0.0), std::invalid_argument);
    }
}

TEST_CASE("analytic gradients match finite differences of the evaluator") {
    for (const AnalyticGame& game : {quadratic_saddle_game(2, 2), bilinear_game(2)}) {
        Rng rng = make_rng(7, 0xfd);
        for (int rep = 0; rep < 10; ++rep) {
            Vector x(2), th(2);
            for (int j = 0; j < 2; ++j) {
                x(j) = uniform(rng, -2.0, 2.0);
                th(j) = uniform(rng, -2.0, 2.0);
            }
            const double h = 1e-6;
            const Vector gx = game.grad_x(x, th);
            const Vector gt = game.grad_theta(x, th);
            for (int j = 0; j < 2; ++j) {
                Vector xp = x, xm = x;
                xp(j) += h;
                xm(j) -= h;
                const double fd = (game.value(xp, th) - game.value(xm, th)) / (2 * h);
                CHECK(std::abs(gx(j) - fd) < 1e-6 * std::max(1.0, std::abs(fd)));
                Vector tp = th, tm = th;
                tp(j) += h;
                tm(j) -= h;
                const double fdt = (game.value(x, tp) - game.value(x, tm)) / (2 * h);
                CHECK(std::abs(gt(j) - fdt) < 1e-6 * std::max(1.0, std::abs(fdt)));
            }
        }
    }
}

TEST_CASE("estimate_h: degenerate inner updates leave only the beta term") {
    Rng rng = make_rng(21);
    const MlpModel m = make_mlp({3, 4, 2}, rng);
    Matrix x(4, 3);
    for (Eigen::Index r = 0; r < 4; ++r)
        for (Eigen::Index j = 0; j < 3; ++j) x(r, j) = gaussian(rng);
    const Labels y{0, 1, 0, 1};
    const auto w = mean_weights(4);

    HEstimateParams p;
    p.beta_k = 0.8;
    p.zeta = 3;
    p.descent_step = 0.0;  // no temp-model movement
    const HEstimate est = estimate_h(m, x, x, y, w, 0.0, p);
    CHECK(est.forgetting_term == 0.0);
    CHECK(est.generalization_term == 0.0);
    CHECK(est.total == est.beta_term);
    CHECK(est.beta_term == doctest::Approx(0.8 * batch_loss(m, x, y)).epsilon(1e-15));
}

TEST_CASE("estimate_h: ascent cannot decrease and descent cannot increase the cost") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng = make_rng(seed, 0xa5ce);
        const MlpModel m = make_mlp({4, 6, 3}, rng);
        Matrix x(6, 4);
        for (Eigen::Index r = 0; r < 6; ++r)
            for (Eigen::Index j = 0; j < 4; ++j) x(r, j) = gaussian(rng);
        Labels y(6);
        for (auto& v : y) v = static_cast<int>(rng_index(rng, 3));
        const auto w = mean_weights(6);

        HEstimateParams p;
        p.zeta = 5;
        p.descent_step = 1e-3;
        const Matrix x_up = ascend_batch(m, x, y, w, p.zeta, 1e-3);
        const HEstimate est = estimate_h(m, x, x_up, y, w, 0.0, p);
        CAPTURE(seed);
        CHECK(est.generalization_term >= -1e-9);
        CHECK(est.forgetting_term <= 1e-9);
        CHECK(std::abs(est.total - (est.beta_term + est.forgetting_term + est.generalization_term)) <=
              1e-12);
    }
}

TEST_CASE("estimate_h rejects mismatched batches and bad parameters") {
    Rng rng = make_rng(33);
    const MlpModel m = make_mlp({3, 2}, rng);
    const Matrix a = Matrix::Ones(2, 3);
    const Matrix b = Matrix::Ones(3, 3);
    const Labels y{0, 1};
    const auto w = mean_weights(2);
    HEstimateParams p;
    CHECK_THROWS_AS(estimate_h(m, a, b, y, w, 0.0, p), std::invalid_argument);
    p.zeta = 0;
    CHECK_THROWS_AS(estimate_h(m, a, a, y, w, 0.0, p), std::invalid_argument);
}

TEST_CASE("trajectory csv export") {
    const AnalyticGame game = quadratic_saddle_game();
    const Trajectory traj =
        play_sequential_game(game, vec1(1.0), vec1(1.0), StepSchedule::inverse(0.1, 0.01), 3);
    const auto path = std::filesystem::temp_directory_path() / "saddlecl_traj_test.csv";
    write_trajectory_csv(traj, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "i,alpha,x0,theta0,H");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 3);
    std::filesystem::remove(path);
}
