#include "saddlecl/game.hpp"

#include "saddlecl/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace saddlecl {

StepSchedule StepSchedule::inverse(double alpha0, double rate) {
    require(alpha0 > 0.0, "StepSchedule: alpha0 must be > 0");
    require(rate > 0.0, "StepSchedule: inverse rate must be > 0");
    StepSchedule s;
    s.decay = Decay::Inverse;
    s.alpha0 = alpha0;
    s.inverse_rate = rate;
    return s;
}

StepSchedule StepSchedule::exponential(double alpha0, double factor) {
    require(alpha0 > 0.0, "StepSchedule: alpha0 must be > 0");
    require(factor > 0.0 && factor < 1.0, "StepSchedule: exponential factor must lie in (0,1)");
    StepSchedule s;
    s.decay = Decay::Exponential;
    s.alpha0 = alpha0;
    s.exp_factor = factor;
    return s;
}

double StepSchedule::at(long i) const {
    require(i >= 0, "StepSchedule: negative iteration");
    if (decay == Decay::Inverse) return alpha0 / (1.0 + inverse_rate * static_cast<double>(i));
    return alpha0 * std::pow(exp_factor, static_cast<double>(i));
}

AnalyticGame quadratic_saddle_game(int dim_x, int dim_theta) {
    AnalyticGame g;
    g.name = "quadratic";
    g.value = [](const Vector& x, const Vector& th) { return th.squaredNorm() - x.squaredNorm(); };
    g.grad_x = [](const Vector& x, const Vector&) { return Vector(-2.0 * x); };
    g.grad_theta = [](const Vector&, const Vector& th) { return Vector(2.0 * th); };
    g.known_saddle = {Vector::Zero(dim_x), Vector::Zero(dim_theta)};
    return g;
}

AnalyticGame bilinear_game(int dim) {
    AnalyticGame g;
    g.name = "bilinear";
    g.value = [](const Vector& x, const Vector& th) { return x.dot(th); };
    g.grad_x = [](const Vector&, const Vector& th) { return th; };
    g.grad_theta = [](const Vector& x, const Vector&) { return x; };
    g.known_saddle = {Vector::Zero(dim), Vector::Zero(dim)};
    return g;
}

AnalyticGame concave_peak_game(int dim_x) {
    AnalyticGame g;
    g.name = "concave";
    g.value = [](const Vector& x, const Vector&) { return -x.squaredNorm(); };
    g.grad_x = [](const Vector& x, const Vector&) { return Vector(-2.0 * x); };
    g.grad_theta = [](const Vector&, const Vector& th) { return Vector(Vector::Zero(th.size())); };
    g.known_saddle = {Vector::Zero(dim_x), Vector(0)};
    return g;
}

Vector ascent_step_normalized(const Vector& x, const Vector& grad, double alpha) {
    require_finite(grad, "player 1 gradient");
    const double n2 = grad.squaredNorm();
    if (n2 < kStationaryGradFloor) {
        throw stationary_gradient_error("player 1: |grad|^2 = " + std::to_string(n2) +
                                        " below stationary floor");
    }
    return x + (alpha / n2) * grad;
}

Vector ascent_step_plain(const Vector& x, const Vector& grad, double alpha) {
    require_finite(grad, "player 1 gradient");
    return x + alpha * grad;
}

Vector descent_step(const Vector& theta, const Vector& grad, double alpha) {
    require_finite(grad, "player 2 gradient");
    return theta - alpha * grad;
}

Trajectory play_sequential_game(const AnalyticGame& game, Vector x0, Vector theta0,
                                const StepSchedule& schedule, long iters, LeaderRule rule) {
    require(iters >= 1, "play_sequential_game: iters must be >= 1");
    Trajectory traj;
    traj.x0 = x0;
    traj.theta0 = theta0;
    traj.h0 = game.value(x0, theta0);

    Vector x = std::move(x0);
    Vector theta = std::move(theta0);
    for (long i = 0; i < iters; ++i) {
        TrajectoryPoint p;
        p.i = i;
        p.alpha = schedule.at(i);
        p.h_before = game.value(x, theta);

        x = (rule == LeaderRule::Normalized) ? ascent_step_normalized(x, game.grad_x(x, theta), p.alpha)
                                             : ascent_step_plain(x, game.grad_x(x, theta), p.alpha);
        p.h_mid = game.value(x, theta);  // follower has not moved yet

        if (theta.size() > 0) theta = descent_step(theta, game.grad_theta(x, theta), p.alpha);
        p.h_after = game.value(x, theta);
        p.x = x;
        p.theta = theta;
        require_finite(p.h_after, "play_sequential_game: H");
        traj.points.push_back(std::move(p));
    }
    return traj;
}

namespace {

Vector ball_point(const Vector& center, double radius, Rng& rng) {
    if (center.size() == 0) return center;
    Vector dir(center.size());
    for (Eigen::Index j = 0; j < dir.size(); ++j) dir(j) = gaussian(rng);
    const double n = dir.norm();
    if (n < 1e-300) return center;
    const double r = radius * std::pow(uniform01(rng), 1.0 / static_cast<double>(center.size()));
    return center + (r / n) * dir;
}

}  // namespace

SaddleCertificate check_saddle(const AnalyticGame& game, const Vector& x_star, const Vector& theta_star,
                               int probes, double radius, double slack, std::uint64_t seed) {
    require(probes >= 1, "check_saddle: probes must be >= 1");
    require(radius > 0.0, "check_saddle: radius must be > 0");

    const double h_star = game.value(x_star, theta_star);
    Rng rng = make_rng(seed, 0x5add1e);
    SaddleCertificate cert;
    cert.worst_violation = 0.0;
    for (int p = 0; p < probes; ++p) {
        if (theta_star.size() > 0) {
            const Vector th = ball_point(theta_star, radius, rng);
            cert.worst_violation = std::min(cert.worst_violation, game.value(x_star, th) - h_star);
        }
        if (x_star.size() > 0) {
            const Vector x = ball_point(x_star, radius, rng);
            cert.worst_violation = std::min(cert.worst_violation, h_star - game.value(x, theta_star));
        }
    }
    cert.holds = cert.worst_violation >= -slack;
    return cert;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trajectory to " + path.string());
    out << "i,alpha";
    for (Eigen::Index j = 0; j < traj.x0.size(); ++j) out << ",x" << j;
    for (Eigen::Index j = 0; j < traj.theta0.size(); ++j) out << ",theta" << j;
    out << ",H\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << ',' << buf;
    };
    for (const TrajectoryPoint& p : traj.points) {
        out << p.i;
        put(p.alpha);
        for (Eigen::Index j = 0; j < p.x.size(); ++j) put(p.x(j));
        for (Eigen::Index j = 0; j < p.theta.size(); ++j) put(p.theta(j));
        put(p.h_after);
        out << '\n';
    }
    if (!out.good()) throw std::runtime_error("write failed for " + path.string());
}

GameState player1_step(const GameState& state, const Matrix& loss_grad_x, double alpha) {
    require(loss_grad_x.rows() == state.x_pert.rows() && loss_grad_x.cols() == state.x_pert.cols(),
            "player1_step: gradient shape " + shape_str(loss_grad_x) + " does not match batch " +
                shape_str(state.x_pert));
    require_finite(loss_grad_x, "player1_step: gradient");
    const double n2 = loss_grad_x.squaredNorm();
    if (n2 < kStationaryGradFloor) {
        throw stationary_gradient_error("player1_step: |grad|^2 below stationary floor");
    }
    GameState next = state;
    next.x_pert += (alpha / n2) * loss_grad_x;
    return next;
}

GameState player2_step(const GameState& state, const GradientBundle& loss_grad_theta, double alpha) {
    GameState next = state;
    apply_update_inplace(next.theta, loss_grad_theta, alpha);
    return next;
}

Matrix ascend_batch(const MlpModel& model, Matrix batch, const Labels& labels,
                    const std::vector<double>& sample_weights, int zeta, double step, HeadSlice head,
                    bool normalized) {
    require(zeta >= 0, "ascend_batch: zeta must be >= 0");
    for (int u = 0; u < zeta; ++u) {
        LossResult res = weighted_loss_and_grads(model, batch, labels, sample_weights, true, head);
        if (normalized) {
            const double n2 = res.grads.input_grads.squaredNorm();
            if (n2 < kStationaryGradFloor)
                throw stationary_gradient_error("ascend_batch: |grad|^2 below stationary floor");
            batch += (step / n2) * res.grads.input_grads;
        } else {
            batch += step * res.grads.input_grads;
        }
    }
    require_finite(batch, "ascend_batch: batch");
    return batch;
}

HEstimate estimate_h(const MlpModel& model, const Matrix& x_before, const Matrix& x_after_zeta,
                     const Labels& labels, const std::vector<double>& sample_weights,
                     double prev_tasks_cost, const HEstimateParams& params, HeadSlice head) {
    require(x_before.rows() == x_after_zeta.rows() && x_before.cols() == x_after_zeta.cols(),
            "estimate_h: perturbed batches are not shape-congruent (" + shape_str(x_before) + " vs " +
                shape_str(x_after_zeta) + ")");
    require(params.zeta >= 1, "estimate_h: zeta must be >= 1");
    require(params.beta_k >= 0.0 && params.beta_k <= 1.0, "estimate_h: beta_k must lie in [0,1]");

    const double j_base = weighted_batch_loss(model, x_before, labels, sample_weights, head) + prev_tasks_cost;
    const double j_ascended =
        weighted_batch_loss(model, x_after_zeta, labels, sample_weights, head) + prev_tasks_cost;

    MlpModel temp = clone_model(model);
    for (int u = 0; u < params.zeta; ++u) {
        LossResult res = weighted_loss_and_grads(temp, x_before, labels, sample_weights, false, head);
        apply_update_inplace(temp, res.grads, params.descent_step);
    }
    const double j_descended =
        weighted_batch_loss(temp, x_before, labels, sample_weights, head) + prev_tasks_cost;

    HEstimate est;
    est.beta_term = params.beta_k * j_base;
    est.generalization_term = j_ascended - j_base;
    est.forgetting_term = j_descended - j_base;
    est.total = est.beta_term + est.forgetting_term + est.generalization_term;
    require_finite(est.total, "estimate_h: total");
    return est;
}

}  // namespace saddlecl
