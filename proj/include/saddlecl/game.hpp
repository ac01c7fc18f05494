#pragma once

#include "saddlecl/mlp.hpp"

#include <filesystem>
#include <functional>
#include <optional>

namespace saddlecl {

// Step sizes must be positive, nonincreasing and tend to zero.
struct StepSchedule {
    enum class Decay { Inverse, Exponential };

    Decay decay = Decay::Inverse;
    double alpha0 = 0.05;
    double inverse_rate = 0.01;  // alpha0 / (1 + i * rate)
    double exp_factor = 0.999;   // alpha0 * factor^i

    static StepSchedule inverse(double alpha0, double rate);
    static StepSchedule exponential(double alpha0, double factor);

    double at(long i) const;
};

// A differentiable payoff H(x, theta) with hand-coded gradients. Either
// argument may be empty (a player can be absent). The lab plays these
// games to exercise the two-player machinery without any network.
struct AnalyticGame {
    std::string name;
    std::function<double(const Vector&, const Vector&)> value;
    std::function<Vector(const Vector&, const Vector&)> grad_x;
    std::function<Vector(const Vector&, const Vector&)> grad_theta;
    std::optional<std::pair<Vector, Vector>> known_saddle;
};

// H = |theta|^2 - |x|^2, saddle at the origin.
AnalyticGame quadratic_saddle_game(int dim_x = 1, int dim_theta = 1);
// H = x . theta. Alternating play is not expected to converge here;
// the lab only records boundedness.
AnalyticGame bilinear_game(int dim = 1);
// H = -|x|^2 with theta absent: the maximizing player alone.
AnalyticGame concave_peak_game(int dim_x = 1);

// Leader rule: x + alpha * g / |g|^2 (displacement alpha / |g|).
// Throws stationary_gradient_error when |g|^2 falls below the floor.
inline constexpr double kStationaryGradFloor = 1e-24;
Vector ascent_step_normalized(const Vector& x, const Vector& grad, double alpha);
// Plain ascent x + alpha * g. The normalized rule carries the per-step
// gain cap but its step length alpha/|g| diverges near a maximizer, so
// saddle-convergence runs use the plain rule.
Vector ascent_step_plain(const Vector& x, const Vector& grad, double alpha);
// Follower rule: theta - alpha * g, unnormalized.
Vector descent_step(const Vector& theta, const Vector& grad, double alpha);

enum class LeaderRule { Normalized, Plain };

struct TrajectoryPoint {
    long i = 0;
    double alpha = 0.0;
    Vector x;          // after the leader move
    Vector theta;      // after the follower move
    double h_before;   // H(x_i, theta_i)
    double h_mid;      // H(x_{i+1}, theta_i) - leader moved, follower has not
    double h_after;    // H(x_{i+1}, theta_{i+1})
    double leader_gain() const { return h_mid - h_before; }
};

struct Trajectory {
    Vector x0, theta0;
    double h0 = 0.0;
    std::vector<TrajectoryPoint> points;
};

// One round = leader move then follower move; the follower sees the
// fresh x. h_mid in each record makes the ordering observable.
Trajectory play_sequential_game(const AnalyticGame& game, Vector x0, Vector theta0,
                                const StepSchedule& schedule, long iters,
                                LeaderRule rule = LeaderRule::Normalized);

struct SaddleCertificate {
    bool holds = false;
    double worst_violation = 0.0;  // most negative slack seen across probes
};

// Probes the two-sided condition H(x*, theta) >= H(x*, theta*) >=
// H(x, theta*) at `probes` points drawn uniformly from radius-balls
// around the candidate. `slack` is the tolerated negativity.
SaddleCertificate check_saddle(const AnalyticGame& game, const Vector& x_star, const Vector& theta_star,
                               int probes, double radius, double slack = 1e-9, std::uint64_t seed = 2024);

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Neural game pieces: the same two strategies acting on a perturbed
// batch and a model.

struct GameState {
    Matrix x_pert;   // the perturbed copy of the batch
    MlpModel theta;
    long i = 0;      // iteration index at the current task
    double alpha = 0.0;
    int zeta = 1;    // inner-update count for the surrogate
};

// x_pert + alpha * G / |G|_F^2; all other fields preserved.
GameState player1_step(const GameState& state, const Matrix& loss_grad_x, double alpha);
// theta - alpha * grads; unnormalized.
GameState player2_step(const GameState& state, const GradientBundle& loss_grad_theta, double alpha);

// zeta plain gradient-ascent updates of the batch against the weighted
// loss at fixed parameters. `normalized` switches to the |g|^-2 rule.
Matrix ascend_batch(const MlpModel& model, Matrix batch, const Labels& labels,
                    const std::vector<double>& sample_weights, int zeta, double step, HeadSlice head = {},
                    bool normalized = false);

// The three-term decomposition of the per-task objective, estimated by
// finite differences of the cost: zeta ascent updates of the batch give
// the generalization term, zeta descent updates of a throwaway model
// copy give the forgetting term.
struct HEstimate {
    double beta_term = 0.0;
    double forgetting_term = 0.0;
    double generalization_term = 0.0;
    double total = 0.0;
};

struct HEstimateParams {
    double beta_k = 1.0;
    int zeta = 5;
    double descent_step = 1e-3;  // step for the throwaway-model updates
};

// `sample_weights` define the batch-level cost (typically gamma_tau /
// n_tau per task group); `prev_tasks_cost` is an additive constant for
// previous-task cost not represented in the batch.
HEstimate estimate_h(const MlpModel& model, const Matrix& x_before, const Matrix& x_after_zeta,
                     const Labels& labels, const std::vector<double>& sample_weights,
                     double prev_tasks_cost, const HEstimateParams& params, HeadSlice head = {});

}  // namespace saddlecl
