#pragma once

#include "saddlecl/tasks.hpp"

#include <span>

namespace saddlecl {

// Per-task contribution weights. A uniform schedule weights every task
// equally, which makes the accumulated cost grow without bound as tasks
// arrive; a geometric schedule (ratio in (0,1), newest task heaviest)
// keeps the accumulated cost below eps/(1-ratio).
struct GammaSchedule {
    enum class Kind { Uniform, Geometric, Custom };

    Kind kind = Kind::Uniform;
    double ratio = 0.5;
    std::vector<double> custom;

    static GammaSchedule uniform() { return {}; }
    static GammaSchedule geometric(double r);
    static GammaSchedule custom_weights(std::vector<double> w);

    bool operator==(const GammaSchedule&) const = default;

    // gamma_0 .. gamma_{count-1}; geometric yields ratio^(count-1-tau).
    std::vector<double> weights(int count) const;
};

struct CostReport {
    std::vector<double> per_task_losses;  // l_tau for tau = 0..k
    double weighted_total = 0.0;          // sum gamma_tau * l_tau
    double beta_k = 1.0;
};

// Mean cross-entropy of the model on the task's test split, routed
// through the task's head.
double task_loss(const MlpModel& model, const Task& task);

// J_k over tasks 0..k with the given schedule.
CostReport total_cost(const MlpModel& model, std::span<const Task> tasks, const GammaSchedule& schedule,
                      double beta_k);

// Partial sums S_k = sum_{tau<=k} gamma_tau * eps for a constant
// per-task loss eps. Uniform weights grow linearly (divergence
// witness); geometric weights stay below eps/(1-ratio).
std::vector<double> partial_sum_trace(const GammaSchedule& schedule, double eps, int count);

}  // namespace saddlecl
