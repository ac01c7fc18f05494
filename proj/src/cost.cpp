#include "saddlecl/cost.hpp"

namespace saddlecl {

GammaSchedule GammaSchedule::geometric(double r) {
    require(r > 0.0 && r < 1.0, "GammaSchedule: geometric ratio must lie strictly inside (0,1)");
    GammaSchedule g;
    g.kind = Kind::Geometric;
    g.ratio = r;
    return g;
}

GammaSchedule GammaSchedule::custom_weights(std::vector<double> w) {
    for (double v : w) require(v >= 0.0, "GammaSchedule: weights must be nonnegative");
    GammaSchedule g;
    g.kind = Kind::Custom;
    g.custom = std::move(w);
    return g;
}

std::vector<double> GammaSchedule::weights(int count) const {
    require(count >= 1, "GammaSchedule: need at least one weight");
    std::vector<double> w(static_cast<std::size_t>(count));
    switch (kind) {
        case Kind::Uniform:
            for (double& v : w) v = 1.0;
            break;
        case Kind::Geometric: {
            double g = 1.0;
            for (int tau = count - 1; tau >= 0; --tau) {
                w[static_cast<std::size_t>(tau)] = g;
                g *= ratio;
            }
            break;
        }
        case Kind::Custom:
            require(custom.size() >= static_cast<std::size_t>(count),
                    "GammaSchedule: custom schedule covers " + std::to_string(custom.size()) +
                        " tasks, need " + std::to_string(count));
            for (int tau = 0; tau < count; ++tau) w[static_cast<std::size_t>(tau)] = custom[static_cast<std::size_t>(tau)];
            break;
    }
    return w;
}

double task_loss(const MlpModel& model, const Task& task) {
    require(task.head_offset + task.head_size <= model.output_dim(),
            "task_loss: model output dim " + std::to_string(model.output_dim()) +
                " cannot serve head [" + std::to_string(task.head_offset) + ", " +
                std::to_string(task.head_offset + task.head_size) + ") for scenario " +
                to_string(task.scenario));
    return batch_loss(model, task.test.images, task.test.labels, task.head());
}

CostReport total_cost(const MlpModel& model, std::span<const Task> tasks, const GammaSchedule& schedule,
                      double beta_k) {
    require(!tasks.empty(), "total_cost: no tasks");
    require(beta_k >= 0.0 && beta_k <= 1.0, "total_cost: beta_k must lie in [0,1]");
    const std::vector<double> gamma = schedule.weights(static_cast<int>(tasks.size()));

    CostReport report;
    report.beta_k = beta_k;
    report.per_task_losses.reserve(tasks.size());
    for (std::size_t tau = 0; tau < tasks.size(); ++tau) {
        const double l = task_loss(model, tasks[tau]);
        report.per_task_losses.push_back(l);
        report.weighted_total += gamma[tau] * l;
    }
    return report;
}

std::vector<double> partial_sum_trace(const GammaSchedule& schedule, double eps, int count) {
    require(eps > 0.0, "partial_sum_trace: eps must be > 0");
    const std::vector<double> gamma = schedule.weights(count);
    std::vector<double> sums(static_cast<std::size_t>(count));
    // accumulate the weights, scale once: keeps S_k = (k+1)*eps exact
    // for the uniform schedule
    double wsum = 0.0;
    for (int k = 0; k < count; ++k) {
        wsum += gamma[static_cast<std::size_t>(k)];
        sums[static_cast<std::size_t>(k)] = wsum * eps;
    }
    return sums;
}

}  // namespace saddlecl
