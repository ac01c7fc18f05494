#pragma once

#include "saddlecl/cost.hpp"
#include "saddlecl/game.hpp"
#include "saddlecl/tasks.hpp"

#include <map>

namespace saddlecl {

// Bounded store of (image, label, task id) triples from finished
// tasks. Capacity is rebalanced to an equal per-task quota every time a
// task is folded in.
struct MemorySample {
    Vector image;
    int label = 0;
    int task_id = 0;
};

struct TaskMemory {
    int capacity = 0;
    std::uint64_t seed = 0;
    int rounds = 0;  // rebalance counter, salts the sampling rng
    std::vector<MemorySample> store;

    bool empty() const { return store.empty(); }
    std::size_t size() const { return store.size(); }
};

TaskMemory make_task_memory(int capacity, std::uint64_t seed);

// Fold a finished task into the memory: existing tasks are seeded-
// downsampled to capacity / (tasks seen), the new task fills its quota.
void update_task_memory(TaskMemory& memory, const Task& task);

std::map<int, int> memory_task_counts(const TaskMemory& memory);

enum class HGradMode { SurrogateFull, CurrentBatchOnly };
enum class OptimizerKind { Sgd, Adam };

struct TrainerConfig {
    int zeta = 5;                 // inner updates for both surrogates
    int epochs = 2;               // passes over the new-task buffer
    int batch_size = 128;
    double learning_rate = 1e-3;
    double beta_k = 1.0;
    int buffer_capacity = 500;
    double ascent_step = 1e-3;       // player-1 step on the batch copy
    bool ascent_normalized = false;  // |g|^-2 rule instead of plain ascent
    HGradMode h_grad_mode = HGradMode::SurrogateFull;
    OptimizerKind optimizer = OptimizerKind::Sgd;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    GammaSchedule gamma;

    bool operator==(const TrainerConfig&) const = default;

    void validate() const;
};

// One record per parameter update: the three terms of the estimated
// objective, their sum, the running batch loss and the step size used.
struct TraceRow {
    int k = 0;
    long i = 0;
    double beta_term = 0.0;
    double forgetting_term = 0.0;
    double generalization_term = 0.0;
    double h_total = 0.0;
    double current_loss = 0.0;
    double alpha = 0.0;
};

// The two-player update loop over one task: per batch, sample the
// memory, ascend a copy of the union batch (player 1), measure the
// surrogate terms against a throwaway descended model, then take one
// descent step on the live parameters (player 2). The memory is not
// modified here.
std::vector<TraceRow> bcl_train_task(MlpModel& model, const Task& task, const TaskMemory& memory,
                                     const TrainerConfig& cfg);

// Same loop skeleton, plain descent on the union-batch cross-entropy.
std::vector<TraceRow> naive_rehearsal_train_task(MlpModel& model, const Task& task,
                                                 const TaskMemory& memory, const TrainerConfig& cfg);

// Plain descent over the task's own batches.
std::vector<TraceRow> sequential_train_task(MlpModel& model, const Task& task, const TrainerConfig& cfg);

// Sequential plus lambda * |theta - anchor|^2 with its exact gradient.
std::vector<TraceRow> l2_train_task(MlpModel& model, const Task& task, const MlpModel& anchor,
                                    double lambda, const TrainerConfig& cfg);

struct RunMetrics {
    // accuracy[j][t] = test accuracy on task t after training task j
    std::vector<std::vector<double>> accuracy;
    double retained_accuracy = 0.0;  // mean of the final row
    double wall_seconds = 0.0;
};

// Per-task test accuracies for tasks 0..upto_k plus their mean. ITL
// routes each task through its own head.
std::vector<double> per_task_accuracies(const MlpModel& model, const TaskStream& stream, int upto_k);

double retained_accuracy(const MlpModel& model, const TaskStream& stream, int upto_k);

enum class Method { Sequential, L2, NaiveRehearsal, Bcl };

const char* to_string(Method m);

struct StreamRun {
    MlpModel model;
    RunMetrics metrics;
    std::vector<TraceRow> trace;
};

// Fresh model, sequential pass over the stream with the given method,
// memory folding after each task where the method uses one.
StreamRun run_method_on_stream(Method method, const TaskStream& stream, const std::vector<int>& hidden,
                               const TrainerConfig& cfg, double l2_lambda = 0.0);

}  // namespace saddlecl
