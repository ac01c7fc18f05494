#include "saddlecl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace saddlecl {

TaskMemory make_task_memory(int capacity, std::uint64_t seed) {
    require(capacity >= 1, "task memory capacity must be >= 1");
    TaskMemory m;
    m.capacity = capacity;
    m.seed = seed;
    return m;
}

std::map<int, int> memory_task_counts(const TaskMemory& memory) {
    std::map<int, int> counts;
    for (const MemorySample& s : memory.store) counts[s.task_id]++;
    return counts;
}

void update_task_memory(TaskMemory& memory, const Task& task) {
    for (const MemorySample& s : memory.store)
        require(s.task_id != task.id, "update_task_memory: task already stored");

    // group what we have, then rebalance everyone to an equal quota
    std::map<int, std::vector<MemorySample>> groups;
    for (MemorySample& s : memory.store) groups[s.task_id].push_back(std::move(s));
    {
        std::vector<MemorySample> fresh;
        fresh.reserve(static_cast<std::size_t>(task.train.size()));
        for (Eigen::Index r = 0; r < task.train.size(); ++r) {
            fresh.push_back({task.train.images.row(r).transpose(), task.train.labels[static_cast<std::size_t>(r)],
                             task.id});
        }
        groups[task.id] = std::move(fresh);
    }

    const int n_tasks = static_cast<int>(groups.size());
    const int base = memory.capacity / n_tasks;
    int remainder = memory.capacity % n_tasks;

    memory.rounds += 1;
    memory.store.clear();
    for (auto& [tid, samples] : groups) {
        int quota = base + (remainder > 0 ? 1 : 0);
        if (remainder > 0) --remainder;
        if (static_cast<int>(samples.size()) > quota) {
            Rng rng = make_rng(memory.seed,
                               0xd0'0000 + 1000ull * static_cast<std::uint64_t>(memory.rounds) +
                                   static_cast<std::uint64_t>(tid));
            auto keep = sample_indices(samples.size(), static_cast<std::size_t>(quota), rng);
            std::sort(keep.begin(), keep.end());
            for (std::size_t i : keep) memory.store.push_back(std::move(samples[i]));
        } else {
            for (MemorySample& s : samples) memory.store.push_back(std::move(s));
        }
    }
}

void TrainerConfig::validate() const {
    require(zeta >= 1, "zeta must be >= 1");
    require(epochs >= 1, "epochs must be >= 1");
    require(batch_size >= 1, "batch_size must be >= 1");
    require(learning_rate > 0.0, "learning_rate must be > 0");
    require(beta_k >= 0.0 && beta_k <= 1.0, "beta_k must lie in [0,1]");
    require(buffer_capacity >= 1, "buffer_capacity must be >= 1");
    // 0 is the documented degenerate case: player 1 stands still and
    // the loop reduces toward plain rehearsal
    require(ascent_step >= 0.0, "ascent_step must be >= 0");
}

namespace {

struct Batch {
    Matrix images;
    Labels labels;
    Labels task_ids;
};

Batch take_rows(const Dataset& ds, int task_id, const std::vector<std::size_t>& order, std::size_t begin,
                std::size_t end) {
    Batch b;
    b.images.resize(static_cast<Eigen::Index>(end - begin), ds.images.cols());
    b.labels.resize(end - begin);
    b.task_ids.assign(end - begin, task_id);
    for (std::size_t i = begin; i < end; ++i) {
        b.images.row(static_cast<Eigen::Index>(i - begin)) = ds.images.row(static_cast<Eigen::Index>(order[i]));
        b.labels[i - begin] = ds.labels[order[i]];
    }
    return b;
}

void append_memory_draw(Batch& b, const TaskMemory& memory, std::size_t count, Rng& rng) {
    const auto picks = sample_indices(memory.size(), count, rng);
    const Eigen::Index base = b.images.rows();
    b.images.conservativeResize(base + static_cast<Eigen::Index>(picks.size()), Eigen::NoChange);
    for (std::size_t i = 0; i < picks.size(); ++i) {
        const MemorySample& s = memory.store[picks[i]];
        b.images.row(base + static_cast<Eigen::Index>(i)) = s.image.transpose();
        b.labels.push_back(s.label);
        b.task_ids.push_back(s.task_id);
    }
}

// w_s = gamma[task(s)] / count(task(s) in batch): the batch estimate of
// the task-weighted cost sum_tau gamma_tau * mean-loss_tau.
std::vector<double> task_weights(const Batch& b, const std::vector<double>& gamma) {
    std::map<int, int> counts;
    for (int tid : b.task_ids) counts[tid]++;
    std::vector<double> w(b.task_ids.size());
    for (std::size_t s = 0; s < w.size(); ++s) {
        const int tid = b.task_ids[s];
        w[s] = gamma[static_cast<std::size_t>(tid)] / static_cast<double>(counts[tid]);
    }
    return w;
}

struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<Vector> m_b, v_b;
    long t = 0;

    explicit AdamState(const MlpModel& model) {
        for (const Layer& l : model.layers) {
            m_w.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
            v_w.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
            m_b.push_back(Vector::Zero(l.bias.size()));
            v_b.push_back(Vector::Zero(l.bias.size()));
        }
    }
};

struct Optimizer {
    const TrainerConfig& cfg;
    std::optional<AdamState> adam;

    Optimizer(const TrainerConfig& c, const MlpModel& model) : cfg(c) {
        if (cfg.optimizer == OptimizerKind::Adam) adam.emplace(model);
    }

    void step(MlpModel& model, const GradientBundle& grads) {
        if (!adam) {
            apply_update_inplace(model, grads, cfg.learning_rate);
            return;
        }
        AdamState& st = *adam;
        st.t += 1;
        const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(st.t));
        const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(st.t));
        for (std::size_t li = 0; li < model.layers.size(); ++li) {
            require_finite(grads.weight_grads[li], "adam: weight grads");
            st.m_w[li] = cfg.adam_beta1 * st.m_w[li] + (1.0 - cfg.adam_beta1) * grads.weight_grads[li];
            st.v_w[li] = cfg.adam_beta2 * st.v_w[li] +
                         (1.0 - cfg.adam_beta2) * grads.weight_grads[li].cwiseProduct(grads.weight_grads[li]);
            model.layers[li].weight -=
                cfg.learning_rate * (st.m_w[li] / c1)
                    .cwiseQuotient(((st.v_w[li] / c2).cwiseSqrt().array() + cfg.adam_eps).matrix());
            st.m_b[li] = cfg.adam_beta1 * st.m_b[li] + (1.0 - cfg.adam_beta1) * grads.bias_grads[li];
            st.v_b[li] = cfg.adam_beta2 * st.v_b[li] +
                         (1.0 - cfg.adam_beta2) * grads.bias_grads[li].cwiseProduct(grads.bias_grads[li]);
            model.layers[li].bias -=
                cfg.learning_rate * (st.m_b[li] / c1)
                    .cwiseQuotient(((st.v_b[li] / c2).cwiseSqrt().array() + cfg.adam_eps).matrix());
        }
    }
};

void scale_accumulate(GradientBundle& acc, const GradientBundle& g, double coef) {
    if (acc.weight_grads.empty()) {
        acc.weight_grads.resize(g.weight_grads.size());
        acc.bias_grads.resize(g.bias_grads.size());
        for (std::size_t li = 0; li < g.weight_grads.size(); ++li) {
            acc.weight_grads[li] = coef * g.weight_grads[li];
            acc.bias_grads[li] = coef * g.bias_grads[li];
        }
        return;
    }
    for (std::size_t li = 0; li < g.weight_grads.size(); ++li) {
        acc.weight_grads[li] += coef * g.weight_grads[li];
        acc.bias_grads[li] += coef * g.bias_grads[li];
    }
}

void check_task(const MlpModel& model, const Task& task) {
    require(task.train.size() > 0, "train_task: task has no training data");
    require(task.head_offset + task.head_size <= model.output_dim(),
            "train_task: model output dim " + std::to_string(model.output_dim()) +
                " cannot serve head [" + std::to_string(task.head_offset) + ", " +
                std::to_string(task.head_offset + task.head_size) + ")");
}

// The per-task batch loop shared by every method. With an empty memory
// the draw is skipped entirely, so a rehearsal loop consumes exactly
// the same rng stream as a sequential one.
template <typename PerBatch>
std::vector<TraceRow> batch_loop(const Task& task, const TrainerConfig& cfg, const TaskMemory* memory,
                                 PerBatch&& per_batch) {
    const auto n = static_cast<std::size_t>(task.train.size());
    Rng rng = make_rng(cfg.seed, 0x7a5c ^ static_cast<std::uint64_t>(task.id));
    std::vector<TraceRow> trace;
    long update = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = shuffled_indices(n, rng);
        for (std::size_t at = 0; at < n; at += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(n, at + static_cast<std::size_t>(cfg.batch_size));
            Batch b = take_rows(task.train, task.id, order, at, end);
            if (memory != nullptr && !memory->empty()) {
                append_memory_draw(b, *memory, std::min<std::size_t>(memory->size(),
                                                                     static_cast<std::size_t>(cfg.batch_size)),
                                   rng);
            }
            trace.push_back(per_batch(b, update));
            ++update;
        }
    }
    return trace;
}

}  // namespace

std::vector<TraceRow> bcl_train_task(MlpModel& model, const Task& task, const TaskMemory& memory,
                                     const TrainerConfig& cfg) {
    cfg.validate();
    check_task(model, task);
    const HeadSlice head = task.head();
    const std::vector<double> gamma = cfg.gamma.weights(task.id + 1);
    Optimizer opt(cfg, model);

    return batch_loop(task, cfg, &memory, [&](const Batch& b, long update) {
        const std::vector<double> w = task_weights(b, gamma);

        // player 1: ascend a copy of the union batch
        Matrix x_pert = ascend_batch(model, b.images, b.labels, w, cfg.zeta, cfg.ascent_step, head,
                                     cfg.ascent_normalized);

        // surrogate terms against the throwaway descended model
        HEstimateParams hp{cfg.beta_k, cfg.zeta, cfg.learning_rate};
        const HEstimate est = estimate_h(model, b.images, x_pert, b.labels, w, 0.0, hp, head);

        // player 2: one descent step on the live parameters
        GradientBundle direction;
        if (cfg.h_grad_mode == HGradMode::CurrentBatchOnly) {
            direction = weighted_loss_and_grads(model, b.images, b.labels, w, false, head).grads;
        } else {
            // d/dtheta of [beta J + (J(theta_B) - J) + (J_ascended - J)]:
            // (beta - 2) grad J(theta) + grad J(theta_B) + grad J on the
            // ascended batch
            MlpModel theta_b = clone_model(model);
            for (int u = 0; u < cfg.zeta; ++u) {
                auto res = weighted_loss_and_grads(theta_b, b.images, b.labels, w, false, head);
                apply_update_inplace(theta_b, res.grads, cfg.learning_rate);
            }
            const auto g_now = weighted_loss_and_grads(model, b.images, b.labels, w, false, head);
            const auto g_temp = weighted_loss_and_grads(theta_b, b.images, b.labels, w, false, head);
            const auto g_pert = weighted_loss_and_grads(model, x_pert, b.labels, w, false, head);
            scale_accumulate(direction, g_now.grads, cfg.beta_k - 2.0);
            scale_accumulate(direction, g_temp.grads, 1.0);
            scale_accumulate(direction, g_pert.grads, 1.0);
        }
        const double running = batch_loss(model, b.images, b.labels, head);
        opt.step(model, direction);

        return TraceRow{task.id, update, est.beta_term, est.forgetting_term, est.generalization_term,
                        est.total, running, cfg.learning_rate};
    });
}

std::vector<TraceRow> naive_rehearsal_train_task(MlpModel& model, const Task& task,
                                                 const TaskMemory& memory, const TrainerConfig& cfg) {
    cfg.validate();
    check_task(model, task);
    const HeadSlice head = task.head();
    Optimizer opt(cfg, model);
    return batch_loop(task, cfg, &memory, [&](const Batch& b, long update) {
        const auto res = loss_and_grads(model, b.images, b.labels, false, head);
        opt.step(model, res.grads);
        return TraceRow{task.id, update, 0.0, 0.0, 0.0, 0.0, res.loss, cfg.learning_rate};
    });
}

std::vector<TraceRow> sequential_train_task(MlpModel& model, const Task& task, const TrainerConfig& cfg) {
    cfg.validate();
    check_task(model, task);
    const HeadSlice head = task.head();
    Optimizer opt(cfg, model);
    return batch_loop(task, cfg, nullptr, [&](const Batch& b, long update) {
        const auto res = loss_and_grads(model, b.images, b.labels, false, head);
        opt.step(model, res.grads);
        return TraceRow{task.id, update, 0.0, 0.0, 0.0, 0.0, res.loss, cfg.learning_rate};
    });
}

std::vector<TraceRow> l2_train_task(MlpModel& model, const Task& task, const MlpModel& anchor,
                                    double lambda, const TrainerConfig& cfg) {
    cfg.validate();
    check_task(model, task);
    require(lambda >= 0.0, "l2_train_task: lambda must be >= 0");
    const HeadSlice head = task.head();
    Optimizer opt(cfg, model);
    return batch_loop(task, cfg, nullptr, [&](const Batch& b, long update) {
        auto res = loss_and_grads(model, b.images, b.labels, false, head);
        if (lambda != 0.0) {  // exact penalty gradient 2*lambda*(theta - anchor)
            for (std::size_t li = 0; li < model.layers.size(); ++li) {
                res.grads.weight_grads[li] +=
                    2.0 * lambda * (model.layers[li].weight - anchor.layers[li].weight);
                res.grads.bias_grads[li] += 2.0 * lambda * (model.layers[li].bias - anchor.layers[li].bias);
            }
        }
        opt.step(model, res.grads);
        return TraceRow{task.id, update, 0.0, 0.0, 0.0, 0.0, res.loss, cfg.learning_rate};
    });
}

std::vector<double> per_task_accuracies(const MlpModel& model, const TaskStream& stream, int upto_k) {
    require(upto_k >= 0 && upto_k < static_cast<int>(stream.size()), "retained_accuracy: upto_k out of range");
    require(model.output_dim() >= stream.output_dim,
            "retained_accuracy: model output dim " + std::to_string(model.output_dim()) +
                " below the stream requirement " + std::to_string(stream.output_dim) + " for scenario " +
                std::string(to_string(stream.scenario)));
    std::vector<double> accs;
    for (int t = 0; t <= upto_k; ++t) {
        const Task& task = stream.tasks[static_cast<std::size_t>(t)];
        accs.push_back(accuracy(model, task.test.images, task.test.labels, task.head()));
    }
    return accs;
}

double retained_accuracy(const MlpModel& model, const TaskStream& stream, int upto_k) {
    const auto accs = per_task_accuracies(model, stream, upto_k);
    double sum = 0.0;
    for (double a : accs) sum += a;
    return sum / static_cast<double>(accs.size());
}

const char* to_string(Method m) {
    switch (m) {
        case Method::Sequential: return "sequential";
        case Method::L2: return "l2";
        case Method::NaiveRehearsal: return "naive_rehearsal";
        case Method::Bcl: return "bcl";
    }
    return "?";
}

StreamRun run_method_on_stream(Method method, const TaskStream& stream, const std::vector<int>& hidden,
                               const TrainerConfig& cfg, double l2_lambda) {
    require(!stream.tasks.empty(), "run_method_on_stream: empty stream");
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<int> dims;
    dims.push_back(static_cast<int>(stream.tasks.front().train.images.cols()));
    for (int h : hidden) dims.push_back(h);
    dims.push_back(stream.output_dim);

    Rng init_rng = make_rng(cfg.seed, 0x1817);
    StreamRun run;
    run.model = make_mlp(dims, init_rng);
    TaskMemory memory = make_task_memory(cfg.buffer_capacity, cfg.seed);

    for (const Task& task : stream.tasks) {
        std::vector<TraceRow> rows;
        switch (method) {
            case Method::Sequential:
                rows = sequential_train_task(run.model, task, cfg);
                break;
            case Method::L2: {
                const MlpModel anchor = clone_model(run.model);
                rows = l2_train_task(run.model, task, anchor, l2_lambda, cfg);
                break;
            }
            case Method::NaiveRehearsal:
                rows = naive_rehearsal_train_task(run.model, task, memory, cfg);
                break;
            case Method::Bcl:
                rows = bcl_train_task(run.model, task, memory, cfg);
                break;
        }
        run.trace.insert(run.trace.end(), rows.begin(), rows.end());
        if (method == Method::NaiveRehearsal || method == Method::Bcl) update_task_memory(memory, task);
        run.metrics.accuracy.push_back(per_task_accuracies(run.model, stream, task.id));
    }
    run.metrics.retained_accuracy =
        retained_accuracy(run.model, stream, static_cast<int>(stream.size()) - 1);
    run.metrics.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

}  // namespace saddlecl
