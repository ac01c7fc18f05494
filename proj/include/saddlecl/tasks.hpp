#pragma once

#include "saddlecl/mlp.hpp"
#include "saddlecl/rng.hpp"
#include "saddlecl/types.hpp"

#include <cstdint>
#include <map>
#include <utility>

namespace saddlecl {

// The three evaluation scenarios. They differ in how task labels map
// into the model's output space and whether the task identity is
// available at test time.
//   IDL: one shared output space of fixed size, labels remapped per task.
//   ICL: disjoint, cumulative scenario classes; one growing output space.
//   ITL: one output head per task; the head id routes evaluation.
enum class Scenario { ITL, IDL, ICL };

const char* to_string(Scenario s);

struct Dataset {
    Matrix images;  // n x m
    Labels labels;
    int class_count = 0;

    Eigen::Index size() const { return images.rows(); }
};

void validate_dataset(const Dataset& ds, const char* what);

struct Task {
    int id = 0;
    Dataset train;
    Dataset test;
    Scenario scenario = Scenario::IDL;
    std::map<int, int> label_map;  // original class -> scenario class
    int head_id = 0;
    int head_offset = 0;  // column range of this task's logits
    int head_size = 0;

    HeadSlice head() const { return HeadSlice{head_offset, head_size}; }
};

enum class Provenance { Split, Permuted, Synthetic };

struct TaskStream {
    std::vector<Task> tasks;
    std::uint64_t seed = 0;
    Provenance provenance = Provenance::Synthetic;
    Scenario scenario = Scenario::IDL;
    int output_dim = 0;  // model output width required by the scenario

    std::size_t size() const { return tasks.size(); }
};

// Two-class partitions of a labelled dataset, one task per pair. The
// pairs must be disjoint and every named class must exist in the data.
TaskStream make_split_tasks(const Dataset& train, const Dataset& test,
                            const std::vector<std::pair<int, int>>& pairs, Scenario scenario);

// K tasks from one base dataset under pixel permutations. Task 0 keeps
// the identity permutation; later tasks draw independent seeded
// permutations. A task index equal to repeat_task_at reuses the
// previous task's permutation, which makes that boundary a no-op by
// construction. ICL offsets labels by class_count per task.
TaskStream make_permuted_tasks(const Dataset& base_train, const Dataset& base_test, int task_count,
                               Scenario scenario, std::uint64_t seed, int repeat_task_at = -1);

struct SyntheticSpec {
    int task_count = 5;
    int classes_per_task = 2;
    int dim = 50;
    int samples_per_task = 1250;  // split 80/20 into train/test
    double separation = 10.0;
    std::uint64_t seed = 0;

    bool operator==(const SyntheticSpec&) const = default;
};

// Unit-covariance Gaussian blobs. Class means are mutually orthogonal
// directions scaled so that pairwise mean distance equals `separation`
// (when class count <= dim).
Dataset make_synthetic_dataset(int classes, int dim, int samples, double separation, std::uint64_t seed);

TaskStream make_synthetic_tasks(const SyntheticSpec& spec, Scenario scenario);

}  // namespace saddlecl
