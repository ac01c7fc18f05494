#pragma once

#include "saddlecl/trainer.hpp"

#include <filesystem>

namespace saddlecl {

// Everything a benchmark run needs, parsed from `key = value` text.
// Unknown keys are rejected with a nearest-key hint; values are
// validated at parse time.
struct ExperimentConfig {
    // dataset
    std::string dataset_kind = "synthetic";  // synthetic | idx
    std::string idx_train_images, idx_train_labels, idx_test_images, idx_test_labels;

    // stream
    std::string stream_kind = "synthetic";  // synthetic | split | permuted
    Scenario scenario = Scenario::ICL;
    std::vector<std::pair<int, int>> split_pairs = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}};
    int permuted_tasks = 10;
    int permuted_repeat_task_at = -1;
    SyntheticSpec synthetic;

    // run
    std::vector<Method> methods = {Method::Sequential, Method::NaiveRehearsal, Method::Bcl};
    int repetitions = 5;
    std::uint64_t base_seed = 1;
    std::vector<int> hidden = {100};
    std::string output_dir = "out";

    // trainer
    TrainerConfig trainer;
    double l2_lambda = 0.01;
    std::string gamma_kind = "uniform";  // uniform | geometric
    double gamma_ratio = 0.5;

    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// One `key = value` line per key, reparses to an equal config.
std::string serialize_config(const ExperimentConfig& cfg);

// Apply a `key=value` override on top of a parsed config.
void apply_override(ExperimentConfig& cfg, const std::string& key_value);

TaskStream build_stream(const ExperimentConfig& cfg, std::uint64_t seed);

// 80/20-style split of a dataset by seeded shuffle.
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double train_fraction, std::uint64_t seed);

struct MethodResult {
    Method method = Method::Sequential;
    std::vector<double> per_seed_ra;
    double mean = 0.0;
    double stddev = 0.0;  // sample std over repetitions
};

struct ResultTable {
    Scenario scenario = Scenario::ICL;
    std::vector<std::uint64_t> seeds;
    std::vector<MethodResult> rows;
};

// Runs every (method, seed) pair, writes per-run artifacts plus the
// aggregate table under cfg.output_dir. Honors SADDLE_CL_THREADS for
// fan-out across runs (default 1).
ResultTable run_experiment(const ExperimentConfig& cfg);

void emit_trace(const std::vector<TraceRow>& rows, const std::filesystem::path& path);
std::vector<TraceRow> read_trace(const std::filesystem::path& path);

double mean_of(const std::vector<double>& v);
double stddev_of(const std::vector<double>& v);

}  // namespace saddlecl
