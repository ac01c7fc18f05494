#include "saddlecl/experiment.hpp"

#include "saddlecl/idx.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace saddlecl {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(s);
    while (std::getline(ss, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "dataset.kind", "idx.train_images", "idx.train_labels", "idx.test_images", "idx.test_labels",
        "stream.kind", "scenario", "split.pairs", "permuted.tasks", "permuted.repeat_task_at",
        "synthetic.tasks", "synthetic.classes_per_task", "synthetic.dim", "synthetic.samples_per_task",
        "synthetic.separation", "methods", "repetitions", "base_seed", "hidden", "output_dir",
        "trainer.zeta", "trainer.epochs", "trainer.batch_size", "trainer.learning_rate", "trainer.beta_k",
        "trainer.buffer_capacity", "trainer.ascent_step", "trainer.ascent_normalized",
        "trainer.h_grad_mode", "trainer.optimizer", "trainer.l2_lambda", "gamma.kind", "gamma.ratio"};
    return keys;
}

[[noreturn]] void bad_value(const std::string& key, int line, const std::string& why) {
    throw std::invalid_argument("config line " + std::to_string(line) + ": key '" + key + "': " + why);
}

long to_long(const std::string& key, const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        bad_value(key, line, "expected an integer, got '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v, int line) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        bad_value(key, line, "expected a number, got '" + v + "'");
    }
}

bool to_bool(const std::string& key, const std::string& v, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    bad_value(key, line, "expected true/false, got '" + v + "'");
}

Scenario to_scenario(const std::string& key, const std::string& v, int line) {
    if (v == "itl") return Scenario::ITL;
    if (v == "idl") return Scenario::IDL;
    if (v == "icl") return Scenario::ICL;
    bad_value(key, line, "expected itl/idl/icl, got '" + v + "'");
}

Method to_method(const std::string& key, const std::string& v, int line) {
    if (v == "sequential") return Method::Sequential;
    if (v == "l2") return Method::L2;
    if (v == "naive_rehearsal") return Method::NaiveRehearsal;
    if (v == "bcl") return Method::Bcl;
    bad_value(key, line, "expected sequential/l2/naive_rehearsal/bcl, got '" + v + "'");
}

void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value, int line) {
    if (key == "dataset.kind") {
        if (value != "synthetic" && value != "idx") bad_value(key, line, "expected synthetic or idx");
        cfg.dataset_kind = value;
    } else if (key == "idx.train_images") {
        cfg.idx_train_images = value;
    } else if (key == "idx.train_labels") {
        cfg.idx_train_labels = value;
    } else if (key == "idx.test_images") {
        cfg.idx_test_images = value;
    } else if (key == "idx.test_labels") {
        cfg.idx_test_labels = value;
    } else if (key == "stream.kind") {
        if (value != "synthetic" && value != "split" && value != "permuted")
            bad_value(key, line, "expected synthetic, split or permuted");
        cfg.stream_kind = value;
    } else if (key == "scenario") {
        cfg.scenario = to_scenario(key, value, line);
    } else if (key == "split.pairs") {
        cfg.split_pairs.clear();
        for (const std::string& item : split_list(value, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) bad_value(key, line, "pair '" + item + "' is not a:b");
            cfg.split_pairs.emplace_back(
                static_cast<int>(to_long(key, trim(item.substr(0, colon)), line)),
                static_cast<int>(to_long(key, trim(item.substr(colon + 1)), line)));
        }
    } else if (key == "permuted.tasks") {
        cfg.permuted_tasks = static_cast<int>(to_long(key, value, line));
    } else if (key == "permuted.repeat_task_at") {
        cfg.permuted_repeat_task_at = static_cast<int>(to_long(key, value, line));
    } else if (key == "synthetic.tasks") {
        cfg.synthetic.task_count = static_cast<int>(to_long(key, value, line));
    } else if (key == "synthetic.classes_per_task") {
        cfg.synthetic.classes_per_task = static_cast<int>(to_long(key, value, line));
    } else if (key == "synthetic.dim") {
        cfg.synthetic.dim = static_cast<int>(to_long(key, value, line));
    } else if (key == "synthetic.samples_per_task") {
        cfg.synthetic.samples_per_task = static_cast<int>(to_long(key, value, line));
    } else if (key == "synthetic.separation") {
        cfg.synthetic.separation = to_double(key, value, line);
    } else if (key == "methods") {
        cfg.methods.clear();
        for (const std::string& item : split_list(value, ',')) cfg.methods.push_back(to_method(key, item, line));
    } else if (key == "repetitions") {
        cfg.repetitions = static_cast<int>(to_long(key, value, line));
    } else if (key == "base_seed") {
        cfg.base_seed = static_cast<std::uint64_t>(to_long(key, value, line));
    } else if (key == "hidden") {
        cfg.hidden.clear();
        for (const std::string& item : split_list(value, ','))
            cfg.hidden.push_back(static_cast<int>(to_long(key, item, line)));
    } else if (key == "output_dir") {
        cfg.output_dir = value;
    } else if (key == "trainer.zeta") {
        cfg.trainer.zeta = static_cast<int>(to_long(key, value, line));
    } else if (key == "trainer.epochs") {
        cfg.trainer.epochs = static_cast<int>(to_long(key, value, line));
    } else if (key == "trainer.batch_size") {
        cfg.trainer.batch_size = static_cast<int>(to_long(key, value, line));
    } else if (key == "trainer.learning_rate") {
        cfg.trainer.learning_rate = to_double(key, value, line);
    } else if (key == "trainer.beta_k") {
        cfg.trainer.beta_k = to_double(key, value, line);
    } else if (key == "trainer.buffer_capacity") {
        cfg.trainer.buffer_capacity = static_cast<int>(to_long(key, value, line));
    } else if (key == "trainer.ascent_step") {
        cfg.trainer.ascent_step = to_double(key, value, line);
    } else if (key == "trainer.ascent_normalized") {
        cfg.trainer.ascent_normalized = to_bool(key, value, line);
    } else if (key == "trainer.h_grad_mode") {
        if (value == "surrogate_full")
            cfg.trainer.h_grad_mode = HGradMode::SurrogateFull;
        else if (value == "current_batch_only")
            cfg.trainer.h_grad_mode = HGradMode::CurrentBatchOnly;
        else
            bad_value(key, line, "expected surrogate_full or current_batch_only");
    } else if (key == "trainer.optimizer") {
        if (value == "sgd")
            cfg.trainer.optimizer = OptimizerKind::Sgd;
        else if (value == "adam")
            cfg.trainer.optimizer = OptimizerKind::Adam;
        else
            bad_value(key, line, "expected sgd or adam");
    } else if (key == "trainer.l2_lambda") {
        cfg.l2_lambda = to_double(key, value, line);
    } else if (key == "gamma.kind") {
        if (value != "uniform" && value != "geometric") bad_value(key, line, "expected uniform or geometric");
        cfg.gamma_kind = value;
    } else if (key == "gamma.ratio") {
        cfg.gamma_ratio = to_double(key, value, line);
    } else {
        std::string nearest = known_keys().front();
        std::size_t best = edit_distance(key, nearest);
        for (const std::string& k : known_keys()) {
            const std::size_t d = edit_distance(key, k);
            if (d < best) {
                best = d;
                nearest = k;
            }
        }
        throw std::invalid_argument("config line " + std::to_string(line) + ": unknown key '" + key +
                                    "' (did you mean '" + nearest + "'?)");
    }
}

void validate_config(const ExperimentConfig& cfg) {
    require(cfg.repetitions >= 1, "repetitions must be >= 1");
    require(!cfg.methods.empty(), "methods must not be empty");
    require(!cfg.hidden.empty(), "hidden must name at least one layer width");
    for (int h : cfg.hidden) require(h >= 1, "hidden widths must be >= 1");
    require(cfg.synthetic.task_count >= 1, "synthetic.tasks must be >= 1");
    require(cfg.synthetic.samples_per_task >= 1, "synthetic.samples_per_task must be >= 1");
    require(cfg.synthetic.separation > 0.0, "synthetic.separation must be > 0");
    require(cfg.permuted_tasks >= 1, "permuted.tasks must be >= 1");
    require(cfg.l2_lambda >= 0.0, "trainer.l2_lambda must be >= 0");
    if (cfg.gamma_kind == "geometric")
        require(cfg.gamma_ratio > 0.0 && cfg.gamma_ratio < 1.0, "gamma.ratio must lie in (0,1)");
    cfg.trainer.validate();
    if (cfg.dataset_kind == "idx") {
        for (const std::string& p :
             {cfg.idx_train_images, cfg.idx_train_labels, cfg.idx_test_images, cfg.idx_test_labels}) {
            require(!p.empty(), "idx dataset requires all four idx.* paths");
            require(std::filesystem::exists(p), "idx file does not exist: " + p);
        }
        require(cfg.stream_kind != "synthetic", "stream.kind=synthetic needs dataset.kind=synthetic");
    }
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string raw;
    int line = 0;
    while (std::getline(ss, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        raw = trim(raw);
        if (raw.empty()) continue;
        const auto eq = raw.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line) + ": expected 'key = value'");
        set_key(cfg, trim(raw.substr(0, eq)), trim(raw.substr(eq + 1)), line);
    }
    validate_config(cfg);
    return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "dataset.kind = " << cfg.dataset_kind << "\n";
    if (!cfg.idx_train_images.empty()) out << "idx.train_images = " << cfg.idx_train_images << "\n";
    if (!cfg.idx_train_labels.empty()) out << "idx.train_labels = " << cfg.idx_train_labels << "\n";
    if (!cfg.idx_test_images.empty()) out << "idx.test_images = " << cfg.idx_test_images << "\n";
    if (!cfg.idx_test_labels.empty()) out << "idx.test_labels = " << cfg.idx_test_labels << "\n";
    out << "stream.kind = " << cfg.stream_kind << "\n";
    out << "scenario = " << to_string(cfg.scenario) << "\n";
    out << "split.pairs = ";
    for (std::size_t i = 0; i < cfg.split_pairs.size(); ++i) {
        if (i) out << ",";
        out << cfg.split_pairs[i].first << ":" << cfg.split_pairs[i].second;
    }
    out << "\n";
    out << "permuted.tasks = " << cfg.permuted_tasks << "\n";
    out << "permuted.repeat_task_at = " << cfg.permuted_repeat_task_at << "\n";
    out << "synthetic.tasks = " << cfg.synthetic.task_count << "\n";
    out << "synthetic.classes_per_task = " << cfg.synthetic.classes_per_task << "\n";
    out << "synthetic.dim = " << cfg.synthetic.dim << "\n";
    out << "synthetic.samples_per_task = " << cfg.synthetic.samples_per_task << "\n";
    out << "synthetic.separation = " << fmt17(cfg.synthetic.separation) << "\n";
    out << "methods = ";
    for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
        if (i) out << ",";
        out << to_string(cfg.methods[i]);
    }
    out << "\n";
    out << "repetitions = " << cfg.repetitions << "\n";
    out << "base_seed = " << cfg.base_seed << "\n";
    out << "hidden = ";
    for (std::size_t i = 0; i < cfg.hidden.size(); ++i) {
        if (i) out << ",";
        out << cfg.hidden[i];
    }
    out << "\n";
    out << "output_dir = " << cfg.output_dir << "\n";
    out << "trainer.zeta = " << cfg.trainer.zeta << "\n";
    out << "trainer.epochs = " << cfg.trainer.epochs << "\n";
    out << "trainer.batch_size = " << cfg.trainer.batch_size << "\n";
    out << "trainer.learning_rate = " << fmt17(cfg.trainer.learning_rate) << "\n";
    out << "trainer.beta_k = " << fmt17(cfg.trainer.beta_k) << "\n";
    out << "trainer.buffer_capacity = " << cfg.trainer.buffer_capacity << "\n";
    out << "trainer.ascent_step = " << fmt17(cfg.trainer.ascent_step) << "\n";
    out << "trainer.ascent_normalized = " << (cfg.trainer.ascent_normalized ? "true" : "false") << "\n";
    out << "trainer.h_grad_mode = "
        << (cfg.trainer.h_grad_mode == HGradMode::SurrogateFull ? "surrogate_full" : "current_batch_only")
        << "\n";
    out << "trainer.optimizer = " << (cfg.trainer.optimizer == OptimizerKind::Sgd ? "sgd" : "adam") << "\n";
    out << "trainer.l2_lambda = " << fmt17(cfg.l2_lambda) << "\n";
    out << "gamma.kind = " << cfg.gamma_kind << "\n";
    out << "gamma.ratio = " << fmt17(cfg.gamma_ratio) << "\n";
    return out.str();
}

void apply_override(ExperimentConfig& cfg, const std::string& key_value) {
    const auto eq = key_value.find('=');
    require(eq != std::string::npos, "--set expects key=value, got '" + key_value + "'");
    set_key(cfg, trim(key_value.substr(0, eq)), trim(key_value.substr(eq + 1)), 0);
    validate_config(cfg);
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    require(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must lie in (0,1)");
    Rng rng = make_rng(seed, 0x5911);
    const auto order = shuffled_indices(static_cast<std::size_t>(ds.size()), rng);
    const auto n_train =
        std::max<std::size_t>(1, static_cast<std::size_t>(train_fraction * static_cast<double>(order.size())));

    auto take = [&](std::size_t begin, std::size_t end) {
        Dataset out;
        out.class_count = ds.class_count;
        out.images.resize(static_cast<Eigen::Index>(end - begin), ds.images.cols());
        out.labels.resize(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            out.images.row(static_cast<Eigen::Index>(i - begin)) =
                ds.images.row(static_cast<Eigen::Index>(order[i]));
            out.labels[i - begin] = ds.labels[order[i]];
        }
        return out;
    };
    require(n_train < order.size(), "split_train_test: dataset too small to split");
    return {take(0, n_train), take(n_train, order.size())};
}

TaskStream build_stream(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (cfg.stream_kind == "synthetic") {
        SyntheticSpec spec = cfg.synthetic;
        spec.seed = seed;
        return make_synthetic_tasks(spec, cfg.scenario);
    }

    Dataset train, test;
    if (cfg.dataset_kind == "idx") {
        IdxContent timg = load_idx(cfg.idx_train_images);
        IdxContent tlab = load_idx(cfg.idx_train_labels);
        IdxContent eimg = load_idx(cfg.idx_test_images);
        IdxContent elab = load_idx(cfg.idx_test_labels);
        require(timg.is_images && eimg.is_images && !tlab.is_images && !elab.is_images,
                "idx paths are mixed up: images/labels magics do not match their roles");
        int cc = 0;
        for (int y : tlab.labels) cc = std::max(cc, y + 1);
        for (int y : elab.labels) cc = std::max(cc, y + 1);
        train = Dataset{std::move(timg.images), std::move(tlab.labels), cc};
        test = Dataset{std::move(eimg.images), std::move(elab.labels), cc};
    } else {
        const Dataset base =
            make_synthetic_dataset(cfg.synthetic.classes_per_task, cfg.synthetic.dim,
                                   cfg.synthetic.samples_per_task, cfg.synthetic.separation, seed);
        std::tie(train, test) = split_train_test(base, 0.8, seed);
    }

    if (cfg.stream_kind == "split") return make_split_tasks(train, test, cfg.split_pairs, cfg.scenario);
    return make_permuted_tasks(train, test, cfg.permuted_tasks, cfg.scenario, seed,
                               cfg.permuted_repeat_task_at);
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

void emit_trace(const std::vector<TraceRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace to " + path.string());
    out << "k,i,beta_term,forgetting_term,generalization_term,h_total,current_loss,alpha\n";
    for (const TraceRow& r : rows) {
        out << r.k << ',' << r.i << ',' << fmt17(r.beta_term) << ',' << fmt17(r.forgetting_term) << ','
            << fmt17(r.generalization_term) << ',' << fmt17(r.h_total) << ',' << fmt17(r.current_loss) << ','
            << fmt17(r.alpha) << '\n';
    }
    if (!out.good()) throw std::runtime_error("write failed for " + path.string());
}

std::vector<TraceRow> read_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read trace from " + path.string());
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "trace file is empty: " + path.string());
    require(line == "k,i,beta_term,forgetting_term,generalization_term,h_total,current_loss,alpha",
            "unexpected trace header in " + path.string());
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto f = split_list(line, ',');
        require(f.size() == 8, "trace row with " + std::to_string(f.size()) + " fields in " + path.string());
        TraceRow r;
        r.k = std::stoi(f[0]);
        r.i = std::stol(f[1]);
        r.beta_term = std::stod(f[2]);
        r.forgetting_term = std::stod(f[3]);
        r.generalization_term = std::stod(f[4]);
        r.h_total = std::stod(f[5]);
        r.current_loss = std::stod(f[6]);
        r.alpha = std::stod(f[7]);
        rows.push_back(r);
    }
    return rows;
}

namespace {

struct RunJob {
    Method method;
    std::uint64_t seed;
    std::size_t method_slot;
    std::size_t seed_slot;
};

int thread_cap() {
    const char* env = std::getenv("SADDLE_CL_THREADS");
    if (env == nullptr) return 1;
    const int v = std::atoi(env);
    return v >= 1 ? v : 1;
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    validate_config(cfg);
    const fs::path out_dir = cfg.output_dir;
    fs::create_directories(out_dir);
    fs::create_directories(out_dir / "runs");

    std::ofstream(out_dir / "config.txt") << serialize_config(cfg);

    ResultTable table;
    table.scenario = cfg.scenario;
    for (int r = 0; r < cfg.repetitions; ++r) table.seeds.push_back(cfg.base_seed + static_cast<std::uint64_t>(r));
    {
        std::ofstream seeds_out(out_dir / "seeds.txt");
        for (std::uint64_t s : table.seeds) seeds_out << s << "\n";
    }

    std::vector<RunJob> jobs;
    table.rows.resize(cfg.methods.size());
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        table.rows[m].method = cfg.methods[m];
        table.rows[m].per_seed_ra.assign(table.seeds.size(), 0.0);
        for (std::size_t s = 0; s < table.seeds.size(); ++s)
            jobs.push_back({cfg.methods[m], table.seeds[s], m, s});
    }

    std::vector<std::string> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t j = next.fetch_add(1);
            if (j >= jobs.size()) return;
            const RunJob& job = jobs[j];
            try {
                TrainerConfig tc = cfg.trainer;
                tc.seed = job.seed;
                tc.gamma = (cfg.gamma_kind == "geometric") ? GammaSchedule::geometric(cfg.gamma_ratio)
                                                           : GammaSchedule::uniform();
                const TaskStream stream = build_stream(cfg, job.seed);
                const StreamRun run =
                    run_method_on_stream(job.method, stream, cfg.hidden, tc, cfg.l2_lambda);

                const fs::path run_dir =
                    out_dir / "runs" / to_string(job.method) / ("seed_" + std::to_string(job.seed));
                fs::create_directories(run_dir);
                emit_trace(run.trace, run_dir / "trace.csv");
                {
                    std::ofstream acc(run_dir / "accuracy.csv");
                    acc << "after_task,task,accuracy\n";
                    for (std::size_t k = 0; k < run.metrics.accuracy.size(); ++k)
                        for (std::size_t t = 0; t < run.metrics.accuracy[k].size(); ++t)
                            acc << k << ',' << t << ',' << fmt17(run.metrics.accuracy[k][t]) << '\n';
                }
                table.rows[job.method_slot].per_seed_ra[job.seed_slot] = run.metrics.retained_accuracy;
            } catch (const std::exception& e) {
                errors[j] = e.what();
            }
        }
    };

    const int n_threads = std::min<int>(thread_cap(), static_cast<int>(jobs.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    std::string failures;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (!errors[j].empty()) {
            failures += std::string(to_string(jobs[j].method)) + " seed " + std::to_string(jobs[j].seed) +
                        ": " + errors[j] + "\n";
        }
    }
    if (!failures.empty()) {
        std::ofstream(out_dir / "errors.log") << failures;
        throw std::runtime_error("run failures:\n" + failures);
    }

    for (MethodResult& row : table.rows) {
        row.mean = mean_of(row.per_seed_ra);
        row.stddev = stddev_of(row.per_seed_ra);
    }

    {
        std::ofstream res(out_dir / "results.csv");
        res << "method,scenario,seed,retained_accuracy\n";
        for (const MethodResult& row : table.rows)
            for (std::size_t s = 0; s < table.seeds.size(); ++s)
                res << to_string(row.method) << ',' << to_string(table.scenario) << ',' << table.seeds[s]
                    << ',' << fmt17(row.per_seed_ra[s]) << '\n';
    }
    {
        std::ofstream sum(out_dir / "summary.txt");
        sum << "scenario: " << to_string(table.scenario) << "\n";
        for (const MethodResult& row : table.rows) {
            sum << to_string(row.method) << ": RA " << row.mean << " +/- " << row.stddev << " over "
                << table.seeds.size() << " seeds\n";
        }
    }
    {
        nlohmann::json j;
        j["scenario"] = to_string(table.scenario);
        for (const MethodResult& row : table.rows) {
            nlohmann::json r;
            r["mean"] = row.mean;
            r["stddev"] = row.stddev;
            r["per_seed"] = row.per_seed_ra;
            j["methods"][to_string(row.method)] = r;
        }
        std::ofstream(out_dir / "summary.json") << j.dump(2) << "\n";
    }
    return table;
}

}  // namespace saddlecl
