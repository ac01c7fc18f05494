#include "saddlecl/tasks.hpp"

#include <algorithm>
#include <set>

namespace saddlecl {

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::ITL: return "itl";
        case Scenario::IDL: return "idl";
        case Scenario::ICL: return "icl";
    }
    return "?";
}

void validate_dataset(const Dataset& ds, const char* what) {
    require(ds.size() >= 1, std::string(what) + ": dataset is empty");
    require(ds.labels.size() == static_cast<std::size_t>(ds.size()),
            std::string(what) + ": labels length does not match image rows");
    for (int y : ds.labels) {
        require(y >= 0 && y < ds.class_count,
                std::string(what) + ": label " + std::to_string(y) + " outside [0, " +
                    std::to_string(ds.class_count) + ")");
    }
}

namespace {

Dataset select_rows(const Dataset& ds, const std::vector<std::size_t>& rows, int class_count) {
    Dataset out;
    out.class_count = class_count;
    out.images.resize(static_cast<Eigen::Index>(rows.size()), ds.images.cols());
    out.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.images.row(static_cast<Eigen::Index>(i)) = ds.images.row(static_cast<Eigen::Index>(rows[i]));
        out.labels[i] = ds.labels[rows[i]];
    }
    return out;
}

void remap_labels(Dataset& ds, const std::map<int, int>& label_map, int new_class_count) {
    for (int& y : ds.labels) y = label_map.at(y);
    ds.class_count = new_class_count;
}

// head geometry shared by all generators
void assign_head(Task& t, Scenario scenario, int per_task_classes, int total_classes) {
    switch (scenario) {
        case Scenario::IDL:
            t.head_offset = 0;
            t.head_size = per_task_classes;
            break;
        case Scenario::ICL:
            t.head_offset = 0;
            t.head_size = total_classes;
            break;
        case Scenario::ITL:
            t.head_offset = t.id * per_task_classes;
            t.head_size = per_task_classes;
            break;
    }
    t.head_id = t.id;
}

int stream_output_dim(Scenario scenario, int per_task_classes, int total_classes, int task_count) {
    switch (scenario) {
        case Scenario::IDL: return per_task_classes;
        case Scenario::ICL: return total_classes;
        case Scenario::ITL: return per_task_classes * task_count;
    }
    return 0;
}

}  // namespace

TaskStream make_split_tasks(const Dataset& train, const Dataset& test,
                            const std::vector<std::pair<int, int>>& pairs, Scenario scenario) {
    validate_dataset(train, "make_split_tasks(train)");
    validate_dataset(test, "make_split_tasks(test)");
    require(!pairs.empty(), "make_split_tasks: no class pairs given");

    std::set<int> seen;
    for (auto [a, b] : pairs) {
        require(a != b, "make_split_tasks: pair with identical classes");
        require(seen.insert(a).second && seen.insert(b).second,
                "make_split_tasks: class pairs overlap");
    }
    std::set<int> train_classes(train.labels.begin(), train.labels.end());
    for (int c : seen)
        require(train_classes.count(c) == 1,
                "make_split_tasks: class " + std::to_string(c) + " absent from the dataset");

    // scenario class = position of the original class in pair order;
    // for the canonical (0,1),(2,3),... layout this is the class itself
    std::map<int, int> global_rank;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        global_rank[pairs[k].first] = static_cast<int>(2 * k);
        global_rank[pairs[k].second] = static_cast<int>(2 * k + 1);
    }
    const int total_classes = static_cast<int>(2 * pairs.size());

    TaskStream stream;
    stream.provenance = Provenance::Split;
    stream.scenario = scenario;
    stream.output_dim = stream_output_dim(scenario, 2, total_classes, static_cast<int>(pairs.size()));

    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [a, b] = pairs[k];
        Task t;
        t.id = static_cast<int>(k);
        t.scenario = scenario;
        if (scenario == Scenario::ICL) {
            t.label_map = {{a, global_rank[a]}, {b, global_rank[b]}};
        } else {
            t.label_map = {{a, 0}, {b, 1}};
        }

        auto collect = [&](const Dataset& src) {
            std::vector<std::size_t> rows;
            for (std::size_t s = 0; s < src.labels.size(); ++s)
                if (src.labels[s] == a || src.labels[s] == b) rows.push_back(s);
            Dataset ds = select_rows(src, rows, src.class_count);
            remap_labels(ds, t.label_map, scenario == Scenario::ICL ? total_classes : 2);
            return ds;
        };
        t.train = collect(train);
        t.test = collect(test);
        require(t.train.size() > 0 && t.test.size() > 0,
                "make_split_tasks: task " + std::to_string(k) + " got no samples");
        assign_head(t, scenario, 2, total_classes);
        stream.tasks.push_back(std::move(t));
    }
    return stream;
}

TaskStream make_permuted_tasks(const Dataset& base_train, const Dataset& base_test, int task_count,
                               Scenario scenario, std::uint64_t seed, int repeat_task_at) {
    validate_dataset(base_train, "make_permuted_tasks(train)");
    validate_dataset(base_test, "make_permuted_tasks(test)");
    require(task_count >= 1, "make_permuted_tasks: task_count must be >= 1");
    require(repeat_task_at != 0, "make_permuted_tasks: task 0 is the identity permutation and cannot repeat");

    const int cc = base_train.class_count;
    const auto dim = static_cast<std::size_t>(base_train.images.cols());

    TaskStream stream;
    stream.provenance = Provenance::Permuted;
    stream.scenario = scenario;
    stream.seed = seed;
    stream.output_dim = stream_output_dim(scenario, cc, cc * task_count, task_count);

    std::vector<std::size_t> prev_perm;
    for (int k = 0; k < task_count; ++k) {
        std::vector<std::size_t> perm(dim);
        if (k == 0) {
            for (std::size_t j = 0; j < dim; ++j) perm[j] = j;
        } else if (k == repeat_task_at) {
            perm = prev_perm;
        } else {
            Rng rng = make_rng(seed, static_cast<std::uint64_t>(k));
            perm = shuffled_indices(dim, rng);
        }

        auto apply = [&](const Dataset& src) {
            Dataset ds;
            ds.class_count = src.class_count;
            ds.labels = src.labels;
            ds.images.resize(src.images.rows(), src.images.cols());
            for (std::size_t j = 0; j < dim; ++j)
                ds.images.col(static_cast<Eigen::Index>(j)) =
                    src.images.col(static_cast<Eigen::Index>(perm[j]));
            return ds;
        };

        Task t;
        t.id = k;
        t.scenario = scenario;
        t.train = apply(base_train);
        t.test = apply(base_test);
        for (int c = 0; c < cc; ++c) t.label_map[c] = (scenario == Scenario::ICL) ? cc * k + c : c;
        if (scenario == Scenario::ICL) {
            for (int& y : t.train.labels) y += cc * k;
            for (int& y : t.test.labels) y += cc * k;
            t.train.class_count = t.test.class_count = cc * task_count;
        }
        assign_head(t, scenario, cc, cc * task_count);
        stream.tasks.push_back(std::move(t));
        prev_perm = std::move(perm);
    }
    return stream;
}

Dataset make_synthetic_dataset(int classes, int dim, int samples, double separation, std::uint64_t seed) {
    require(classes >= 2, "synthetic: need at least two classes");
    require(dim >= 1, "synthetic: dim must be >= 1");
    require(samples >= classes, "synthetic: samples must cover every class (and be > 0)");
    require(separation > 0.0, "synthetic: separation must be > 0");

    Rng rng = make_rng(seed, 0x5d0b);

    // Orthonormalized random directions; means at radius sep/sqrt(2)
    // put every pair of means exactly `separation` apart.
    Matrix means(classes, dim);
    for (int c = 0; c < classes; ++c) {
        Vector v(dim);
        for (Eigen::Index j = 0; j < dim; ++j) v(j) = gaussian(rng);
        for (int p = 0; p < std::min(c, dim); ++p) {
            const Vector prev = means.row(p).transpose();
            v -= prev.dot(v) * prev;
        }
        if (v.norm() < 1e-12) v(c % dim) += 1.0;  // degenerate draw
        means.row(c) = v.normalized().transpose();
    }
    means *= separation / std::sqrt(2.0);

    Dataset ds;
    ds.class_count = classes;
    ds.images.resize(samples, dim);
    ds.labels.resize(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        const int c = s % classes;
        ds.labels[static_cast<std::size_t>(s)] = c;
        for (Eigen::Index j = 0; j < dim; ++j) ds.images(s, j) = means(c, j) + gaussian(rng);
    }
    return ds;
}

TaskStream make_synthetic_tasks(const SyntheticSpec& spec, Scenario scenario) {
    require(spec.task_count >= 1, "synthetic: task_count must be >= 1");
    require(spec.samples_per_task > 0, "synthetic: samples_per_task must be > 0");

    const int cpt = spec.classes_per_task;
    const int total_classes = cpt * spec.task_count;

    TaskStream stream;
    stream.provenance = Provenance::Synthetic;
    stream.scenario = scenario;
    stream.seed = spec.seed;
    stream.output_dim = stream_output_dim(scenario, cpt, total_classes, spec.task_count);

    for (int k = 0; k < spec.task_count; ++k) {
        Dataset all = make_synthetic_dataset(cpt, spec.dim, spec.samples_per_task, spec.separation,
                                             spec.seed ^ (0x9e37u + static_cast<std::uint64_t>(k)));

        // 80/20 train/test by seeded shuffle
        Rng rng = make_rng(spec.seed, 0xc0ffee + static_cast<std::uint64_t>(k));
        std::vector<std::size_t> order = shuffled_indices(static_cast<std::size_t>(all.size()), rng);
        const std::size_t n_train = std::max<std::size_t>(1, (order.size() * 8) / 10);
        std::vector<std::size_t> train_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
        std::vector<std::size_t> test_rows(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
        if (test_rows.empty()) test_rows.push_back(order.front());

        Task t;
        t.id = k;
        t.scenario = scenario;
        t.train = select_rows(all, train_rows, cpt);
        t.test = select_rows(all, test_rows, cpt);
        for (int c = 0; c < cpt; ++c) t.label_map[c] = (scenario == Scenario::ICL) ? cpt * k + c : c;
        if (scenario == Scenario::ICL) {
            for (int& y : t.train.labels) y += cpt * k;
            for (int& y : t.test.labels) y += cpt * k;
            t.train.class_count = t.test.class_count = total_classes;
        }
        assign_head(t, scenario, cpt, total_classes);
        stream.tasks.push_back(std::move(t));
    }
    return stream;
}

}  // namespace saddlecl
