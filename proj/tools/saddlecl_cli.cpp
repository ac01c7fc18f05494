#include "saddlecl/experiment.hpp"
#include "saddlecl/game.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace saddlecl;

namespace {

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
    ExperimentConfig cfg;
    try {
        cfg = parse_config_file(config_path);
        for (const std::string& kv : overrides) apply_override(cfg, kv);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    try {
        const ResultTable table = run_experiment(cfg);
        std::cout << "scenario " << to_string(table.scenario) << ", " << table.seeds.size()
                  << " seeds, results in " << cfg.output_dir << "\n";
        for (const MethodResult& row : table.rows) {
            std::printf("  %-16s RA %.4f +/- %.4f\n", to_string(row.method), row.mean, row.stddev);
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "run failure: " << e.what() << "\n";
        return 2;
    }
}

int cmd_saddle_lab(const std::string& game_name, double alpha0, const std::string& decay, double rate,
                   double factor, long iters, double x0, double theta0, const std::string& leader,
                   const std::string& out_path) {
    try {
        AnalyticGame game;
        if (game_name == "quadratic")
            game = quadratic_saddle_game();
        else if (game_name == "bilinear")
            game = bilinear_game();
        else if (game_name == "concave")
            game = concave_peak_game();
        else
            throw std::invalid_argument("unknown game '" + game_name + "' (quadratic, bilinear, concave)");

        const StepSchedule sched = (decay == "exponential") ? StepSchedule::exponential(alpha0, factor)
                                                            : StepSchedule::inverse(alpha0, rate);
        const LeaderRule rule = (leader == "plain") ? LeaderRule::Plain : LeaderRule::Normalized;

        Vector x(1), th(game_name == "concave" ? 0 : 1);
        x << x0;
        if (th.size() > 0) th << theta0;

        const Trajectory traj = play_sequential_game(game, x, th, sched, iters, rule);
        if (!out_path.empty()) write_trajectory_csv(traj, out_path);

        const TrajectoryPoint& last = traj.points.back();
        const double norm = std::sqrt(last.x.squaredNorm() + last.theta.squaredNorm());
        std::printf("%s: %ld iterations, final |(x,theta)| = %.6g, H = %.6g\n", game.name.c_str(), iters,
                    norm, last.h_after);
        if (game.known_saddle) {
            const SaddleCertificate cert = check_saddle(game, last.x, last.theta, 500, 0.1, 1e-6);
            std::printf("saddle certificate at the final iterate: %s (worst violation %.3g)\n",
                        cert.holds ? "holds" : "fails", cert.worst_violation);
        }
        if (!out_path.empty()) std::printf("trajectory written to %s\n", out_path.c_str());
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "run failure: " << e.what() << "\n";
        return 2;
    }
}

// central finite differences against the analytic gradients on random
// small models
int cmd_gradcheck(int draws, std::uint64_t seed) {
    Rng rng = make_rng(seed, 0x93ad);
    const double h = 1e-5;
    double worst = 0.0;
    long bad = 0, total = 0;

    for (int rep = 0; rep < draws; ++rep) {
        const MlpModel model = make_mlp({4, 6, 3}, rng);
        Matrix batch(5, 4);
        for (Eigen::Index r = 0; r < batch.rows(); ++r)
            for (Eigen::Index c = 0; c < batch.cols(); ++c) batch(r, c) = gaussian(rng);
        Labels labels(5);
        for (int& y : labels) y = static_cast<int>(rng_index(rng, 3));

        const LossResult res = loss_and_grads(model, batch, labels, true);
        auto probe = [&](double analytic, double plus, double minus) {
            const double numeric = (plus - minus) / (2.0 * h);
            const double diff = std::abs(analytic - numeric);
            const double scale = std::max(std::abs(analytic), std::abs(numeric));
            ++total;
            worst = std::max(worst, diff);
            if (diff > 1e-7 && diff > 1e-4 * scale) ++bad;
        };
        for (std::size_t li = 0; li < model.layers.size(); ++li) {
            for (Eigen::Index r = 0; r < model.layers[li].weight.rows(); ++r)
                for (Eigen::Index c = 0; c < model.layers[li].weight.cols(); ++c) {
                    MlpModel mp = model, mm = model;
                    mp.layers[li].weight(r, c) += h;
                    mm.layers[li].weight(r, c) -= h;
                    probe(res.grads.weight_grads[li](r, c), batch_loss(mp, batch, labels),
                          batch_loss(mm, batch, labels));
                }
            for (Eigen::Index r = 0; r < model.layers[li].bias.size(); ++r) {
                MlpModel mp = model, mm = model;
                mp.layers[li].bias(r) += h;
                mm.layers[li].bias(r) -= h;
                probe(res.grads.bias_grads[li](r), batch_loss(mp, batch, labels),
                      batch_loss(mm, batch, labels));
            }
        }
        for (Eigen::Index r = 0; r < batch.rows(); ++r)
            for (Eigen::Index c = 0; c < batch.cols(); ++c) {
                Matrix bp = batch, bm = batch;
                bp(r, c) += h;
                bm(r, c) -= h;
                probe(res.grads.input_grads(r, c), batch_loss(model, bp, labels),
                      batch_loss(model, bm, labels));
            }
    }
    std::printf("gradcheck: %ld components over %d draws, worst abs deviation %.3g, %ld outside "
                "max(1e-4 rel, 1e-7 abs)\n",
                total, draws, worst, bad);
    return bad == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"continual-learning benchmark runner and saddle-point laboratory"};
    app.require_subcommand(0, 1);

    std::string config_path;
    std::vector<std::string> overrides;
    CLI::App* run = app.add_subcommand("run", "run a benchmark experiment from a config file");
    run->add_option("config", config_path, "path to a key = value config file")->required();
    run->add_option("--set", overrides, "override a config key, e.g. --set trainer.zeta=3");

    std::string game_name = "quadratic", decay = "inverse", leader = "plain", out_path;
    double alpha0 = 0.2, rate = 0.01, factor = 0.999, x0 = 1.0, theta0 = 1.0;
    long iters = 5000;
    CLI::App* lab = app.add_subcommand("saddle-lab", "play a sequential game on an analytic payoff");
    lab->add_option("game", game_name, "quadratic | bilinear | concave")->required();
    lab->add_option("--alpha0", alpha0, "initial step size");
    lab->add_option("--decay", decay, "inverse | exponential");
    lab->add_option("--rate", rate, "inverse decay rate c in alpha0/(1+c*i)");
    lab->add_option("--factor", factor, "exponential decay factor d in alpha0*d^i");
    lab->add_option("--iters", iters, "iterations to play");
    lab->add_option("--x0", x0, "leader start");
    lab->add_option("--theta0", theta0, "follower start");
    lab->add_option("--leader", leader, "plain | normalized player-1 rule");
    lab->add_option("--out", out_path, "write the trajectory CSV here");

    int draws = 200;
    std::uint64_t gc_seed = 2024;
    CLI::App* gc = app.add_subcommand("gradcheck", "finite-difference check of the analytic gradients");
    gc->add_option("--draws", draws, "number of random (model, batch) draws");
    gc->add_option("--seed", gc_seed, "rng seed");

    CLI::App* defaults = app.add_subcommand("print-defaults", "print the default configuration");

    bool defaults_flag = false;
    app.add_flag("--print-defaults", defaults_flag, "print the default configuration and exit");

    CLI11_PARSE(app, argc, argv);

    if (defaults_flag) {
        std::cout << serialize_config(ExperimentConfig{});
        return 0;
    }

    if (run->parsed()) return cmd_run(config_path, overrides);
    if (lab->parsed())
        return cmd_saddle_lab(game_name, alpha0, decay, rate, factor, iters, x0, theta0, leader, out_path);
    if (gc->parsed()) return cmd_gradcheck(draws, gc_seed);
    if (defaults->parsed()) {
        std::cout << serialize_config(ExperimentConfig{});
        return 0;
    }
    std::cerr << app.help();
    return 1;
}
