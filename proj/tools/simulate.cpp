#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "crn/outputs.hpp"
#include "crn/simulation.hpp"

using crn::sim::ExperimentResult;
using crn::sim::ScenarioConfig;

int main(int argc, char** argv) {
    CLI::App app{"cognitive radar network update-scheduling simulator"};

    std::string config_path;
    std::vector<std::string> policies;
    uint64_t seed = 0;
    bool seed_set = false;
    int reps = -1;
    int steps = -1;
    double capacity = -1.0;
    std::string out_dir = "out";
    int workers = -1;
    std::vector<double> sweep;
    bool emit_plots = false;

    app.add_option("--config", config_path, "JSON config file (defaults used when omitted)");
    app.add_option("--policy", policies, "policy names to run (repeatable)");
    app.add_option("--seed", seed, "master seed")->each([&](const std::string&) { seed_set = true; });
    app.add_option("--reps", reps, "replications");
    app.add_option("--steps", steps, "steps per replication");
    app.add_option("--capacity", capacity, "update capacity C (fractional allowed)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--workers", workers, "worker threads (0 = hardware)");
    app.add_option("--sweep-capacity", sweep, "run once per capacity value and emit fig9 data");
    app.add_flag("--emit-plots", emit_plots, "also render simple SVG charts");

    CLI11_PARSE(app, argc, argv);

    ScenarioConfig cfg;
    if (!config_path.empty()) {
        std::ifstream f(config_path);
        if (!f) {
            std::cerr << "error: cannot read config file: " << config_path << "\n";
            return 1;
        }
        try {
            nlohmann::json j;
            f >> j;
            cfg = j.get<ScenarioConfig>();
        } catch (const std::exception& e) {
            std::cerr << "error: bad config " << config_path << ": " << e.what() << "\n";
            return 1;
        }
    }
    if (!policies.empty()) cfg.policies = policies;
    if (seed_set) cfg.master_seed = seed;
    if (reps > 0) cfg.averaged_simulations = reps;
    if (steps > 0) cfg.steps = steps;
    if (capacity >= 0.0) cfg.C = capacity;
    if (workers >= 0) cfg.workers = workers;

    try {
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (!sweep.empty()) {
            std::vector<crn::sim::SweepPoint> points;
            for (double c : sweep) {
                ScenarioConfig sc = cfg;
                sc.C = c;
                std::fprintf(stderr, "sweep: C=%g ...\n", c);
                const auto result = crn::sim::run_experiment(sc, /*keep_rows=*/false);
                for (const auto& s : result.summaries) {
                    crn::sim::SweepPoint p;
                    p.capacity = c;
                    p.policy = s.policy;
                    p.median_error_m = s.median_error_m;
                    p.mean_age = s.mean_age;
                    p.mean_capacity = s.mean_capacity;
                    points.push_back(p);
                }
            }
            crn::sim::emit_sweep_outputs(points, out_dir, emit_plots);
            std::fprintf(stderr, "wrote sweep outputs to %s\n", out_dir.c_str());
            return 0;
        }

        const ExperimentResult result = crn::sim::run_experiment(cfg, /*keep_rows=*/true);
        crn::sim::emit_outputs(result, out_dir, emit_plots);
        for (const auto& s : result.summaries) {
            std::printf("%-18s capacity=%.3f median_err=%.1fm P(<=100m)=%.3f paoi=%s mean_age=%.2f\n",
                        s.policy.c_str(), s.mean_capacity, s.median_error_m, s.p_err_le_100m,
                        s.paoi ? crn::sim::format_double(*s.paoi).c_str() : "n/a", s.mean_age);
        }
        std::fprintf(stderr, "wrote outputs to %s\n", out_dir.c_str());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
