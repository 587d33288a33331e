#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "crn/geometry.hpp"

namespace crn::sim {

// All simulation parameters. The table1 block mirrors the source scenario
// table verbatim (lambda_n, lambda_m, B, S_n, C, averaged simulations);
// everything else is artifact configuration with documented defaults.
struct ScenarioConfig {
    int config_version = 1;

    // table1
    double lambda_n = 0.2;            // node density per km^2
    double lambda_m = 0.3;            // target density per km^2
    double B_area_km2 = 100.0;        // region area
    double S_n_area_km2 = 10.0;       // per-node coverage area
    double C = 2.0;                   // update capacity per CPI
    int averaged_simulations = 120;   // replications

    // region (rectangle [0,w]x[0,h]; defaults to the square of area B)
    double region_width_km = 10.0;
    double region_height_km = 10.0;

    // simulation
    int steps = 1000;
    uint64_t master_seed = 20240717;
    int workers = 0;  // 0 = hardware concurrency
    std::vector<std::string> policies{"centralized-aoi", "distributed-aoii", "ucb", "random",
                                      "round-robin"};

    // sensing
    double P_D = 1.0;
    double P_FA = 0.0;
    int n_resolution_cells = 100;
    double sigma0_m = 20.0;
    int confirm_detections = 3;
    int local_drop_misses = 10;

    // fusion center
    int64_t delta_max = 30;
    double cluster_gate_km = 0.3;

    // policy knobs
    double alpha_avail = 0.5;
    double gamma_discount = 0.5;

    // target kinematics (free parameters; see README)
    double speed_min_mps = 30.0;
    double speed_max_mps = 50.0;
    double turn_rate_min_radps = 0.5;
    double turn_rate_max_radps = 0.8;
    // target chain stay-probability ranges (drawn per target at birth)
    double chain_stay_cv_min = 0.90;
    double chain_stay_cv_max = 0.98;
    double chain_stay_ct_min = 0.85;
    double chain_stay_ct_max = 0.95;
    double accel_noise_mps2 = 0.5;
    double filter_sigma_a_cv_mps2 = 1.0;
    double filter_sigma_a_ct_mps2 = 10.0;
    double birth_rate_per_km2_step = 9.0e-4;  // calibrated to hold E[M] at lambda_m|B|
    double mean_lifetime_steps = 0.0;         // 0 = no spontaneous landing

    double dt = 1.0;

    double alpha() const { return C / (lambda_n * B_area_km2); }
    double disk_radius_km() const { return scene::disk_radius_for_area(S_n_area_km2); }
    scene::Region region() const { return {region_width_km, region_height_km}; }

    void validate() const {
        auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
        if (lambda_n < 0.0 || lambda_m < 0.0) fail("densities must be >= 0");
        if (B_area_km2 <= 0.0 || S_n_area_km2 <= 0.0) fail("areas must be > 0");
        if (std::abs(region_width_km * region_height_km - B_area_km2) > 1e-6)
            fail("region dimensions disagree with B_area_km2");
        if (P_D < 0.0 || P_D > 1.0) fail("P_D must lie in [0,1]");
        if (P_FA < 0.0 || P_FA > 1.0) fail("P_FA must lie in [0,1]");
        if (C < 0.0) fail("C must be >= 0");
        if (steps <= 0) fail("steps must be > 0");
        if (averaged_simulations <= 0) fail("averaged_simulations must be > 0");
        if (speed_min_mps < 0.0 || speed_max_mps < speed_min_mps) fail("bad speed range");
        if (delta_max <= 0) fail("delta_max must be > 0");
        if (policies.empty()) fail("at least one policy required");
    }
};

inline void to_json(nlohmann::json& j, const ScenarioConfig& c) {
    j = nlohmann::json{
        {"config_version", c.config_version},
        {"table1",
         {{"lambda_n", c.lambda_n},
          {"lambda_m", c.lambda_m},
          {"B_area_km2", c.B_area_km2},
          {"S_n_area_km2", c.S_n_area_km2},
          {"C", c.C},
          {"averaged_simulations", c.averaged_simulations}}},
        {"region", {{"width_km", c.region_width_km}, {"height_km", c.region_height_km}}},
        // workers is execution machinery, not simulation semantics; leaving it
        // out keeps result files byte-identical across --workers values
        {"sim",
         {{"steps", c.steps}, {"master_seed", c.master_seed}, {"policies", c.policies}}},
        {"sensing",
         {{"P_D", c.P_D},
          {"P_FA", c.P_FA},
          {"n_resolution_cells", c.n_resolution_cells},
          {"sigma0_m", c.sigma0_m},
          {"confirm_detections", c.confirm_detections},
          {"local_drop_misses", c.local_drop_misses}}},
        {"fusion", {{"delta_max", c.delta_max}, {"cluster_gate_km", c.cluster_gate_km}}},
        {"policy", {{"alpha_avail", c.alpha_avail}, {"gamma_discount", c.gamma_discount}}},
        {"targets",
         {{"speed_min_mps", c.speed_min_mps},
          {"speed_max_mps", c.speed_max_mps},
          {"turn_rate_min_radps", c.turn_rate_min_radps},
          {"turn_rate_max_radps", c.turn_rate_max_radps},
          {"chain_stay_cv_min", c.chain_stay_cv_min},
          {"chain_stay_cv_max", c.chain_stay_cv_max},
          {"chain_stay_ct_min", c.chain_stay_ct_min},
          {"chain_stay_ct_max", c.chain_stay_ct_max},
          {"accel_noise_mps2", c.accel_noise_mps2},
          {"filter_sigma_a_cv_mps2", c.filter_sigma_a_cv_mps2},
          {"filter_sigma_a_ct_mps2", c.filter_sigma_a_ct_mps2},
          {"birth_rate_per_km2_step", c.birth_rate_per_km2_step},
          {"mean_lifetime_steps", c.mean_lifetime_steps},
          {"dt", c.dt}}}};
}

inline void from_json(const nlohmann::json& j, ScenarioConfig& c) {
    c = ScenarioConfig{};
    c.config_version = j.value("config_version", c.config_version);
    if (j.contains("table1")) {
        const auto& t = j.at("table1");
        c.lambda_n = t.value("lambda_n", c.lambda_n);
        c.lambda_m = t.value("lambda_m", c.lambda_m);
        c.B_area_km2 = t.value("B_area_km2", c.B_area_km2);
        c.S_n_area_km2 = t.value("S_n_area_km2", c.S_n_area_km2);
        c.C = t.value("C", c.C);
        c.averaged_simulations = t.value("averaged_simulations", c.averaged_simulations);
    }
    if (j.contains("region")) {
        const auto& r = j.at("region");
        c.region_width_km = r.value("width_km", std::sqrt(c.B_area_km2));
        c.region_height_km = r.value("height_km", std::sqrt(c.B_area_km2));
    } else {
        c.region_width_km = c.region_height_km = std::sqrt(c.B_area_km2);
    }
    if (j.contains("sim")) {
        const auto& s = j.at("sim");
        c.steps = s.value("steps", c.steps);
        c.master_seed = s.value("master_seed", c.master_seed);
        c.workers = s.value("workers", c.workers);
        c.policies = s.value("policies", c.policies);
    }
    if (j.contains("sensing")) {
        const auto& s = j.at("sensing");
        c.P_D = s.value("P_D", c.P_D);
        c.P_FA = s.value("P_FA", c.P_FA);
        c.n_resolution_cells = s.value("n_resolution_cells", c.n_resolution_cells);
        c.sigma0_m = s.value("sigma0_m", c.sigma0_m);
        c.confirm_detections = s.value("confirm_detections", c.confirm_detections);
        c.local_drop_misses = s.value("local_drop_misses", c.local_drop_misses);
    }
    if (j.contains("fusion")) {
        const auto& f = j.at("fusion");
        c.delta_max = f.value("delta_max", c.delta_max);
        c.cluster_gate_km = f.value("cluster_gate_km", c.cluster_gate_km);
    }
    if (j.contains("policy")) {
        const auto& p = j.at("policy");
        c.alpha_avail = p.value("alpha_avail", c.alpha_avail);
        c.gamma_discount = p.value("gamma_discount", c.gamma_discount);
    }
    if (j.contains("targets")) {
        const auto& t = j.at("targets");
        c.speed_min_mps = t.value("speed_min_mps", c.speed_min_mps);
        c.speed_max_mps = t.value("speed_max_mps", c.speed_max_mps);
        c.turn_rate_min_radps = t.value("turn_rate_min_radps", c.turn_rate_min_radps);
        c.turn_rate_max_radps = t.value("turn_rate_max_radps", c.turn_rate_max_radps);
        c.chain_stay_cv_min = t.value("chain_stay_cv_min", c.chain_stay_cv_min);
        c.chain_stay_cv_max = t.value("chain_stay_cv_max", c.chain_stay_cv_max);
        c.chain_stay_ct_min = t.value("chain_stay_ct_min", c.chain_stay_ct_min);
        c.chain_stay_ct_max = t.value("chain_stay_ct_max", c.chain_stay_ct_max);
        c.accel_noise_mps2 = t.value("accel_noise_mps2", c.accel_noise_mps2);
        c.filter_sigma_a_cv_mps2 = t.value("filter_sigma_a_cv_mps2", c.filter_sigma_a_cv_mps2);
        c.filter_sigma_a_ct_mps2 = t.value("filter_sigma_a_ct_mps2", c.filter_sigma_a_ct_mps2);
        c.birth_rate_per_km2_step = t.value("birth_rate_per_km2_step", c.birth_rate_per_km2_step);
        c.mean_lifetime_steps = t.value("mean_lifetime_steps", c.mean_lifetime_steps);
        c.dt = t.value("dt", c.dt);
    }
}

}  // namespace crn::sim
