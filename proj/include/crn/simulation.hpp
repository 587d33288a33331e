#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crn/config.hpp"
#include "crn/metrics.hpp"

namespace crn::sim {

struct StepRow {
    int rep = 0;
    std::string policy;
    int64_t t = 0;
    size_t selected_count = 0;
    double mean_age = 0.0;
    double peak_age_running = 0.0;
    double mean_error_m = 0.0;
    size_t tracked_count = 0;
    size_t covered_untracked = 0;
    size_t uncovered = 0;
};

// Everything one (policy, replication) run produces.
struct ReplicationResult {
    int rep = 0;
    std::string policy;
    std::vector<StepRow> rows;
    metrics::ErrorHistogram errors;
    metrics::PeakAgeAccumulator peak;
    std::vector<metrics::ScatterPoint> scatter;
    double mean_selected = 0.0;
    int64_t total_selected = 0;
    double age_sum = 0.0;
    int64_t age_count = 0;
    double covered_untracked_sum = 0.0;
    double uncovered_sum = 0.0;
    size_t n_nodes = 0;
    std::vector<double> node_rates;
    double max_node_rate = 0.0;
    double fleet_mean_rate = 0.0;  // total sends / (nodes * steps)
    bool fixed_cardinality_ok = true;  // centralized policies: #N == C every step
    // distributed-policy diagnostics (zero elsewhere)
    int64_t aoii_process_fires = 0;
    int64_t aoii_refresh_fires = 0;
    int64_t aoii_announce_events = 0;
};

struct PolicySummary {
    std::string policy;
    double mean_capacity = 0.0;
    double capacity_stderr = 0.0;
    double p_err_le_100m = 0.0;
    double median_error_m = 0.0;
    double mean_error_m = 0.0;
    std::optional<double> paoi;
    double mean_age = 0.0;
    std::optional<double> scatter_slope;
    double missed_covered_mean = 0.0;
    double uncovered_mean = 0.0;
    double fleet_mean_rate = 0.0;
    double max_node_rate = 0.0;
    bool fixed_cardinality_ok = true;
    metrics::ErrorHistogram errors;
    std::vector<metrics::ScatterPoint> scatter;
};

struct ExperimentResult {
    ScenarioConfig config;
    std::vector<uint64_t> rep_seeds;
    std::vector<PolicySummary> summaries;
    std::vector<ReplicationResult> runs;  // ordered (policy-major, then rep)

    const PolicySummary* find(const std::string& policy) const {
        for (const auto& s : summaries)
            if (s.policy == policy) return &s;
        return nullptr;
    }
};

// One seeded replication of the full per-step loop for one policy.
ReplicationResult run_replication(const ScenarioConfig& config, const std::string& policy,
                                  int rep);

// All configured policies over a common replication seed set. keep_rows
// controls whether per-step rows are retained (steps.csv needs them; the
// acceptance sweeps do not).
ExperimentResult run_experiment(const ScenarioConfig& config, bool keep_rows = true);

}  // namespace crn::sim
