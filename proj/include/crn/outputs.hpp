#pragma once

#include <map>
#include <string>
#include <vector>

#include "crn/simulation.hpp"

namespace crn::sim {

// Writes steps.csv, summary.json and the per-figure plot data for one
// experiment. Formatting is fixed-width-free but locale-independent and
// stable, so identical results serialize to identical bytes.
void emit_outputs(const ExperimentResult& result, const std::string& out_dir,
                  bool emit_plots = false);

// fig9_sweep.csv / fig11 mean-age rows assembled from several experiments at
// different capacities.
struct SweepPoint {
    double capacity = 0.0;
    std::string policy;
    double median_error_m = 0.0;
    double mean_age = 0.0;
    double mean_capacity = 0.0;
};

void emit_sweep_outputs(const std::vector<SweepPoint>& points, const std::string& out_dir,
                        bool emit_plots = false);

std::string format_double(double v);

}  // namespace crn::sim
