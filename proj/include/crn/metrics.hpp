#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "crn/dynamics.hpp"
#include "crn/fusion_center.hpp"

namespace crn::metrics {

using dynamics::TargetTruth;
using scene::CoverageDisk;
using scene::Vec2;

constexpr double kMatchRadiusKm = 0.5;  // truth-association gate, metrics only

struct TrackObservation {
    int fc_id = -1;
    int64_t age = 0;
    double error_m = -1.0;  // < 0 when unmatched
    int matched_truth = -1;
};

struct StepRecord {
    int64_t t = 0;
    size_t selected_count = 0;
    std::vector<TrackObservation> tracks;
    size_t covered_untracked = 0;
    size_t uncovered = 0;

    double mean_age() const {
        if (tracks.empty()) return 0.0;
        double s = 0.0;
        for (const auto& tr : tracks) s += double(tr.age);
        return s / double(tracks.size());
    }

    double mean_error_m() const {
        double s = 0.0;
        size_t n = 0;
        for (const auto& tr : tracks) {
            if (tr.error_m >= 0.0) {
                s += tr.error_m;
                ++n;
            }
        }
        return n ? s / double(n) : 0.0;
    }
};

// (covered-but-untracked, uncovered) counts for the live targets.
inline std::pair<size_t, size_t> missed_targets(const std::vector<TargetTruth>& truths,
                                                const std::vector<CoverageDisk>& disks,
                                                const std::vector<fc::FcTrack>& tracks) {
    size_t covered_untracked = 0, uncovered = 0;
    for (const auto& tgt : truths) {
        if (!tgt.alive) continue;
        bool covered = false;
        for (const auto& d : disks) {
            if (d.covers(tgt.position)) {
                covered = true;
                break;
            }
        }
        if (!covered) {
            ++uncovered;
            continue;
        }
        bool tracked = false;
        for (const auto& trk : tracks) {
            if (scene::dist(trk.position(), tgt.position) <= kMatchRadiusKm) {
                tracked = true;
                break;
            }
        }
        if (!tracked) ++covered_untracked;
    }
    return {covered_untracked, uncovered};
}

// Per-step snapshot, taken after ingest and prune. Each FC track is matched
// to the nearest alive truth within 500 m; farther tracks count as
// unmatched (their error is excluded, not clamped).
inline StepRecord record_step(const std::vector<TargetTruth>& truths,
                              const std::vector<CoverageDisk>& disks,
                              const std::vector<fc::FcTrack>& tracks, size_t selected_count,
                              int64_t t) {
    StepRecord rec;
    rec.t = t;
    rec.selected_count = selected_count;
    rec.tracks.reserve(tracks.size());
    for (const auto& trk : tracks) {
        TrackObservation obs;
        obs.fc_id = trk.fc_id;
        obs.age = trk.age(t);
        const Vec2 pos = trk.position();
        double best = kMatchRadiusKm;
        for (const auto& tgt : truths) {
            if (!tgt.alive) continue;
            const double d = scene::dist(pos, tgt.position);
            if (d <= best) {
                best = d;
                obs.matched_truth = tgt.id;
            }
        }
        if (obs.matched_truth >= 0) obs.error_m = best * 1000.0;
        rec.tracks.push_back(obs);
    }
    auto [cu, uc] = missed_targets(truths, disks, tracks);
    rec.covered_untracked = cu;
    rec.uncovered = uc;
    return rec;
}

// --- peak age ---------------------------------------------------------------

struct PeakAgeAccumulator {
    int64_t count = 0;
    double sum = 0.0;

    // one sample per update event after the first on each track
    void record_reset(int64_t pre_reset_age) {
        if (pre_reset_age >= 1) {
            count += 1;
            sum += double(pre_reset_age);
        }
    }

    // absent (nullopt) when no update was ever recorded
    std::optional<double> peak_age() const {
        if (count == 0) return std::nullopt;
        return sum / double(count);
    }
};

// --- error distribution -------------------------------------------------------

// Fixed-width histogram over meters; keeps medians and CDF queries cheap for
// millions of samples.
struct ErrorHistogram {
    static constexpr double kBinM = 1.0;
    static constexpr size_t kBins = 5000;

    std::vector<int64_t> bins = std::vector<int64_t>(kBins + 1, 0);
    int64_t count = 0;
    double sum = 0.0;

    void add(double error_m) {
        size_t b = static_cast<size_t>(error_m / kBinM);
        if (b > kBins) b = kBins;
        bins[b] += 1;
        count += 1;
        sum += error_m;
    }

    void merge(const ErrorHistogram& other) {
        for (size_t i = 0; i <= kBins; ++i) bins[i] += other.bins[i];
        count += other.count;
        sum += other.sum;
    }

    double cdf_at(double threshold_m) const {
        if (count == 0) return 0.0;
        int64_t c = 0;
        const size_t upto = std::min(kBins, static_cast<size_t>(threshold_m / kBinM));
        for (size_t i = 0; i <= upto; ++i) c += bins[i];
        return double(c) / double(count);
    }

    double quantile(double q) const {
        if (count == 0) return 0.0;
        const int64_t target = static_cast<int64_t>(std::ceil(q * double(count)));
        int64_t c = 0;
        for (size_t i = 0; i <= kBins; ++i) {
            c += bins[i];
            if (c >= target) return (double(i) + 0.5) * kBinM;
        }
        return double(kBins) * kBinM;
    }

    double median() const { return quantile(0.5); }
    double mean() const { return count ? sum / double(count) : 0.0; }
};

inline std::vector<double> error_cdf(const ErrorHistogram& h, const std::vector<double>& thresholds) {
    std::vector<double> out;
    out.reserve(thresholds.size());
    for (double th : thresholds) out.push_back(h.cdf_at(th));
    return out;
}

// --- entropy-rate / update-rate scatter -----------------------------------------

struct ScatterPoint {
    int target_id = -1;
    double entropy_rate = 0.0;
    double update_rate = 0.0;
};

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    bool valid = false;
};

inline OlsFit entropy_update_fit(const std::vector<ScatterPoint>& pts) {
    OlsFit fit;
    const size_t n = pts.size();
    if (n < 2) return fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : pts) {
        sx += p.entropy_rate;
        sy += p.update_rate;
        sxx += p.entropy_rate * p.entropy_rate;
        sxy += p.entropy_rate * p.update_rate;
    }
    const double denom = double(n) * sxx - sx * sx;
    if (std::abs(denom) < 1e-12) return fit;  // degenerate: all x equal
    fit.slope = (double(n) * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / double(n);
    fit.valid = true;
    return fit;
}

// Per-target update-rate bookkeeping: a target counts as updated in a step
// when its nearest matched FC track resets (age 0) that step.
struct TargetRateAccumulator {
    std::map<int, int64_t> tracked_steps;
    std::map<int, int64_t> reset_steps;
    std::map<int, double> entropy;

    void observe_step(const StepRecord& rec, const std::vector<TargetTruth>& truths) {
        std::map<int, const TrackObservation*> best;
        for (const auto& obs : rec.tracks) {
            if (obs.matched_truth < 0) continue;
            auto it = best.find(obs.matched_truth);
            if (it == best.end() || obs.error_m < it->second->error_m)
                best[obs.matched_truth] = &obs;
        }
        for (const auto& [tid, obs] : best) {
            tracked_steps[tid] += 1;
            if (obs->age == 0) reset_steps[tid] += 1;
        }
        for (const auto& tgt : truths) {
            if (entropy.find(tgt.id) == entropy.end())
                entropy[tgt.id] = dynamics::entropy_rate(tgt.transition);
        }
    }

    std::vector<ScatterPoint> points(int64_t min_tracked = 50) const {
        std::vector<ScatterPoint> out;
        for (const auto& [tid, steps] : tracked_steps) {
            if (steps < min_tracked) continue;
            ScatterPoint p;
            p.target_id = tid;
            auto he = entropy.find(tid);
            p.entropy_rate = he != entropy.end() ? he->second : 0.0;
            auto rs = reset_steps.find(tid);
            p.update_rate = double(rs != reset_steps.end() ? rs->second : 0) / double(steps);
            out.push_back(p);
        }
        return out;
    }
};

}  // namespace crn::metrics
