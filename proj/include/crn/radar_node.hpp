#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "crn/dynamics.hpp"
#include "crn/geometry.hpp"
#include "crn/imm.hpp"
#include "crn/markov.hpp"

namespace crn::node {

using dynamics::MotionModel;
using dynamics::TargetTruth;
using dynamics::TransitionMatrix;
using scene::CoverageDisk;
using scene::Vec2;

// Initialization prior for transition estimates: midpoints of the sampled
// U[0.7,0.9], U[0.5,0.7] ranges.
inline TransitionMatrix transition_prior() {
    return TransitionMatrix::from_stay_probs(0.8, 0.6);
}

struct NodeParams {
    double p_detect = 1.0;
    double p_false_alarm = 0.0;
    int n_resolution_cells = 100;  // converts P_FA into a per-CPI false-alarm count
    double sigma0_km = 0.02;       // 20 m baseline measurement std at zero range
    double sigma_max_km2 = 1.0;    // variance assigned to uncovered pairs (10^6 m^2)
    double gate_mahalanobis2 = 11.0;  // association gate on the innovation
    double miss_inflation = 1.5;      // covariance scale per missed detection
    int confirm_detections = 3;   // #(T*) > 2
    int local_drop_misses = 10;
    double dt = 1.0;
    double filter_sigma_a_cv_kmps2 = 0.001;
    double filter_sigma_a_ct_kmps2 = 0.010;
};

// Range-scaled measurement variance (km^2): sigma0^2 * (1 + (d/r)^2) inside
// the disk, sigma_max outside.
inline double sigma_for(const CoverageDisk& disk, const Vec2& target_pos, const NodeParams& p) {
    const double d = scene::dist(disk.center, target_pos);
    if (d > disk.radius_km) return p.sigma_max_km2;
    const double ratio = d / disk.radius_km;
    return p.sigma0_km * p.sigma0_km * (1.0 + ratio * ratio);
}

struct Measurement {
    int node_id = -1;
    Vec2 position;
    double variance_km2 = 0.0;
    int64_t t = 0;
    bool is_false_alarm = false;  // truth-side bookkeeping only
    int truth_id = -1;            // never used by the tracking path
};

struct LocalTrack {
    int local_id = -1;
    tracking::ImmFilter imm;
    MotionModel gamma_hat = MotionModel::ConstantVelocity;
    int detection_count = 0;
    int64_t last_detection_t = -1;
    int miss_streak = 0;
    bool confirmed = false;
    // transition tallies over consecutive detection-time gamma_hat pairs
    std::array<std::array<int, 2>, 2> tallies{{{0, 0}, {0, 0}}};
    std::optional<Vec2> first_meas;
    double last_meas_var = 0.0;

    bool has_row_data(int row) const { return tallies[row][0] + tallies[row][1] > 0; }
};

// Maximum-likelihood transition estimate from the tallies; rows without a
// single observed pair fall back to the initialization prior.
inline TransitionMatrix estimate_transitions(const LocalTrack& trk) {
    const TransitionMatrix prior = transition_prior();
    TransitionMatrix out = prior;
    for (int i = 0; i < 2; ++i) {
        const double rowsum = trk.tallies[i][0] + trk.tallies[i][1];
        if (rowsum > 0) {
            out.p[i][0] = trk.tallies[i][0] / rowsum;
            out.p[i][1] = trk.tallies[i][1] / rowsum;
        }
    }
    return out;
}

// The raw estimate is the IMM's model-transition prior, but degenerate rows
// lock the mixture permanently: a long constant-velocity stretch drives
// P(CV->CT) to zero so the turn model never re-enters, and a single early
// flicker can tally CT->CV only, zeroing the turn model's persistence.
// Clamp both stay probabilities into a recoverable band for filter use.
inline TransitionMatrix mixing_prior(const LocalTrack& trk, double floor_p = 0.10) {
    const TransitionMatrix est = estimate_transitions(trk);
    const double p_cv_stay = std::clamp(est(0, 0), 0.5, 1.0 - floor_p);
    const double p_ct_stay = std::clamp(est(1, 1), 0.5, 1.0 - floor_p);
    return TransitionMatrix::from_stay_probs(p_cv_stay, p_ct_stay);
}

struct UpdateEntry {
    int local_id = -1;
    Vec2 position;
    Vec2 velocity;
    MotionModel motion_state = MotionModel::ConstantVelocity;
    double variance_km2 = 0.0;          // sigma_{n,m}
    double vel_variance_km2s2 = 1e-4;   // reporting filter's velocity variance
};

struct NodeUpdate {
    int node_id = -1;
    int64_t t = 0;
    std::vector<UpdateEntry> entries;
};

enum class InterestReason { None, TargetEntered, TargetExited, MotionStateChanged };

struct InterestFlag {
    int node_id = -1;
    bool interesting = false;
    InterestReason reason = InterestReason::None;
};

class RadarNode {
public:
    RadarNode() = default;
    RadarNode(int id, const CoverageDisk& disk, const NodeParams& params)
        : id_(id), disk_(disk), params_(params) {}

    int id() const { return id_; }
    const CoverageDisk& disk() const { return disk_; }
    const NodeParams& params() const { return params_; }
    const std::vector<LocalTrack>& tracks() const { return tracks_; }

    // Detection + false-alarm generation for one CPI.
    std::vector<Measurement> observe(const std::vector<TargetTruth>& truths, Rng& rng,
                                     int64_t t) const {
        std::vector<Measurement> out;
        for (const auto& tgt : truths) {
            if (!tgt.alive || !disk_.covers(tgt.position)) continue;
            if (!rng.bernoulli(params_.p_detect)) continue;
            const double var = sigma_for(disk_, tgt.position, params_);
            const double std = std::sqrt(var);
            Measurement m;
            m.node_id = id_;
            m.position = {tgt.position.x + rng.normal(0.0, std),
                          tgt.position.y + rng.normal(0.0, std)};
            m.variance_km2 = var;
            m.t = t;
            m.truth_id = tgt.id;
            out.push_back(m);
        }
        const uint64_t n_fa = rng.binomial(params_.n_resolution_cells, params_.p_false_alarm);
        for (uint64_t i = 0; i < n_fa; ++i) {
            const double rr = disk_.radius_km * std::sqrt(rng.u01());
            const double th = rng.uniform(0.0, 2.0 * M_PI);
            Measurement m;
            m.node_id = id_;
            m.position = {disk_.center.x + rr * std::cos(th), disk_.center.y + rr * std::sin(th)};
            m.variance_km2 = sigma_for(disk_, m.position, params_);
            m.t = t;
            m.is_false_alarm = true;
            out.push_back(m);
        }
        return out;
    }

    // Global-nearest-neighbor association, IMM filtering and track
    // bookkeeping for one CPI. Returns the ids of tracks dropped this step.
    std::vector<int> associate_and_filter(const std::vector<Measurement>& measurements,
                                          int64_t t) {
        newly_confirmed_.clear();
        gamma_changed_.clear();
        dropped_confirmed_.clear();

        struct Cand {
            double d2;
            size_t trk;
            size_t meas;
        };
        std::vector<Cand> cands;
        for (size_t k = 0; k < tracks_.size(); ++k) {
            const auto pred = tracks_[k].imm.predicted_position();
            const tracking::Mat2 S = tracks_[k].imm.predicted_position_cov() +
                                     tracking::Mat2::Identity() * tracks_[k].last_meas_var;
            const tracking::Mat2 Sinv = S.inverse();
            for (size_t j = 0; j < measurements.size(); ++j) {
                tracking::Vec2d innov(measurements[j].position.x - pred(0),
                                      measurements[j].position.y - pred(1));
                const double d2 = innov.dot(Sinv * innov);
                if (d2 <= params_.gate_mahalanobis2) cands.push_back({d2, k, j});
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
            if (a.d2 != b.d2) return a.d2 < b.d2;
            if (a.trk != b.trk) return a.trk < b.trk;
            return a.meas < b.meas;
        });

        std::vector<bool> trk_used(tracks_.size(), false);
        std::vector<bool> meas_used(measurements.size(), false);
        std::vector<int> assignment(tracks_.size(), -1);
        for (const auto& c : cands) {
            if (trk_used[c.trk] || meas_used[c.meas]) continue;
            trk_used[c.trk] = true;
            meas_used[c.meas] = true;
            assignment[c.trk] = static_cast<int>(c.meas);
        }

        for (size_t k = 0; k < tracks_.size(); ++k) {
            auto& trk = tracks_[k];
            if (assignment[k] >= 0) {
                apply_detection_(trk, measurements[assignment[k]], t);
            } else {
                trk.imm.predict();
                trk.imm.inflate(params_.miss_inflation);
                trk.miss_streak += 1;
            }
        }

        // open tentative tracks for leftover measurements
        for (size_t j = 0; j < measurements.size(); ++j) {
            if (meas_used[j]) continue;
            LocalTrack trk;
            trk.local_id = next_track_id_++;
            tracking::ImmConfig icfg;
            icfg.dt = params_.dt;
            icfg.sigma_a_cv_kmps2 = params_.filter_sigma_a_cv_kmps2;
            icfg.sigma_a_ct_kmps2 = params_.filter_sigma_a_ct_kmps2;
            trk.imm = tracking::ImmFilter(
                icfg, tracking::Vec2d(measurements[j].position.x, measurements[j].position.y),
                measurements[j].variance_km2);
            trk.first_meas = measurements[j].position;
            trk.last_meas_var = measurements[j].variance_km2;
            trk.detection_count = 1;
            trk.last_detection_t = t;
            trk.gamma_hat = trk.imm.estimated_model();
            tracks_.push_back(std::move(trk));
        }

        std::vector<int> dropped;
        for (auto it = tracks_.begin(); it != tracks_.end();) {
            if (it->miss_streak >= params_.local_drop_misses) {
                dropped.push_back(it->local_id);
                if (it->confirmed) dropped_confirmed_.push_back(it->local_id);
                it = tracks_.erase(it);
            } else {
                ++it;
            }
        }
        return dropped;
    }

    // Update payload: all confirmed tracks with their current IMM estimate
    // (the prediction, when the latest detection was missed).
    NodeUpdate build_update(int64_t t) const {
        NodeUpdate up;
        up.node_id = id_;
        up.t = t;
        for (const auto& trk : tracks_) {
            if (!trk.confirmed) continue;
            UpdateEntry e;
            e.local_id = trk.local_id;
            const auto pos = trk.imm.position();
            const auto vel = trk.imm.velocity();
            e.position = {pos(0), pos(1)};
            e.velocity = {vel(0), vel(1)};
            e.motion_state = trk.gamma_hat;
            e.variance_km2 = sigma_for(disk_, e.position, params_);
            const auto cov = trk.imm.covariance();
            e.vel_variance_km2s2 = std::max(0.5 * (cov(2, 2) + cov(3, 3)), 1e-8);
            up.entries.push_back(e);
        }
        return up;
    }

    // Edge-triggered: reports only events first observed this CPI.
    InterestFlag interest_flag() const {
        InterestFlag f;
        f.node_id = id_;
        if (!newly_confirmed_.empty()) {
            f.interesting = true;
            f.reason = InterestReason::TargetEntered;
        } else if (!dropped_confirmed_.empty()) {
            f.interesting = true;
            f.reason = InterestReason::TargetExited;
        } else if (!gamma_changed_.empty()) {
            f.interesting = true;
            f.reason = InterestReason::MotionStateChanged;
        }
        return f;
    }

    const std::vector<int>& newly_confirmed() const { return newly_confirmed_; }
    const std::vector<int>& gamma_changed() const { return gamma_changed_; }
    const std::vector<int>& dropped_confirmed() const { return dropped_confirmed_; }

    const LocalTrack* find_track(int local_id) const {
        for (const auto& t : tracks_)
            if (t.local_id == local_id) return &t;
        return nullptr;
    }

private:
    void apply_detection_(LocalTrack& trk, const Measurement& m, int64_t t) {
        const MotionModel prev_gamma = trk.gamma_hat;
        const bool had_detection = trk.detection_count > 0;

        if (trk.detection_count == 1 && trk.first_meas) {
            trk.imm.two_point_init(tracking::Vec2d(trk.first_meas->x, trk.first_meas->y),
                                   tracking::Vec2d(m.position.x, m.position.y), params_.dt,
                                   m.variance_km2);
        }
        trk.imm.update(tracking::Vec2d(m.position.x, m.position.y), m.variance_km2,
                       mixing_prior(trk));
        trk.gamma_hat = trk.imm.estimated_model();
        trk.last_meas_var = m.variance_km2;

        if (had_detection) {
            trk.tallies[static_cast<int>(prev_gamma)][static_cast<int>(trk.gamma_hat)] += 1;
        }
        trk.detection_count += 1;
        trk.last_detection_t = t;
        trk.miss_streak = 0;

        if (!trk.confirmed && trk.detection_count >= params_.confirm_detections) {
            trk.confirmed = true;
            newly_confirmed_.push_back(trk.local_id);
        } else if (trk.confirmed && trk.gamma_hat != prev_gamma) {
            gamma_changed_.push_back(trk.local_id);
        }
    }

    int id_ = -1;
    CoverageDisk disk_;
    NodeParams params_;
    std::vector<LocalTrack> tracks_;
    int next_track_id_ = 0;
    std::vector<int> newly_confirmed_;
    std::vector<int> gamma_changed_;
    std::vector<int> dropped_confirmed_;
};

}  // namespace crn::node
