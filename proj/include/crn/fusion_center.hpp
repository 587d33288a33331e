#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "crn/imm.hpp"
#include "crn/radar_node.hpp"

namespace crn::fc {

using dynamics::MotionModel;
using node::NodeUpdate;
using scene::Vec2;

struct SourceKey {
    int node_id = -1;
    int local_id = -1;
    auto operator<=>(const SourceKey&) const = default;
};

// One fused track per reporting (node, local-track) pair; the FC performs no
// track-to-track association.
struct FcTrack {
    int fc_id = -1;
    SourceKey source;
    tracking::ImmFilter imm;
    MotionModel motion_state = MotionModel::ConstantVelocity;
    Vec2 velocity;
    int64_t last_update_t = 0;  // v_m
    double last_variance_km2 = 0.0;

    int64_t age(int64_t t) const { return t - last_update_t; }
    Vec2 position() const {
        const auto p = imm.position();
        return {p(0), p(1)};
    }
};

struct AssignmentMap {
    // fc track id -> responsible node
    std::map<int, int> track_to_node;
    // node id -> that node's own local-track ids it is responsible for
    std::map<int, std::vector<int>> responsible_local_ids;
    // (node, local id) -> responsible node, for claim lookups by source
    std::map<SourceKey, int> source_to_node;

    size_t responsibility_count(int node_id) const {
        auto it = responsible_local_ids.find(node_id);
        return it == responsible_local_ids.end() ? 0 : it->second.size();
    }
};

struct CapacityLedger {
    double capacity = 0.0;
    double alpha = 0.0;  // C / (lambda_n |B|)
    int64_t steps = 0;
    int64_t total_selected = 0;
    std::vector<int64_t> per_node;  // cumulative Psi sums

    void record(const std::vector<int>& selected, size_t n_nodes) {
        if (per_node.size() < n_nodes) per_node.resize(n_nodes, 0);
        for (int n : selected) {
            if (n >= 0 && static_cast<size_t>(n) < per_node.size()) per_node[n] += 1;
        }
        total_selected += static_cast<int64_t>(selected.size());
        steps += 1;
    }

    double mean_selected() const { return steps ? double(total_selected) / double(steps) : 0.0; }
    double node_rate(int n) const {
        if (!steps || n < 0 || static_cast<size_t>(n) >= per_node.size()) return 0.0;
        return double(per_node[n]) / double(steps);
    }
};

struct IngestEvent {
    int fc_id = -1;
    int64_t pre_reset_age = 0;
    bool created = false;
};

struct FcParams {
    int64_t delta_max = 30;
    double cluster_gate_km = 0.3;  // dedup radius used only for assignment
    double dt = 1.0;
    double filter_sigma_a_cv_kmps2 = 0.001;
    double filter_sigma_a_ct_kmps2 = 0.010;
};

class FusionCenter {
public:
    FusionCenter() = default;
    FusionCenter(const FcParams& params, std::vector<Vec2> node_positions, double coverage_radius)
        : params_(params), node_positions_(std::move(node_positions)), radius_(coverage_radius) {}

    const std::vector<FcTrack>& tracks() const { return tracks_; }
    std::vector<FcTrack>& tracks() { return tracks_; }
    const FcParams& params() const { return params_; }
    int64_t duplicate_rejects() const { return duplicate_rejects_; }

    // Coast all tracks one step; called once per CPI before updates arrive.
    void predict_all() {
        for (auto& trk : tracks_) trk.imm.predict();
    }

    // Merge the updates received in the interval ending at t (deterministic
    // node-id order is the caller's responsibility). Matching is by source
    // key only.
    std::vector<IngestEvent> ingest_updates(const std::vector<NodeUpdate>& updates, int64_t t) {
        std::vector<IngestEvent> events;
        std::set<SourceKey> seen_this_step;
        for (const auto& up : updates) {
            for (const auto& e : up.entries) {
                const SourceKey key{up.node_id, e.local_id};
                if (!seen_this_step.insert(key).second) {
                    duplicate_rejects_ += 1;
                    continue;
                }
                FcTrack* trk = find_by_source_(key);
                IngestEvent ev;
                if (trk == nullptr) {
                    FcTrack fresh;
                    fresh.fc_id = next_fc_id_++;
                    fresh.source = key;
                    tracking::ImmConfig icfg;
                    icfg.dt = params_.dt;
                    icfg.sigma_a_cv_kmps2 = params_.filter_sigma_a_cv_kmps2;
                    icfg.sigma_a_ct_kmps2 = params_.filter_sigma_a_ct_kmps2;
                    fresh.imm = tracking::ImmFilter(
                        icfg, tracking::Vec2d(e.position.x, e.position.y), e.variance_km2);
                    // seed the velocity block from the reported estimate
                    fresh.imm.two_point_init(
                        tracking::Vec2d(e.position.x - e.velocity.x * params_.dt,
                                        e.position.y - e.velocity.y * params_.dt),
                        tracking::Vec2d(e.position.x, e.position.y), params_.dt, e.variance_km2);
                    fresh.last_update_t = t;
                    fresh.motion_state = e.motion_state;
                    fresh.velocity = e.velocity;
                    fresh.last_variance_km2 = e.variance_km2;
                    tracks_.push_back(std::move(fresh));
                    ev.fc_id = tracks_.back().fc_id;
                    ev.created = true;
                } else {
                    ev.fc_id = trk->fc_id;
                    ev.pre_reset_age = t - trk->last_update_t;
                    // the update is a state estimate: position plus velocity,
                    // weighted by the reporting filter's own uncertainties
                    tracking::Vec4 z;
                    z << e.position.x, e.position.y, e.velocity.x, e.velocity.y;
                    trk->imm.update_with_velocity(z, e.variance_km2, e.vel_variance_km2s2,
                                                  node::transition_prior());
                    // coast with the reported mode: the node's motion-state
                    // call is fresher than anything inferable from sparse
                    // reports
                    trk->imm.set_model_probabilities(
                        e.motion_state == dynamics::MotionModel::ConstantVelocity ? 0.85 : 0.15);
                    trk->motion_state = e.motion_state;
                    trk->velocity = e.velocity;
                    trk->last_update_t = t;
                    trk->last_variance_km2 = e.variance_km2;
                }
                events.push_back(ev);
            }
        }
        // tracks that received nothing this interval coast one step
        for (auto& trk : tracks_) {
            if (trk.last_update_t != t) trk.imm.predict();
        }
        return events;
    }

    // Remove every track with age >= delta_max.
    void prune_stale(int64_t t) {
        tracks_.erase(std::remove_if(tracks_.begin(), tracks_.end(),
                                     [&](const FcTrack& trk) {
                                         return trk.age(t) >= params_.delta_max;
                                     }),
                      tracks_.end());
    }

    // Closest-node responsibility assignment. FC tracks are first grouped
    // into target clusters (tracks of the same physical target reported by
    // different nodes land within the cluster gate); each cluster goes to
    // the reporting node closest to the cluster position, ties to the lower
    // node id.
    AssignmentMap assign_responsibility() const {
        AssignmentMap map;
        const size_t n = tracks_.size();
        std::vector<bool> clustered(n, false);
        for (size_t i = 0; i < n; ++i) {
            if (clustered[i]) continue;
            std::vector<size_t> cluster{i};
            clustered[i] = true;
            for (size_t j = i + 1; j < n; ++j) {
                if (clustered[j]) continue;
                if (scene::dist(tracks_[i].position(), tracks_[j].position()) <=
                    params_.cluster_gate_km) {
                    cluster.push_back(j);
                    clustered[j] = true;
                }
            }
            Vec2 centroid{0.0, 0.0};
            for (size_t k : cluster) centroid = centroid + tracks_[k].position();
            centroid = centroid * (1.0 / double(cluster.size()));

            int best = -1;
            double best_d = 0.0;
            for (size_t k : cluster) {
                const int nid = tracks_[k].source.node_id;
                const double d = scene::dist(node_positions_[nid], centroid);
                if (best < 0 || d < best_d - 1e-12 ||
                    (std::abs(d - best_d) <= 1e-12 && nid < best)) {
                    best = nid;
                    best_d = d;
                }
            }
            if (best < 0) continue;  // unassignable, no reporting node
            for (size_t k : cluster) {
                map.track_to_node[tracks_[k].fc_id] = best;
                map.source_to_node[tracks_[k].source] = best;
                if (tracks_[k].source.node_id == best) {
                    map.responsible_local_ids[best].push_back(tracks_[k].source.local_id);
                }
            }
        }
        for (auto& [nid, ids] : map.responsible_local_ids) std::sort(ids.begin(), ids.end());
        return map;
    }

private:
    FcTrack* find_by_source_(const SourceKey& key) {
        for (auto& trk : tracks_)
            if (trk.source == key) return &trk;
        return nullptr;
    }

    FcParams params_;
    std::vector<Vec2> node_positions_;
    double radius_ = 0.0;
    std::vector<FcTrack> tracks_;
    int next_fc_id_ = 0;
    int64_t duplicate_rejects_ = 0;
};

}  // namespace crn::fc
