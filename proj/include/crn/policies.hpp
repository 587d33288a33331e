#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "crn/aoii.hpp"
#include "crn/fusion_center.hpp"
#include "crn/radar_node.hpp"

namespace crn::policy {

using fc::FusionCenter;
using node::InterestFlag;
using node::RadarNode;

struct PolicyDecision {
    int64_t t = 0;
    std::vector<int> selected;  // node ids, ascending
    // per-selected provenance: greedy Q score, UCB index, or AoII penalty
    std::vector<double> provenance;
};

struct PolicyContext {
    const std::vector<RadarNode>* nodes = nullptr;
    FusionCenter* fusion = nullptr;
    const fc::AssignmentMap* assignment = nullptr;
    const std::vector<InterestFlag>* interest = nullptr;
    int64_t t = 0;
    double capacity = 2.0;  // C; may be fractional
    double alpha = 0.1;
    double alpha_avail = 0.5;
    double gamma_discount = 0.5;
    Rng* rng = nullptr;
};

// Per-step cardinality of a fixed policy. Fractional C is realized by
// selecting floor(C) or ceil(C) with Bernoulli(frac) so the mean equals C.
inline size_t capacity_this_step(double capacity, size_t n_nodes, Rng& rng) {
    const double fl = std::floor(capacity);
    double c = fl;
    const double frac = capacity - fl;
    if (frac > 0.0 && rng.bernoulli(frac)) c += 1.0;
    return std::min(n_nodes, static_cast<size_t>(c));
}

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual PolicyDecision decide(const PolicyContext& ctx) = 0;
    virtual bool is_distributed() const { return false; }
};

// --- interest polling (feedback-channel poll, centralized only) ------------

inline std::vector<int> poll_interest(const std::vector<InterestFlag>& flags) {
    std::vector<int> out;
    for (const auto& f : flags)
        if (f.interesting) out.push_back(f.node_id);
    return out;
}

// --- edge matrix for the centralized score and UCB --------------------------

// F_{n,m} = age * sigma^{-1} when the node observes the track, otherwise the
// gamma discount. Sigma enters in units of the baseline variance sigma_0^2
// (the selection is invariant under a common scaling of sigma^{-1}, and on
// this scale the quality factor lies in (0,1], commensurate with the gamma
// and availability weights). Observability is judged from the fused position
// against the node's disk.
struct EdgeMatrix {
    size_t n_nodes = 0;
    size_t n_tracks = 0;
    std::vector<double> e;  // row-major (node, track); alpha-weighted entries

    double& at(size_t n, size_t m) { return e[n * n_tracks + m]; }
    double at(size_t n, size_t m) const { return e[n * n_tracks + m]; }

    double node_score(size_t n) const {
        double q = 0.0;
        for (size_t m = 0; m < n_tracks; ++m) q += at(n, m);
        return q;
    }

    void zero_column(size_t m) {
        for (size_t n = 0; n < n_nodes; ++n) at(n, m) = 0.0;
    }
};

inline bool node_observes(const RadarNode& nd, const scene::Vec2& track_pos) {
    return nd.disk().covers(track_pos);
}

// Builds E(t) with entries alpha_tilde_n * F_{n,m}. Pass alpha_weighted =
// false to leave out the availability factor (UCB uses the raw sum).
inline EdgeMatrix build_edge_matrix(const PolicyContext& ctx, bool alpha_weighted) {
    const auto& nodes = *ctx.nodes;
    const auto& tracks = ctx.fusion->tracks();
    EdgeMatrix em;
    em.n_nodes = nodes.size();
    em.n_tracks = tracks.size();
    em.e.assign(em.n_nodes * em.n_tracks, 0.0);

    std::vector<bool> interesting(nodes.size(), false);
    if (ctx.interest != nullptr) {
        for (const auto& f : *ctx.interest)
            if (f.interesting && f.node_id >= 0) interesting[f.node_id] = true;
    }

    for (size_t n = 0; n < nodes.size(); ++n) {
        const double a_tilde = !alpha_weighted ? 1.0 : (interesting[n] ? 1.0 : ctx.alpha_avail);
        const double s0 = nodes[n].params().sigma0_km;
        const double base_var = s0 > 0.0 ? s0 * s0 : 1.0;
        for (size_t m = 0; m < tracks.size(); ++m) {
            const auto pos = tracks[m].position();
            double f;
            if (node_observes(nodes[n], pos)) {
                const double var = node::sigma_for(nodes[n].disk(), pos, nodes[n].params());
                f = double(tracks[m].age(ctx.t)) * (base_var / var);
            } else {
                f = ctx.gamma_discount;
            }
            em.at(n, m) = a_tilde * f;
        }
    }
    return em;
}

// --- centralized track-sensitive AoI selection ------------------------------

// Greedy core: pick the argmax-score node C times; after each pick, zero the
// columns of every track that node observes so later picks favor uncovered
// targets. Ties go to the lower node id. `observes(n, m)` supplies the
// coverage relation.
template <typename ObservesFn>
std::vector<std::pair<int, double>> greedy_select(EdgeMatrix& em, size_t c, ObservesFn observes) {
    std::vector<std::pair<int, double>> picks;
    std::vector<bool> picked(em.n_nodes, false);
    for (size_t round = 0; round < c && round < em.n_nodes; ++round) {
        int best = -1;
        double best_q = -1.0;
        for (size_t n = 0; n < em.n_nodes; ++n) {
            if (picked[n]) continue;
            const double q = em.node_score(n);
            if (best < 0 || q > best_q + 1e-15) {
                best = static_cast<int>(n);
                best_q = q;
            }
        }
        if (best < 0) break;
        picked[best] = true;
        picks.push_back({best, best_q});
        for (size_t m = 0; m < em.n_tracks; ++m) {
            if (observes(static_cast<size_t>(best), m)) em.zero_column(m);
        }
    }
    return picks;
}

class CentralizedAoiPolicy : public Policy {
public:
    std::string name() const override { return "centralized-aoi"; }

    PolicyDecision decide(const PolicyContext& ctx) override {
        const auto& nodes = *ctx.nodes;
        const auto& tracks = ctx.fusion->tracks();
        PolicyDecision dec;
        dec.t = ctx.t;
        const size_t c = capacity_this_step(ctx.capacity, nodes.size(), *ctx.rng);

        EdgeMatrix em = build_edge_matrix(ctx, true);
        const auto picks = greedy_select(em, c, [&](size_t n, size_t m) {
            return node_observes(nodes[n], tracks[m].position());
        });
        for (const auto& [id, q] : picks) {
            dec.selected.push_back(id);
            dec.provenance.push_back(q);
        }
        std::sort(dec.selected.begin(), dec.selected.end());
        return dec;
    }
};

// --- UCB baseline ------------------------------------------------------------

struct UcbState {
    std::vector<int64_t> n_selected;

    void ensure(size_t n) {
        if (n_selected.size() < n) n_selected.resize(n, 0);
    }
};

// Implemented exactly as written in the source formulation: argmin of the
// raw edge-sum plus an additive sqrt(log t / N_t(n)) term, with a warm start
// that picks never-selected nodes first.
class UcbPolicy : public Policy {
public:
    std::string name() const override { return "ucb"; }

    PolicyDecision decide(const PolicyContext& ctx) override {
        const auto& nodes = *ctx.nodes;
        state_.ensure(nodes.size());
        PolicyDecision dec;
        dec.t = ctx.t;
        const size_t c = capacity_this_step(ctx.capacity, nodes.size(), *ctx.rng);

        std::vector<int> chosen;
        for (size_t n = 0; n < nodes.size() && chosen.size() < c; ++n) {
            if (state_.n_selected[n] == 0) chosen.push_back(static_cast<int>(n));
        }

        if (chosen.size() < c) {
            EdgeMatrix em = build_edge_matrix(ctx, false);
            const double logt = std::log(std::max<double>(1.0, double(ctx.t)));
            struct Scored {
                double index;
                int id;
            };
            std::vector<Scored> scored;
            for (size_t n = 0; n < nodes.size(); ++n) {
                if (state_.n_selected[n] == 0) continue;  // already taken by warm start
                const double bonus = std::sqrt(logt / double(state_.n_selected[n]));
                scored.push_back({em.node_score(n) + bonus, static_cast<int>(n)});
            }
            std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
                if (a.index != b.index) return a.index < b.index;
                return a.id < b.id;
            });
            for (const auto& s : scored) {
                if (chosen.size() >= c) break;
                chosen.push_back(s.id);
            }
        }

        std::sort(chosen.begin(), chosen.end());
        for (int n : chosen) {
            state_.n_selected[n] += 1;
            dec.provenance.push_back(double(state_.n_selected[n]));
        }
        dec.selected = std::move(chosen);
        return dec;
    }

    const UcbState& state() const { return state_; }

private:
    UcbState state_;
};

// --- random baseline ---------------------------------------------------------

class RandomPolicy : public Policy {
public:
    std::string name() const override { return "random"; }

    PolicyDecision decide(const PolicyContext& ctx) override {
        PolicyDecision dec;
        dec.t = ctx.t;
        const size_t n = ctx.nodes->size();
        const size_t c = capacity_this_step(ctx.capacity, n, *ctx.rng);
        for (size_t idx : ctx.rng->sample_without_replacement(n, c))
            dec.selected.push_back(static_cast<int>(idx));
        dec.provenance.assign(dec.selected.size(), 0.0);
        return dec;
    }
};

// --- round robin ---------------------------------------------------------------

// Selects the C nodes whose last selection is oldest; never-selected nodes
// count as infinitely old. Induces an exact N/C-periodic cycle.
class RoundRobinPolicy : public Policy {
public:
    std::string name() const override { return "round-robin"; }

    PolicyDecision decide(const PolicyContext& ctx) override {
        const size_t n = ctx.nodes->size();
        if (last_selected_.size() < n) last_selected_.resize(n, -1);
        PolicyDecision dec;
        dec.t = ctx.t;
        const size_t c = capacity_this_step(ctx.capacity, n, *ctx.rng);

        std::vector<int> order(n);
        for (size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (last_selected_[a] != last_selected_[b])
                return last_selected_[a] < last_selected_[b];
            return a < b;
        });
        order.resize(std::min(c, order.size()));
        std::sort(order.begin(), order.end());
        for (int id : order) {
            dec.provenance.push_back(double(ctx.t - last_selected_[id]));
            last_selected_[id] = ctx.t;
        }
        dec.selected = std::move(order);
        return dec;
    }

private:
    std::vector<int64_t> last_selected_;
};

// --- distributed AoII ----------------------------------------------------------

struct AoiiNodeConfig {
    double alpha = 0.1;
    int64_t delta_max = 30;  // FC prune horizon, drives the re-announce rule
};

// Per-node engine. Each responsible target runs its own penalty process with
// budget delta = alpha / M_n; the node transmits when any process fires, or
// when it holds a confirmed track the fusion center cannot currently know
// about (never carried, or carried so long ago that it was pruned). Budget
// the tuned processes cannot realize (their A(1) caps below delta) is spent
// as a memoryless refresh so every active node uses its full allowance.
//
// The rate constraint itself is enforced by a per-node credit bucket: credits
// accrue at alpha per CPI (bounded), every transmission costs one, and a
// trigger without credit is deferred. The estimated chains only approximate
// the mode-estimate process, so the threshold tuning alone cannot guarantee
// the constraint; the bucket pins the realized rate at the allowance while
// keeping the AoII alignment of the sends it admits.
class DistributedAoiiPolicy : public Policy {
public:
    explicit DistributedAoiiPolicy(const AoiiNodeConfig& cfg) : cfg_(cfg) {}

    std::string name() const override { return "distributed-aoii"; }
    bool is_distributed() const override { return true; }

    struct Diagnostics {
        int64_t process_fires = 0;
        int64_t refresh_fires = 0;
        int64_t announce_events = 0;
        int64_t sends = 0;
    };
    const Diagnostics& diagnostics() const { return diag_; }

    PolicyDecision decide(const PolicyContext& ctx) override {
        const auto& nodes = *ctx.nodes;
        engines_.resize(nodes.size());
        PolicyDecision dec;
        dec.t = ctx.t;

        for (size_t n = 0; n < nodes.size(); ++n) {
            auto& eng = engines_[n];
            const RadarNode& nd = nodes[n];

            std::vector<int> confirmed;
            for (const auto& trk : nd.tracks())
                if (trk.confirmed) confirmed.push_back(trk.local_id);

            // responsibility per the feedback map
            std::vector<int> responsible;
            std::vector<int> announce;
            for (int lid : confirmed) {
                const fc::SourceKey key{static_cast<int>(n), lid};
                auto it = ctx.assignment->source_to_node.find(key);
                const bool known_to_fc = known_to_fc_(eng, lid, ctx.t);
                if (!known_to_fc) announce.push_back(lid);
                if (it != ctx.assignment->source_to_node.end()) {
                    if (it->second == static_cast<int>(n)) responsible.push_back(lid);
                } else if (!known_to_fc) {
                    // nobody owns it yet: the observing node assumes it does
                    responsible.push_back(lid);
                }
            }
            // a node whose observed targets are all owned elsewhere times its
            // own tracks anyway; its updates keep its FC tracks alive
            if (responsible.empty() && !confirmed.empty()) responsible = confirmed;

            const double delta = aoii_budget(cfg_.alpha, responsible.size());

            // drop processes for tracks no longer timed
            for (auto it = eng.processes.begin(); it != eng.processes.end();) {
                if (std::find(responsible.begin(), responsible.end(), it->first) ==
                    responsible.end()) {
                    eng.tuned.erase(it->first);
                    it = eng.processes.erase(it);
                } else {
                    ++it;
                }
            }

            bool fires = false;
            double max_penalty = 0.0;
            double planned_rate = 0.0;
            std::vector<int> fired;
            for (int lid : responsible) {
                const node::LocalTrack* trk = nd.find_track(lid);
                if (trk == nullptr) continue;
                auto [it, created] = eng.processes.try_emplace(lid);
                AoiiProcess& proc = it->second;
                retune_(eng, lid, proc, *trk, delta);
                planned_rate += proc.policy.achieved;
                const size_t cur = static_cast<size_t>(trk->gamma_hat);
                if (created) {
                    proc.mark_sent(cur, ctx.t);  // fresh process starts in sync
                    continue;
                }
                max_penalty = std::max(max_penalty, double(proc.penalty(cur, ctx.t)));
                if (proc.step(cur, ctx.t, *ctx.rng)) {
                    fires = true;
                    fired.push_back(lid);
                }
            }

            if (!fired.empty()) diag_.process_fires += 1;
            (void)planned_rate;

            // Rate enforcement: accrue, then gate this step's transmission.
            // Credits bank during quiet stretches so a penalty trigger spends
            // immediately; allowance the triggers never claim is used as a
            // position refresh only once the bucket saturates.
            eng.credits = std::min(eng.credits + cfg_.alpha, kCreditCap);
            bool refresh = false;
            if (!fires && !confirmed.empty() && eng.credits >= kCreditCap) {
                refresh = true;
                diag_.refresh_fires += 1;
            }
            const bool must_announce = !announce.empty() && eng.credits > -2.0;
            if (must_announce && !fires && !refresh) diag_.announce_events += 1;
            bool send = false;
            if (must_announce) {
                send = true;  // liveness: new tracks may overdraw
            } else if ((fires || refresh) && eng.credits >= 1.0) {
                send = true;
            }

            if (send) {
                eng.credits -= 1.0;
                diag_.sends += 1;
                dec.selected.push_back(static_cast<int>(n));
                dec.provenance.push_back(max_penalty);
                for (int lid : fired) {
                    const node::LocalTrack* trk = nd.find_track(lid);
                    if (trk != nullptr)
                        eng.processes[lid].mark_sent(static_cast<size_t>(trk->gamma_hat), ctx.t);
                }
                for (int lid : announce) {
                    if (eng.processes.count(lid)) {
                        const node::LocalTrack* trk = nd.find_track(lid);
                        if (trk != nullptr)
                            eng.processes[lid].mark_sent(static_cast<size_t>(trk->gamma_hat),
                                                          ctx.t);
                    }
                }
                for (int lid : confirmed) eng.last_carried[lid] = ctx.t;
            }

            // forget carry times for tracks the node no longer has
            for (auto it = eng.last_carried.begin(); it != eng.last_carried.end();) {
                if (nd.find_track(it->first) == nullptr)
                    it = eng.last_carried.erase(it);
                else
                    ++it;
            }
        }
        return dec;
    }

private:
    struct Tuning {
        double p_stay_cv = -1.0;
        double p_stay_ct = -1.0;
        double delta = -1.0;
    };

    static constexpr double kCreditCap = 2.0;

    struct Engine {
        std::map<int, AoiiProcess> processes;
        std::map<int, Tuning> tuned;
        std::map<int, int64_t> last_carried;
        double credits = 1.0;
    };

    // thresholds depend only on (chain estimate, delta); recompute when they
    // moved materially
    void retune_(Engine& eng, int lid, AoiiProcess& proc, const node::LocalTrack& trk,
                 double delta) {
        const auto est = node::estimate_transitions(trk);
        Tuning& cache = eng.tuned[lid];
        if (std::abs(cache.p_stay_cv - est.stay(0)) < 1e-3 &&
            std::abs(cache.p_stay_ct - est.stay(1)) < 1e-3 &&
            std::abs(cache.delta - delta) < 1e-9) {
            return;
        }
        proc.components = {ComponentChain::from(est)};
        proc.policy = aoii_threshold(proc.components, delta);
        cache = {est.stay(0), est.stay(1), delta};
    }

    bool known_to_fc_(const Engine& eng, int lid, int64_t t) const {
        auto it = eng.last_carried.find(lid);
        if (it == eng.last_carried.end()) return false;
        return t - it->second < cfg_.delta_max;
    }

    AoiiNodeConfig cfg_;
    std::vector<Engine> engines_;
    Diagnostics diag_;
};

inline std::unique_ptr<Policy> make_policy(const std::string& name, const AoiiNodeConfig& aoii_cfg) {
    if (name == "centralized-aoi") return std::make_unique<CentralizedAoiPolicy>();
    if (name == "distributed-aoii") return std::make_unique<DistributedAoiiPolicy>(aoii_cfg);
    if (name == "ucb") return std::make_unique<UcbPolicy>();
    if (name == "random") return std::make_unique<RandomPolicy>();
    if (name == "round-robin") return std::make_unique<RoundRobinPolicy>();
    throw std::invalid_argument("unknown policy: " + name);
}

}  // namespace crn::policy
