#include "crn/simulation.hpp"

#include <atomic>
#include <thread>

#include "crn/dynamics.hpp"
#include "crn/fusion_center.hpp"
#include "crn/policies.hpp"
#include "crn/radar_node.hpp"

namespace crn::sim {

namespace {

using dynamics::KinematicsParams;
using dynamics::TargetTruth;
using scene::CoverageDisk;
using scene::Region;
using scene::Vec2;

struct TargetStreams {
    Rng chain;
    Rng motion;
    Rng noise;
};

// Per-replication world: nodes, truth roster and the per-entity RNG streams.
// Scene and truth evolution consume only scene/target/birth streams, so every
// policy run over the same rep index sees identical geometry, trajectories
// and measurements (common random numbers).
class World {
public:
    World(const ScenarioConfig& cfg, int rep)
        : cfg_(cfg),
          rep_(rep),
          region_(cfg.region()),
          births_(make_stream(cfg.master_seed, rep, Stream::Births)) {
        kin_.dt = cfg.dt;
        kin_.accel_noise_kmps2 = cfg.accel_noise_mps2 / 1e3;
        kin_.speed_min_kmps = cfg.speed_min_mps / 1e3;
        kin_.speed_max_kmps = cfg.speed_max_mps / 1e3;
        kin_.turn_rate_min = cfg.turn_rate_min_radps;
        kin_.turn_rate_max = cfg.turn_rate_max_radps;
        kin_.stay_cv_min = cfg.chain_stay_cv_min;
        kin_.stay_cv_max = cfg.chain_stay_cv_max;
        kin_.stay_ct_min = cfg.chain_stay_ct_min;
        kin_.stay_ct_max = cfg.chain_stay_ct_max;

        node::NodeParams np;
        np.p_detect = cfg.P_D;
        np.p_false_alarm = cfg.P_FA;
        np.n_resolution_cells = cfg.n_resolution_cells;
        np.sigma0_km = cfg.sigma0_m / 1e3;
        np.confirm_detections = cfg.confirm_detections;
        np.local_drop_misses = cfg.local_drop_misses;
        np.dt = cfg.dt;
        np.filter_sigma_a_cv_kmps2 = cfg.filter_sigma_a_cv_mps2 / 1e3;
        np.filter_sigma_a_ct_kmps2 = cfg.filter_sigma_a_ct_mps2 / 1e3;

        Rng node_rng = make_stream(cfg.master_seed, rep, Stream::SceneNodes);
        const auto node_pattern = scene::sample_point_pattern(region_, cfg.lambda_n, node_rng);
        const double r = cfg.disk_radius_km();
        for (size_t i = 0; i < node_pattern.points.size(); ++i) {
            disks_.push_back({node_pattern.points[i], r});
            nodes_.emplace_back(static_cast<int>(i), disks_.back(), np);
            sensing_.push_back(make_stream(cfg.master_seed, rep, Stream::NodeSensing, i));
        }

        Rng tgt_rng = make_stream(cfg.master_seed, rep, Stream::SceneTargets);
        const auto tgt_pattern = scene::sample_point_pattern(region_, cfg.lambda_m, tgt_rng);
        for (const auto& p : tgt_pattern.points) spawn_target_(p, 0);
    }

    // truth advance for the step ending at t (t = 0 is the initial scene)
    void advance_truth(int64_t t) {
        if (t > 0) {
            for (auto& tgt : truths_) {
                if (!tgt.alive) continue;
                auto& st = streams_[tgt.id];
                dynamics::step_motion(tgt, kin_, st.motion);
                dynamics::propagate_kinematics(tgt, cfg_.dt, region_, kin_.accel_noise_kmps2,
                                               &st.noise, t);
                if (tgt.alive && lifetime_.count(tgt.id) && t >= lifetime_[tgt.id]) {
                    tgt.alive = false;
                    tgt.death_time = t;
                }
            }
            const uint64_t n_birth =
                births_.poisson(cfg_.birth_rate_per_km2_step * region_.area());
            for (uint64_t i = 0; i < n_birth; ++i) {
                const Vec2 p{births_.uniform(0.0, region_.width_km),
                             births_.uniform(0.0, region_.height_km)};
                spawn_target_(p, t);
            }
        }
    }

    void sense_and_track(int64_t t) {
        for (size_t i = 0; i < nodes_.size(); ++i) {
            const auto meas = nodes_[i].observe(truths_, sensing_[i], t);
            nodes_[i].associate_and_filter(meas, t);
        }
    }

    std::vector<node::InterestFlag> poll_flags() const {
        std::vector<node::InterestFlag> flags;
        flags.reserve(nodes_.size());
        for (const auto& nd : nodes_) flags.push_back(nd.interest_flag());
        return flags;
    }

    const std::vector<node::RadarNode>& nodes() const { return nodes_; }
    std::vector<node::RadarNode>& nodes() { return nodes_; }
    const std::vector<TargetTruth>& truths() const { return truths_; }
    const std::vector<CoverageDisk>& disks() const { return disks_; }
    std::vector<Vec2> node_positions() const {
        std::vector<Vec2> out;
        for (const auto& d : disks_) out.push_back(d.center);
        return out;
    }

private:
    void spawn_target_(const Vec2& pos, int64_t t) {
        const int id = next_target_id_++;
        streams_.push_back(TargetStreams{
            make_stream(cfg_.master_seed, rep_, Stream::TargetChain, id),
            make_stream(cfg_.master_seed, rep_, Stream::TargetMotion, id),
            make_stream(cfg_.master_seed, rep_, Stream::TargetNoise, id),
        });
        truths_.push_back(dynamics::make_target(id, pos, t, kin_, streams_[id].chain));
        if (cfg_.mean_lifetime_steps > 0.0) {
            lifetime_[id] =
                t + static_cast<int64_t>(streams_[id].chain.exponential(1.0 / cfg_.mean_lifetime_steps));
        }
    }

    const ScenarioConfig& cfg_;
    int rep_;
    Region region_;
    KinematicsParams kin_;
    std::vector<CoverageDisk> disks_;
    std::vector<node::RadarNode> nodes_;
    std::vector<Rng> sensing_;
    std::vector<TargetTruth> truths_;
    std::vector<TargetStreams> streams_;
    std::map<int, int64_t> lifetime_;
    Rng births_;
    int next_target_id_ = 0;
};

}  // namespace

ReplicationResult run_replication(const ScenarioConfig& config, const std::string& policy_name,
                                  int rep) {
    config.validate();
    ReplicationResult res;
    res.rep = rep;
    res.policy = policy_name;

    World world(config, rep);
    const size_t n_nodes = world.nodes().size();
    res.n_nodes = n_nodes;

    fc::FcParams fp;
    fp.delta_max = config.delta_max;
    fp.cluster_gate_km = config.cluster_gate_km;
    fp.dt = config.dt;
    fp.filter_sigma_a_cv_kmps2 = config.filter_sigma_a_cv_mps2 / 1e3;
    fp.filter_sigma_a_ct_kmps2 = config.filter_sigma_a_ct_mps2 / 1e3;
    fc::FusionCenter fusion(fp, world.node_positions(), config.disk_radius_km());

    policy::AoiiNodeConfig acfg;
    acfg.alpha = config.alpha();
    acfg.delta_max = config.delta_max;
    auto policy = policy::make_policy(policy_name, acfg);

    Rng policy_rng = make_stream(config.master_seed, rep, Stream::Policy,
                                 splitmix64(std::hash<std::string>{}(policy_name)));

    fc::AssignmentMap assignment;
    fc::CapacityLedger ledger;
    ledger.capacity = config.C;
    ledger.alpha = config.alpha();

    metrics::TargetRateAccumulator target_rates;
    const bool integer_c = config.C == std::floor(config.C);
    const size_t want_exact =
        integer_c ? std::min(n_nodes, static_cast<size_t>(config.C)) : 0;

    res.rows.reserve(config.steps);
    for (int64_t t = 0; t < config.steps; ++t) {
        world.advance_truth(t);
        world.sense_and_track(t);

        const auto flags = world.poll_flags();
        policy::PolicyContext ctx;
        ctx.nodes = &world.nodes();
        ctx.fusion = &fusion;
        ctx.assignment = &assignment;
        ctx.interest = &flags;
        ctx.t = t;
        ctx.capacity = config.C;
        ctx.alpha = config.alpha();
        ctx.alpha_avail = config.alpha_avail;
        ctx.gamma_discount = config.gamma_discount;
        ctx.rng = &policy_rng;

        const auto decision = policy->decide(ctx);

        if (!policy->is_distributed() && integer_c && decision.selected.size() != want_exact) {
            res.fixed_cardinality_ok = false;
        }

        std::vector<node::NodeUpdate> updates;
        updates.reserve(decision.selected.size());
        for (int nid : decision.selected) updates.push_back(world.nodes()[nid].build_update(t));

        const auto events = fusion.ingest_updates(updates, t);
        for (const auto& ev : events) {
            if (!ev.created) res.peak.record_reset(ev.pre_reset_age);
        }
        fusion.prune_stale(t);
        assignment = fusion.assign_responsibility();

        ledger.record(decision.selected, n_nodes);

        const auto rec = metrics::record_step(world.truths(), world.disks(), fusion.tracks(),
                                              decision.selected.size(), t);
        target_rates.observe_step(rec, world.truths());

        for (const auto& obs : rec.tracks) {
            res.age_sum += double(obs.age);
            res.age_count += 1;
            if (obs.error_m >= 0.0) res.errors.add(obs.error_m);
        }
        res.covered_untracked_sum += double(rec.covered_untracked);
        res.uncovered_sum += double(rec.uncovered);

        StepRow row;
        row.rep = rep;
        row.policy = policy_name;
        row.t = t;
        row.selected_count = decision.selected.size();
        row.mean_age = rec.mean_age();
        row.peak_age_running = res.peak.peak_age().value_or(0.0);
        row.mean_error_m = rec.mean_error_m();
        row.tracked_count = rec.tracks.size();
        row.covered_untracked = rec.covered_untracked;
        row.uncovered = rec.uncovered;
        res.rows.push_back(std::move(row));
    }

    res.mean_selected = ledger.mean_selected();
    res.total_selected = ledger.total_selected;
    res.scatter = target_rates.points();
    for (size_t n = 0; n < n_nodes; ++n) {
        const double r = ledger.node_rate(static_cast<int>(n));
        res.node_rates.push_back(r);
        res.max_node_rate = std::max(res.max_node_rate, r);
    }
    res.fleet_mean_rate =
        n_nodes ? double(ledger.total_selected) / (double(n_nodes) * double(config.steps)) : 0.0;
    if (const auto* aoii = dynamic_cast<const policy::DistributedAoiiPolicy*>(policy.get())) {
        res.aoii_process_fires = aoii->diagnostics().process_fires;
        res.aoii_refresh_fires = aoii->diagnostics().refresh_fires;
        res.aoii_announce_events = aoii->diagnostics().announce_events;
    }
    return res;
}

ExperimentResult run_experiment(const ScenarioConfig& config, bool keep_rows) {
    config.validate();
    ExperimentResult out;
    out.config = config;
    for (int rep = 0; rep < config.averaged_simulations; ++rep) {
        out.rep_seeds.push_back(derive_seed(config.master_seed, rep, 0, 0));
    }

    struct Task {
        size_t policy_idx;
        int rep;
    };
    std::vector<Task> tasks;
    for (size_t p = 0; p < config.policies.size(); ++p)
        for (int rep = 0; rep < config.averaged_simulations; ++rep) tasks.push_back({p, rep});

    out.runs.resize(tasks.size());
    std::atomic<size_t> next{0};
    const unsigned hw = std::thread::hardware_concurrency();
    const unsigned n_workers =
        config.workers > 0 ? static_cast<unsigned>(config.workers) : (hw ? hw : 1);

    auto worker = [&]() {
        while (true) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) break;
            auto r = run_replication(config, config.policies[tasks[i].policy_idx], tasks[i].rep);
            if (!keep_rows) r.rows.clear();
            out.runs[i] = std::move(r);
        }
    };
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // ordered reduce, policy-major
    for (size_t p = 0; p < config.policies.size(); ++p) {
        PolicySummary s;
        s.policy = config.policies[p];
        double cap_sum = 0.0, cap_sq = 0.0;
        double age_sum = 0.0;
        int64_t age_count = 0;
        double peak_sum = 0.0;
        int64_t peak_count = 0;
        double cov_sum = 0.0, unc_sum = 0.0;
        int64_t step_total = 0;
        double rate_sum = 0.0;
        int reps = config.averaged_simulations;
        for (int rep = 0; rep < reps; ++rep) {
            const auto& r = out.runs[p * reps + rep];
            cap_sum += r.mean_selected;
            cap_sq += r.mean_selected * r.mean_selected;
            s.errors.merge(r.errors);
            peak_sum += r.peak.sum;
            peak_count += r.peak.count;
            age_sum += r.age_sum;
            age_count += r.age_count;
            cov_sum += r.covered_untracked_sum;
            unc_sum += r.uncovered_sum;
            step_total += config.steps;
            rate_sum += r.fleet_mean_rate;
            s.max_node_rate = std::max(s.max_node_rate, r.max_node_rate);
            s.fixed_cardinality_ok = s.fixed_cardinality_ok && r.fixed_cardinality_ok;
            for (const auto& pt : r.scatter) s.scatter.push_back(pt);
        }
        s.mean_capacity = cap_sum / double(reps);
        const double var = std::max(0.0, cap_sq / double(reps) - s.mean_capacity * s.mean_capacity);
        s.capacity_stderr = std::sqrt(var / double(reps));
        s.p_err_le_100m = s.errors.cdf_at(100.0);
        s.median_error_m = s.errors.median();
        s.mean_error_m = s.errors.mean();
        if (peak_count > 0) s.paoi = peak_sum / double(peak_count);
        s.mean_age = age_count ? age_sum / double(age_count) : 0.0;
        const auto fit = metrics::entropy_update_fit(s.scatter);
        if (fit.valid) s.scatter_slope = fit.slope;
        s.missed_covered_mean = cov_sum / double(step_total);
        s.uncovered_mean = unc_sum / double(step_total);
        s.fleet_mean_rate = rate_sum / double(reps);
        out.summaries.push_back(std::move(s));
    }
    return out;
}

}  // namespace crn::sim
