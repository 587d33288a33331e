#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "crn/geometry.hpp"
#include "crn/markov.hpp"
#include "crn/rng.hpp"

namespace crn::dynamics {

using scene::Region;
using scene::Vec2;

// Ground-truth target. Positions in km, velocity in km/s, turn rate rad/s.
struct TargetTruth {
    int id = -1;
    Vec2 position;
    Vec2 velocity;
    double turn_rate = 0.0;
    MotionModel motion_state = MotionModel::ConstantVelocity;
    TransitionMatrix transition;
    bool alive = true;
    int64_t birth_time = 0;
    int64_t death_time = -1;  // -1 while alive
};

struct KinematicsParams {
    double dt = 1.0;                  // seconds per step (1 CPI)
    double accel_noise_kmps2 = 0.0005;  // 0.5 m/s^2 white acceleration noise
    double speed_min_kmps = 0.030;    // birth speed range, 30..50 m/s
    double speed_max_kmps = 0.050;
    double turn_rate_min = 0.5;       // |omega| range at CT entry, rad/s
    double turn_rate_max = 0.8;
    // per-target transition-matrix draw ranges (stay probabilities)
    double stay_cv_min = 0.90;
    double stay_cv_max = 0.98;
    double stay_ct_min = 0.85;
    double stay_ct_max = 0.95;
};

// signed turn rate with a magnitude floor: a turning target turns properly
inline double sample_turn_rate(const KinematicsParams& kp, Rng& rng) {
    const double mag = rng.uniform(kp.turn_rate_min, kp.turn_rate_max);
    return rng.bernoulli(0.5) ? mag : -mag;
}

inline Vec2 rotate(const Vec2& v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// One step of truth kinematics. CV: straight line. CT: exact coordinated
// turn (position advances along the circular arc, velocity rotates by
// omega*dt, speed preserved). Acceleration noise perturbs both models.
// A target whose new position falls outside the region is marked dead at
// the given step (takeoff/landing model: it left the scene).
inline void propagate_kinematics(TargetTruth& t, double dt, const Region& region,
                                 double accel_noise_kmps2, Rng* rng, int64_t step) {
    if (!t.alive) return;

    if (t.motion_state == MotionModel::ConstantVelocity || t.turn_rate == 0.0) {
        t.position = t.position + t.velocity * dt;
    } else {
        const double w = t.turn_rate;
        const double sw = std::sin(w * dt), cw = std::cos(w * dt);
        const Vec2 v = t.velocity;
        t.position.x += (v.x * sw - v.y * (1.0 - cw)) / w;
        t.position.y += (v.x * (1.0 - cw) + v.y * sw) / w;
        t.velocity = rotate(v, w * dt);
    }

    if (accel_noise_kmps2 > 0.0 && rng != nullptr) {
        const Vec2 a{rng->normal(0.0, accel_noise_kmps2), rng->normal(0.0, accel_noise_kmps2)};
        t.velocity = t.velocity + a * dt;
        t.position = t.position + a * (0.5 * dt * dt);
    }

    if (!region.contains(t.position)) {
        t.alive = false;
        t.death_time = step;
    }
}

inline TargetTruth make_target(int id, const Vec2& pos, int64_t birth_time,
                               const KinematicsParams& kp, Rng& rng) {
    TargetTruth t;
    t.id = id;
    t.position = pos;
    t.birth_time = birth_time;
    t.transition = TransitionMatrix::from_stay_probs(
        rng.uniform(kp.stay_cv_min, kp.stay_cv_max), rng.uniform(kp.stay_ct_min, kp.stay_ct_max));
    const double speed = rng.uniform(kp.speed_min_kmps, kp.speed_max_kmps);
    const double heading = rng.uniform(0.0, 2.0 * M_PI);
    t.velocity = {speed * std::cos(heading), speed * std::sin(heading)};
    // start in the chain's stationary distribution
    const auto mu = stationary_distribution(t.transition);
    t.motion_state = rng.u01() < mu[0] ? MotionModel::ConstantVelocity : MotionModel::ConstantTurn;
    t.turn_rate = t.motion_state == MotionModel::ConstantTurn ? sample_turn_rate(kp, rng) : 0.0;
    return t;
}

// Markov step of the motion state. The turn rate is resampled on each entry
// into the CT state and zeroed in CV.
inline void step_motion(TargetTruth& t, const KinematicsParams& kp, Rng& rng) {
    if (!t.alive) return;
    const MotionModel prev = t.motion_state;
    t.motion_state = step_motion_state(prev, t.transition, rng);
    if (t.motion_state == MotionModel::ConstantTurn) {
        if (prev != MotionModel::ConstantTurn) {
            t.turn_rate = sample_turn_rate(kp, rng);
        }
    } else {
        t.turn_rate = 0.0;
    }
}

}  // namespace crn::dynamics
