#include <doctest.h>

#include <cmath>

#include "crn/dynamics.hpp"

using namespace crn;
using namespace crn::dynamics;

namespace {
TargetTruth make_plain(Vec2 pos, Vec2 vel, MotionModel m, double omega) {
    TargetTruth t;
    t.id = 0;
    t.position = pos;
    t.velocity = vel;
    t.motion_state = m;
    t.turn_rate = omega;
    return t;
}
}  // namespace

TEST_CASE("constant velocity step") {
    const scene::Region region{10.0, 10.0};
    auto t = make_plain({5.0, 5.0}, {0.1, 0.0}, MotionModel::ConstantVelocity, 0.0);
    propagate_kinematics(t, 1.0, region, 0.0, nullptr, 1);
    CHECK(t.position.x == doctest::Approx(5.1).epsilon(1e-15));
    CHECK(t.position.y == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(t.alive);
}

TEST_CASE("quarter-turn rotates velocity") {
    const scene::Region region{10.0, 10.0};
    auto t = make_plain({5.0, 5.0}, {0.1, 0.0}, MotionModel::ConstantTurn, M_PI / 2.0);
    propagate_kinematics(t, 1.0, region, 0.0, nullptr, 1);
    CHECK(t.velocity.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(t.velocity.y == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("coordinated turn preserves speed") {
    const scene::Region region{100.0, 100.0};
    auto t = make_plain({50.0, 50.0}, {0.02, 0.01}, MotionModel::ConstantTurn, 0.07);
    const double speed0 = t.velocity.norm();
    for (int i = 0; i < 100 && t.alive; ++i) {
        propagate_kinematics(t, 1.0, region, 0.0, nullptr, i + 1);
    }
    CHECK(std::abs(t.velocity.norm() - speed0) < 1e-9);
}

TEST_CASE("CV propagation is reversible with zero noise") {
    const scene::Region region{10.0, 10.0};
    auto t = make_plain({3.0, 4.0}, {0.015, -0.02}, MotionModel::ConstantVelocity, 0.0);
    const Vec2 start = t.position;
    propagate_kinematics(t, 1.0, region, 0.0, nullptr, 1);
    propagate_kinematics(t, -1.0, region, 0.0, nullptr, 2);
    CHECK(std::abs(t.position.x - start.x) < 1e-12);
    CHECK(std::abs(t.position.y - start.y) < 1e-12);
}

TEST_CASE("leaving the region kills the target") {
    const scene::Region region{10.0, 10.0};
    auto t = make_plain({9.95, 5.0}, {0.1, 0.0}, MotionModel::ConstantVelocity, 0.0);
    propagate_kinematics(t, 1.0, region, 0.0, nullptr, 7);
    CHECK_FALSE(t.alive);
    CHECK(t.death_time == 7);
}

TEST_CASE("birth sampling respects configured ranges") {
    KinematicsParams kp;
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        const auto t = make_target(i, {5.0, 5.0}, 0, kp, rng);
        const double speed = t.velocity.norm();
        CHECK(speed >= kp.speed_min_kmps - 1e-15);
        CHECK(speed <= kp.speed_max_kmps + 1e-15);
        CHECK(t.transition.row_stochastic());
        if (t.motion_state == MotionModel::ConstantTurn) {
            CHECK(std::abs(t.turn_rate) <= kp.turn_rate_max + 1e-15);
        } else {
            CHECK(t.turn_rate == 0.0);
        }
    }
}

TEST_CASE("turn rate is resampled on CT entry and cleared in CV") {
    KinematicsParams kp;
    Rng rng(123);
    auto t = make_target(0, {5.0, 5.0}, 0, kp, rng);
    t.transition = dynamics::TransitionMatrix::from_stay_probs(0.5, 0.5);
    bool saw_ct = false;
    for (int i = 0; i < 200; ++i) {
        step_motion(t, kp, rng);
        if (t.motion_state == MotionModel::ConstantTurn) {
            saw_ct = true;
            CHECK(std::abs(t.turn_rate) <= kp.turn_rate_max + 1e-15);
        } else {
            CHECK(t.turn_rate == 0.0);
        }
    }
    CHECK(saw_ct);
}
