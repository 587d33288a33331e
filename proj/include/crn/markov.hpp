#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "crn/rng.hpp"

namespace crn::dynamics {

enum class MotionModel : int { ConstantVelocity = 0, ConstantTurn = 1 };

constexpr int kNumMotionModels = 2;

// 2x2 row-stochastic transition matrix over {CV, CT}.
//   [ p_stay_cv     1-p_stay_cv ]
//   [ 1-p_stay_ct   p_stay_ct   ]
struct TransitionMatrix {
    std::array<std::array<double, 2>, 2> p{{{1.0, 0.0}, {0.0, 1.0}}};

    static TransitionMatrix from_stay_probs(double p_stay_cv, double p_stay_ct) {
        TransitionMatrix t;
        t.p[0][0] = p_stay_cv;
        t.p[0][1] = 1.0 - p_stay_cv;
        t.p[1][0] = 1.0 - p_stay_ct;
        t.p[1][1] = p_stay_ct;
        return t;
    }

    double stay(int state) const { return p[state][state]; }
    double operator()(int i, int j) const { return p[i][j]; }

    bool row_stochastic(double tol = 1e-12) const {
        for (int i = 0; i < 2; ++i) {
            double s = 0.0;
            for (int j = 0; j < 2; ++j) {
                if (p[i][j] < -tol || p[i][j] > 1.0 + tol) return false;
                s += p[i][j];
            }
            if (std::abs(s - 1.0) > tol) return false;
        }
        return true;
    }
};

// Per-target draw: P1 ~ U[0.7,0.9] (CV self-transition), P2 ~ U[0.5,0.7] (CT)
inline TransitionMatrix sample_transition_matrix(Rng& rng) {
    return TransitionMatrix::from_stay_probs(rng.uniform(0.7, 0.9), rng.uniform(0.5, 0.7));
}

inline MotionModel step_motion_state(MotionModel state, const TransitionMatrix& t, Rng& rng) {
    const int row = static_cast<int>(state);
    return rng.u01() < t.p[row][0] ? MotionModel::ConstantVelocity : MotionModel::ConstantTurn;
}

// Closed form for the two-state chain: mu = [(1-P2), (1-P1)] / (2 - P1 - P2).
inline std::array<double, 2> stationary_distribution(const TransitionMatrix& t) {
    const double p1 = t.stay(0), p2 = t.stay(1);
    const double denom = 2.0 - p1 - p2;
    if (denom <= 0.0)
        throw std::domain_error("stationary_distribution: chain is reducible (P1=P2=1)");
    return {(1.0 - p2) / denom, (1.0 - p1) / denom};
}

// H(T) = -sum_ij mu_i T_ij log2 T_ij, with 0 log 0 := 0. Bits per step.
inline double entropy_rate(const TransitionMatrix& t) {
    const auto mu = stationary_distribution(t);
    double h = 0.0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double pij = t(i, j);
            if (pij > 0.0) h -= mu[i] * pij * std::log2(pij);
        }
    }
    return h;
}

// Product chain over k independent two-state components. Joint state s is a
// bit vector (component m's state = bit m); joint transition probability is
// the product of component entries. The joint matrix is materialized only
// for k <= kMaxExplicit; everything else must go through the factored
// accessors.
struct CombinedChain {
    static constexpr size_t kMaxExplicit = 12;

    std::vector<TransitionMatrix> components;

    size_t num_components() const { return components.size(); }
    size_t num_states() const { return size_t{1} << components.size(); }

    static int bit(size_t state, size_t m) { return static_cast<int>((state >> m) & 1u); }

    double joint_prob(size_t from, size_t to) const {
        double p = 1.0;
        for (size_t m = 0; m < components.size(); ++m) {
            p *= components[m](bit(from, m), bit(to, m));
        }
        return p;
    }

    double joint_stationary(size_t state) const {
        double p = 1.0;
        for (size_t m = 0; m < components.size(); ++m) {
            p *= stationary_distribution(components[m])[bit(state, m)];
        }
        return p;
    }

    std::vector<std::vector<double>> materialize() const {
        if (components.size() > kMaxExplicit)
            throw std::length_error(
                "CombinedChain::materialize: state space too large, use the factored accessors");
        const size_t n = num_states();
        std::vector<std::vector<double>> t(n, std::vector<double>(n));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) t[i][j] = joint_prob(i, j);
        return t;
    }
};

inline CombinedChain combine_chains(std::vector<TransitionMatrix> chains) {
    if (chains.empty()) throw std::invalid_argument("combine_chains: need at least one chain");
    return CombinedChain{std::move(chains)};
}

}  // namespace crn::dynamics
