#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "crn/markov.hpp"
#include "crn/rng.hpp"

namespace crn::policy {

using dynamics::TransitionMatrix;

// ---------------------------------------------------------------------------
// Age-of-incorrect-information machinery.
//
// The monitored source is a product of independent two-state chains (one per
// responsible target). A process keeps the joint state it last reported
// (stored at send time v) and accrues
//
//     penalty(t) = (t - v) * 1[current joint state != stored state].
//
// A deterministic threshold-p policy sends at the first lag a >= p at which
// the state is incorrect. Its long-run send rate A(p) has a closed renewal
// form below; a rate budget delta is met exactly by randomizing between the
// thresholds p0 and p0+1.
// ---------------------------------------------------------------------------

// Per-component chain view: stay probabilities plus the derived spectral
// quantities of a two-state chain.
struct ComponentChain {
    double stay[2] = {1.0, 1.0};

    static ComponentChain from(const TransitionMatrix& t) {
        ComponentChain c;
        c.stay[0] = t.stay(0);
        c.stay[1] = t.stay(1);
        return c;
    }

    double lambda() const { return stay[0] + stay[1] - 1.0; }

    double stationary(int s) const {
        const double denom = 2.0 - stay[0] - stay[1];
        return s == 0 ? (1.0 - stay[1]) / denom : (1.0 - stay[0]) / denom;
    }

    // P(X_a = s | X_0 = s)
    double return_prob(int s, int64_t a) const {
        const double pi = stationary(s);
        return pi + (1.0 - pi) * std::pow(lambda(), double(a));
    }
};

struct ThresholdPolicy {
    static constexpr int64_t kNeverUpdate = std::numeric_limits<int64_t>::max() / 4;

    int64_t p0 = 1;
    double rho_a = 1.0;  // send probability at penalty == p0
    double rho_b = 1.0;  // send probability at penalty == p0 + 1
    double delta = 0.0;  // the rate budget this policy was tuned to
    double achieved = 0.0;  // long-run rate the tuned policy realizes (= delta unless capped)
    bool starved = false;  // set when delta <= 0 forced the never-update policy

    double send_probability(int64_t penalty) const {
        if (penalty <= 0 || p0 >= kNeverUpdate) return 0.0;
        if (penalty < p0) return 0.0;
        if (penalty == p0) return rho_a;
        if (penalty == p0 + 1) return rho_b;
        return 1.0;
    }
};

namespace detail {

struct CycleResult {
    double e_cycle = std::numeric_limits<double>::infinity();
    std::vector<double> next_stored;  // distribution of the stored state after the send
};

// One renewal cycle of the randomized threshold policy, started right after
// a send with stored state `stored`. The penalty jumps to the lag t-v as
// soon as the joint state leaves the stored one, so no send can happen
// before lag p0; at lag p0 a wrong state sends w.p. rho_a, at p0+1 w.p.
// rho_b, and from p0+2 on w.p. 1. Component independence gives the
// unconditioned occupancy at lag p0 in closed form; two explicit transition
// steps and a geometric tail from the stored state finish the cycle. Exact.
inline CycleResult randomized_cycle(const std::vector<ComponentChain>& comps, size_t stored,
                                    int64_t p0, double rho_a, double rho_b) {
    const size_t k = comps.size();
    const size_t n = size_t{1} << k;
    CycleResult out;
    out.next_stored.assign(n, 0.0);

    // occupancy at lag p0 (no sends possible earlier)
    std::vector<double> pi(n);
    for (size_t x = 0; x < n; ++x) {
        double p = 1.0;
        for (size_t m = 0; m < k; ++m) {
            const int s = int((stored >> m) & 1u);
            const double back = comps[m].return_prob(s, p0);
            p *= (((x >> m) & 1u) == size_t(s)) ? back : 1.0 - back;
        }
        pi[x] = p;
    }

    auto step = [&](const std::vector<double>& v) {
        std::vector<double> w(n, 0.0);
        for (size_t y = 0; y < n; ++y) {
            if (v[y] <= 0.0) continue;
            for (size_t x = 0; x < n; ++x) {
                double p = v[y];
                for (size_t m = 0; m < k; ++m) {
                    const int ym = int((y >> m) & 1u);
                    const double stay = comps[m].stay[ym];
                    p *= (((x >> m) & 1u) == size_t(ym)) ? stay : 1.0 - stay;
                }
                w[x] += p;
            }
        }
        return w;
    };

    double e = 0.0;
    auto absorb = [&](int64_t lag, double prob_send) {
        for (size_t x = 0; x < n; ++x) {
            if (x == stored || pi[x] <= 0.0) continue;
            const double m = pi[x] * prob_send;
            e += double(lag) * m;
            out.next_stored[x] += m;
            pi[x] -= m;
        }
    };

    absorb(p0, rho_a);
    pi = step(pi);
    absorb(p0 + 1, rho_b);
    pi = step(pi);
    absorb(p0 + 2, 1.0);

    // surviving mass sits exactly at the stored state; it sends at the first
    // later departure (geometric with the joint stay probability)
    const double mu = pi[stored];
    if (mu > 0.0) {
        double stay = 1.0;
        for (size_t m = 0; m < k; ++m) stay *= comps[m].stay[int((stored >> m) & 1u)];
        const double leave = 1.0 - stay;
        if (leave <= 0.0) return out;  // chain can never leave: infinite cycle
        e += mu * (double(p0 + 2) + 1.0 / leave);
        for (size_t x = 0; x < n; ++x) {
            if (x == stored) continue;
            double p = 1.0;
            for (size_t m = 0; m < k; ++m) {
                const int s = int((stored >> m) & 1u);
                const double st = comps[m].stay[s];
                p *= (((x >> m) & 1u) == size_t(s)) ? st : 1.0 - st;
            }
            out.next_stored[x] += mu * (p / leave);
        }
    }

    double norm = 0.0;
    for (double v : out.next_stored) norm += v;
    if (norm > 0.0)
        for (double& v : out.next_stored) v /= norm;
    out.e_cycle = e;
    return out;
}

// Long-run send rate: renewal-reward over the stationary distribution of the
// embedded stored-state chain (stored states form a Markov chain sampled at
// send instants).
inline double randomized_rate(const std::vector<ComponentChain>& comps, int64_t p0, double rho_a,
                              double rho_b) {
    const size_t k = comps.size();
    if (k == 0) throw std::invalid_argument("randomized_rate: no components");
    if (k > dynamics::CombinedChain::kMaxExplicit)
        throw std::length_error("randomized_rate: too many components for the embedded solve");
    const size_t n = size_t{1} << k;

    std::vector<CycleResult> cycles(n);
    for (size_t s = 0; s < n; ++s) cycles[s] = randomized_cycle(comps, s, p0, rho_a, rho_b);

    if (k == 1) {  // two-state source: stored state simply alternates
        const double total = cycles[0].e_cycle + cycles[1].e_cycle;
        return std::isfinite(total) ? 2.0 / total : 0.0;
    }

    std::vector<double> pi(n, 1.0 / double(n)), nxt(n);
    for (int iter = 0; iter < 300; ++iter) {
        std::fill(nxt.begin(), nxt.end(), 0.0);
        for (size_t s = 0; s < n; ++s) {
            if (pi[s] <= 1e-16) continue;
            for (size_t x = 0; x < n; ++x) nxt[x] += pi[s] * cycles[s].next_stored[x];
        }
        double diff = 0.0;
        for (size_t s = 0; s < n; ++s) diff += std::abs(nxt[s] - pi[s]);
        pi.swap(nxt);
        if (diff < 1e-14) break;
    }

    double mean_cycle = 0.0;
    for (size_t s = 0; s < n; ++s) {
        if (pi[s] <= 0.0) continue;
        if (!std::isfinite(cycles[s].e_cycle)) return 0.0;
        mean_cycle += pi[s] * cycles[s].e_cycle;
    }
    return mean_cycle > 0.0 ? 1.0 / mean_cycle : 0.0;
}

}  // namespace detail

// Long-run send rate of the deterministic threshold-p policy.
inline double threshold_policy_rate(const std::vector<ComponentChain>& comps, int64_t p) {
    return detail::randomized_rate(comps, p, 1.0, 1.0);
}

// delta = alpha / M_n (Lemma-style per-target budget). M_n = 0 means the
// node has nothing to time and never sends.
inline double aoii_budget(double alpha, size_t responsibility_count) {
    if (responsibility_count == 0) return 0.0;
    return alpha / double(responsibility_count);
}

// Threshold finder. Returns the smallest p0 with A(p0+1) <= delta <= A(p0)
// and the boundary randomization that meets the budget exactly:
//   rho_a = (delta - A(p0+1)) / (A(p0) - A(p0+1))
//   rho_b = (A(p0) - delta) / (A(p0) - A(p0+1))
// delta >= A(1) degenerates to always-update-when-incorrect; delta <= 0 to
// the never-update policy (flagged).
inline ThresholdPolicy aoii_threshold(const std::vector<ComponentChain>& comps, double delta,
                                      int64_t p_max = 1'000'000) {
    ThresholdPolicy pol;
    pol.delta = delta;
    if (delta <= 0.0) {
        pol.p0 = ThresholdPolicy::kNeverUpdate;
        pol.rho_a = pol.rho_b = 0.0;
        pol.starved = true;
        return pol;
    }

    const double a1 = threshold_policy_rate(comps, 1);
    if (delta >= a1) {
        // the budget exceeds the demand of update-on-incorrect: the realized
        // rate caps at A(1)
        pol.p0 = 1;
        pol.rho_a = pol.rho_b = 1.0;
        pol.achieved = a1;
        return pol;
    }

    // A(p) is nonincreasing in p: bisect for the bracket
    int64_t lo = 1, hi = 2;
    while (threshold_policy_rate(comps, hi) > delta) {
        lo = hi;
        hi *= 2;
        if (hi >= p_max) {
            hi = p_max;
            break;
        }
    }
    while (hi - lo > 1) {
        const int64_t mid = lo + (hi - lo) / 2;
        if (threshold_policy_rate(comps, mid) >= delta)
            lo = mid;
        else
            hi = mid;
    }

    const double a_lo = threshold_policy_rate(comps, lo);
    const double a_hi = threshold_policy_rate(comps, hi);
    pol.p0 = lo;
    pol.achieved = delta;
    if (a_lo - a_hi <= 1e-15) {
        pol.rho_a = 1.0;
        pol.rho_b = 1.0;
        pol.achieved = a_lo;
        return pol;
    }

    // Mix the two bracketing deterministic policies in the standard
    // constrained-MDP way: they differ only at penalty == p0, so the
    // randomization lives there alone (rho_b = 1) and the rate is strictly
    // monotone in rho_a, running from A(p0+1) at rho_a=0 to A(p0) at
    // rho_a=1. The interpolation ratio seeds the bisection; the exact value
    // is solved because the rate is nonlinear in rho_a.
    pol.rho_b = 1.0;
    double ra_lo = 0.0, ra_hi = 1.0;
    const double guess = std::clamp((delta - a_hi) / (a_lo - a_hi), 0.0, 1.0);
    if (detail::randomized_rate(comps, lo, guess, 1.0) >= delta)
        ra_hi = guess;
    else
        ra_lo = guess;
    for (int iter = 0; iter < 60 && ra_hi - ra_lo > 1e-12; ++iter) {
        const double mid = 0.5 * (ra_lo + ra_hi);
        if (detail::randomized_rate(comps, lo, mid, 1.0) >= delta)
            ra_hi = mid;
        else
            ra_lo = mid;
    }
    pol.rho_a = 0.5 * (ra_lo + ra_hi);
    return pol;
}

inline ThresholdPolicy aoii_threshold(const std::vector<TransitionMatrix>& chains, double delta) {
    std::vector<ComponentChain> comps;
    comps.reserve(chains.size());
    for (const auto& c : chains) comps.push_back(ComponentChain::from(c));
    return aoii_threshold(comps, delta);
}

// Runtime penalty process for one responsibility (joint state over its
// components).
struct AoiiProcess {
    std::vector<ComponentChain> components;
    size_t stored_state = 0;
    int64_t last_send_t = 0;  // v
    ThresholdPolicy policy;

    int64_t penalty(size_t current_state, int64_t t) const {
        return current_state == stored_state ? 0 : t - last_send_t;
    }

    // One decision step. The coin is consumed only inside the randomized
    // band, so identical trajectories use identical randomness.
    bool step(size_t current_state, int64_t t, Rng& rng) const {
        const double p = policy.send_probability(penalty(current_state, t));
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return rng.bernoulli(p);
    }

    void mark_sent(size_t current_state, int64_t t) {
        stored_state = current_state;
        last_send_t = t;
    }
};

}  // namespace crn::policy
