#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace crn {

// Deterministic stream derivation: every random quantity in a run is drawn
// from a stream keyed by (master_seed, purpose, entity id, replication).
// Streams are independent mt19937_64 engines, so adding a policy or
// reordering consumers never perturbs another stream.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t master, uint64_t rep, uint64_t purpose, uint64_t id = 0) {
    uint64_t s = splitmix64(master ^ splitmix64(rep + 0x51ed270b4d5ce090ULL));
    s = splitmix64(s ^ splitmix64(purpose + 0x9e6c63d0a8e4c1f3ULL));
    return splitmix64(s ^ splitmix64(id + 0xd1b54a32d192ed03ULL));
}

// Stream purposes. Sensing/motion streams are keyed per entity and consumed
// identically under every policy (common random numbers); only Policy and
// AoiiCoin streams depend on the policy being run.
enum class Stream : uint64_t {
    SceneNodes = 1,
    SceneTargets = 2,
    TargetChain = 3,
    TargetMotion = 4,
    TargetNoise = 5,
    Births = 6,
    NodeSensing = 7,
    Policy = 8,
    AoiiCoin = 9,
};

// Self-contained sampler on top of mt19937_64. The distribution algorithms
// are implemented here rather than taken from <random> because libstdc++'s
// distributions are not pinned by the standard; these are.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // uniform in [0,1) with 53-bit resolution
    double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    // uniform integer in [0, n)
    uint64_t below(uint64_t n) {
        // rejection to remove modulo bias
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do { v = eng_(); } while (v >= limit);
        return v % n;
    }

    bool bernoulli(double p) { return u01() < p; }

    // Marsaglia polar method
    double normal(double mean = 0.0, double stddev = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + stddev * spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * u01() - 1.0;
            v = 2.0 * u01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return mean + stddev * u * f;
    }

    // Exact Poisson sampling by Knuth's product method. For large means the
    // draw is split into chunks of mean <= 500 (a Poisson variate is the sum
    // of independent Poisson variates), which keeps exp(-mean) in range.
    uint64_t poisson(double mean) {
        if (mean < 0.0) throw std::invalid_argument("poisson: negative mean");
        if (mean == 0.0) return 0;
        uint64_t total = 0;
        double remaining = mean;
        while (remaining > 500.0) {
            total += poisson_knuth_(500.0);
            remaining -= 500.0;
        }
        return total + poisson_knuth_(remaining);
    }

    uint64_t binomial(uint64_t n, double p) {
        if (p <= 0.0) return 0;
        if (p >= 1.0) return n;
        uint64_t k = 0;
        for (uint64_t i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
        return k;
    }

    double exponential(double rate) { return -std::log(1.0 - u01()) / rate; }

    // uniform k-subset of {0..n-1}, ascending order (partial Fisher-Yates)
    std::vector<size_t> sample_without_replacement(size_t n, size_t k) {
        std::vector<size_t> idx(n);
        for (size_t i = 0; i < n; ++i) idx[i] = i;
        if (k > n) k = n;
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + static_cast<size_t>(below(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        std::sort(idx.begin(), idx.end());
        return idx;
    }

private:
    uint64_t poisson_knuth_(double mean) {
        const double limit = std::exp(-mean);
        double prod = u01();
        uint64_t k = 0;
        while (prod > limit) {
            ++k;
            prod *= u01();
        }
        return k;
    }

    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline Rng make_stream(uint64_t master, uint64_t rep, Stream purpose, uint64_t id = 0) {
    return Rng(derive_seed(master, rep, static_cast<uint64_t>(purpose), id));
}

}  // namespace crn
