#include <doctest.h>

#include <cmath>

#include "crn/geometry.hpp"

using namespace crn;
using namespace crn::scene;

TEST_CASE("poisson count: table-1 mean and zero-rate edge") {
    Rng rng(101);
    const int draws = 10000;

    double sum02 = 0.0;
    for (int i = 0; i < draws; ++i) sum02 += double(sample_poisson_count(0.2, 100.0, rng));
    const double mean02 = sum02 / draws;
    // mean 20, sigma of the sample mean = sqrt(20/n)
    CHECK(std::abs(mean02 - 20.0) < 3.0 * std::sqrt(20.0 / draws));

    for (int i = 0; i < 100; ++i) CHECK(sample_poisson_count(0.0, 100.0, rng) == 0);

    CHECK_THROWS_AS(sample_poisson_count(-0.1, 100.0, rng), std::invalid_argument);
}

TEST_CASE("poisson count: empirical mean and variance at rate 30") {
    Rng rng(202);
    const int draws = 10000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double v = double(sample_poisson_count(0.3, 100.0, rng));
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / draws;
    const double var = sumsq / draws - mean * mean;
    CHECK(std::abs(mean - 30.0) < 3.0 * std::sqrt(30.0 / draws));
    CHECK(std::abs(var - 30.0) < 0.1 * 30.0);
}

TEST_CASE("point pattern: support and quadrant statistics") {
    const Region region{10.0, 10.0};
    Rng rng(303);

    for (int i = 0; i < 50; ++i) {
        const auto pp = sample_point_pattern(region, 0.2, rng);
        for (const auto& p : pp.points) CHECK(region.contains(p));
    }

    // quadrant counts of a PPP are i.i.d. Poisson(lambda |B| / 4)
    const int draws = 1000;
    const double lam = 0.3;
    double qsum[4] = {0, 0, 0, 0};
    double qsq[4] = {0, 0, 0, 0};
    double cross01 = 0.0;
    for (int i = 0; i < draws; ++i) {
        const auto pp = sample_point_pattern(region, lam, rng);
        int q[4] = {0, 0, 0, 0};
        for (const auto& p : pp.points) {
            const int idx = (p.x >= 5.0 ? 1 : 0) + (p.y >= 5.0 ? 2 : 0);
            q[idx] += 1;
        }
        for (int k = 0; k < 4; ++k) {
            qsum[k] += q[k];
            qsq[k] += double(q[k]) * q[k];
        }
        cross01 += double(q[0]) * q[1];
    }
    const double expect = lam * 25.0;  // 7.5 per quadrant
    for (int k = 0; k < 4; ++k) {
        const double mean = qsum[k] / draws;
        const double var = qsq[k] / draws - mean * mean;
        CHECK(std::abs(mean - expect) < 3.0 * std::sqrt(expect / draws));
        CHECK(std::abs(var - expect) < 0.15 * expect);  // Poisson: var == mean
    }
    // independence: Cov(q0, q1) ~ 0
    const double cov = cross01 / draws - (qsum[0] / draws) * (qsum[1] / draws);
    CHECK(std::abs(cov) < 0.15 * expect);
}

TEST_CASE("point pattern: count variance matches Poisson at rate 30") {
    const Region region{10.0, 10.0};
    Rng rng(404);
    const int draws = 10000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double n = double(sample_point_pattern(region, 0.3, rng).points.size());
        sum += n;
        sumsq += n * n;
    }
    const double mean = sum / draws;
    const double var = sumsq / draws - mean * mean;
    CHECK(std::abs(var - 30.0) < 0.1 * 30.0);
}

TEST_CASE("coverage probability: closed form and monte carlo") {
    CHECK(coverage_probability(0.2, 10.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
    CHECK(coverage_probability(0.0, 10.0) == 0.0);

    // monotone, bounded
    double prev = 0.0;
    for (double lam = 0.0; lam <= 1.0; lam += 0.05) {
        const double p = coverage_probability(lam, 10.0);
        CHECK(p >= prev - 1e-15);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        prev = p;
    }

    // empirical coverage of uniform probes; disks sampled on a torus to
    // avoid edge effects in the oracle
    const Region region{10.0, 10.0};
    const double r = disk_radius_for_area(10.0);
    Rng rng(505);
    const int probes_total = 10000;
    int covered = 0;
    auto tor = [&](double d, double span) {
        const double a = std::abs(d);
        return std::min(a, span - a);
    };
    for (int s = 0; s < 100; ++s) {
        const auto nodes = sample_point_pattern(region, 0.2, rng);
        for (int i = 0; i < probes_total / 100; ++i) {
            const Vec2 p{rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
            bool hit = false;
            for (const auto& c : nodes.points) {
                const double dx = tor(p.x - c.x, 10.0), dy = tor(p.y - c.y, 10.0);
                if (dx * dx + dy * dy <= r * r) {
                    hit = true;
                    break;
                }
            }
            covered += hit ? 1 : 0;
        }
    }
    const double expect = 1.0 - std::exp(-2.0);
    const double frac = double(covered) / probes_total;
    const double sigma = std::sqrt(expect * (1.0 - expect) / probes_total);
    // probes within one scene are correlated; allow a few extra sigma
    CHECK(std::abs(frac - expect) < 6.0 * sigma);
}

TEST_CASE("unobserved target mean: closed form and scene oracle") {
    CHECK(unobserved_target_mean(0.3, 0.2, 10.0, 100.0) ==
          doctest::Approx(30.0 * std::exp(-2.0)).epsilon(1e-12));
    CHECK(unobserved_target_mean(0.0, 0.2, 10.0, 100.0) == 0.0);

    const Region region{10.0, 10.0};
    const double r = disk_radius_for_area(10.0);
    Rng rng(606);
    const int scenes = 1000;
    auto tor = [&](double d, double span) {
        const double a = std::abs(d);
        return std::min(a, span - a);
    };
    double total_uncovered = 0.0;
    for (int s = 0; s < scenes; ++s) {
        const auto nodes = sample_point_pattern(region, 0.2, rng);
        const auto targets = sample_point_pattern(region, 0.3, rng);
        for (const auto& t : targets.points) {
            bool hit = false;
            for (const auto& c : nodes.points) {
                const double dx = tor(t.x - c.x, 10.0), dy = tor(t.y - c.y, 10.0);
                if (dx * dx + dy * dy <= r * r) {
                    hit = true;
                    break;
                }
            }
            if (!hit) total_uncovered += 1.0;
        }
    }
    const double mean = total_uncovered / scenes;
    const double expect = 30.0 * std::exp(-2.0);
    CHECK(std::abs(mean - expect) < 6.0 * std::sqrt(expect / scenes));
}

TEST_CASE("nearest node distance: appendix formula and torus oracle") {
    CHECK(nearest_node_distance_mean(0.25) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(nearest_node_distance_mean(0.2) == doctest::Approx(1.1180339887).epsilon(1e-9));
    CHECK_THROWS_AS(nearest_node_distance_mean(0.0), std::domain_error);

    const Region region{30.0, 30.0};
    Rng rng(707);
    auto tor = [&](double d, double span) {
        const double a = std::abs(d);
        return std::min(a, span - a);
    };
    double sum = 0.0;
    int count = 0;
    for (int s = 0; s < 200; ++s) {
        const auto nodes = sample_point_pattern(region, 0.2, rng);
        if (nodes.points.empty()) continue;
        for (int i = 0; i < 50; ++i) {
            const Vec2 p{rng.uniform(0.0, 30.0), rng.uniform(0.0, 30.0)};
            double best = 1e18;
            for (const auto& c : nodes.points) {
                const double dx = tor(p.x - c.x, 30.0), dy = tor(p.y - c.y, 30.0);
                best = std::min(best, dx * dx + dy * dy);
            }
            sum += std::sqrt(best);
            count += 1;
        }
    }
    const double mean = sum / count;
    CHECK(std::abs(mean - 1.1180339887) / 1.1180339887 < 0.02);
}

TEST_CASE("covering nodes: boundary rule, cover-count law, permutation invariance") {
    const double r = disk_radius_for_area(10.0);
    std::vector<CoverageDisk> disks{{{2.0, 2.0}, r}, {{5.0, 5.0}, r}, {{2.0 + r, 2.0}, r}};

    auto ids = covering_nodes({2.0, 2.0}, disks);
    CHECK(std::find(ids.begin(), ids.end(), 0u) != ids.end());  // disk center
    CHECK(std::find(ids.begin(), ids.end(), 2u) != ids.end());  // exactly at radius: inclusive

    std::vector<CoverageDisk> permuted{disks[2], disks[0], disks[1]};
    auto ids2 = covering_nodes({2.0, 2.0}, permuted);
    CHECK(ids.size() == ids2.size());

    // empirical cover-count mean ~ Poisson(lambda_n * pi r^2) = 2 (torus)
    const Region region{10.0, 10.0};
    Rng rng(808);
    auto tor = [&](double d, double span) {
        const double a = std::abs(d);
        return std::min(a, span - a);
    };
    double cover_sum = 0.0;
    int samples = 0;
    for (int s = 0; s < 1000; ++s) {
        const auto nodes = sample_point_pattern(region, 0.2, rng);
        const Vec2 p{rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
        int k = 0;
        for (const auto& c : nodes.points) {
            const double dx = tor(p.x - c.x, 10.0), dy = tor(p.y - c.y, 10.0);
            if (dx * dx + dy * dy <= r * r) ++k;
        }
        cover_sum += k;
        samples += 1;
    }
    const double mean = cover_sum / samples;
    CHECK(std::abs(mean - 2.0) < 3.0 * std::sqrt(2.0 / samples));
}

TEST_CASE("scene generation is a pure function of the seed") {
    const Region region{10.0, 10.0};
    Rng a(909), b(909);
    const auto pa = sample_point_pattern(region, 0.2, a);
    const auto pb = sample_point_pattern(region, 0.2, b);
    REQUIRE(pa.points.size() == pb.points.size());
    for (size_t i = 0; i < pa.points.size(); ++i) {
        CHECK(pa.points[i].x == pb.points[i].x);
        CHECK(pa.points[i].y == pb.points[i].y);
    }
}
