#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "crn/rng.hpp"

namespace crn::scene {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
};

inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

// Rectangular surveillance region [0,w] x [0,h], areas in km^2.
struct Region {
    double width_km = 10.0;
    double height_km = 10.0;

    double area() const { return width_km * height_km; }
    bool contains(const Vec2& p) const {
        return p.x >= 0.0 && p.x <= width_km && p.y >= 0.0 && p.y <= height_km;
    }
};

struct PointPattern {
    std::vector<Vec2> points;
    double density = 0.0;  // per km^2
};

struct CoverageDisk {
    Vec2 center;
    double radius_km = 0.0;

    bool covers(const Vec2& p) const { return dist(center, p) <= radius_km; }
};

// --- Poisson point process ------------------------------------------------

inline uint64_t sample_poisson_count(double density, double area, Rng& rng) {
    if (density < 0.0) throw std::invalid_argument("sample_poisson_count: density < 0");
    if (area <= 0.0) throw std::invalid_argument("sample_poisson_count: area <= 0");
    return rng.poisson(density * area);
}

// Count-then-uniform construction: N ~ Poisson(density*|B|), then N points
// i.i.d. uniform over B.
inline PointPattern sample_point_pattern(const Region& region, double density, Rng& rng) {
    PointPattern pp;
    pp.density = density;
    const uint64_t n = sample_poisson_count(density, region.area(), rng);
    pp.points.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
        pp.points.push_back({rng.uniform(0.0, region.width_km), rng.uniform(0.0, region.height_km)});
    }
    return pp;
}

// --- Boolean coverage model -----------------------------------------------

// P(location covered) = 1 - exp(-lambda_n * E|S_n|)
inline double coverage_probability(double node_density, double mean_disk_area) {
    if (node_density < 0.0 || mean_disk_area < 0.0)
        throw std::invalid_argument("coverage_probability: negative input");
    return 1.0 - std::exp(-node_density * mean_disk_area);
}

// Poisson mean of targets lying outside all coverage disks:
// lambda_m * |B| * exp(-lambda_n * pi r^2)
inline double unobserved_target_mean(double target_density, double node_density,
                                     double disk_area, double region_area) {
    if (target_density < 0.0 || node_density < 0.0 || disk_area < 0.0 || region_area < 0.0)
        throw std::invalid_argument("unobserved_target_mean: negative input");
    return target_density * region_area * std::exp(-node_density * disk_area);
}

// E[distance to nearest node] = 1 / (2 sqrt(lambda_n)) for a planar PPP
inline double nearest_node_distance_mean(double node_density) {
    if (node_density <= 0.0)
        throw std::domain_error("nearest_node_distance_mean: density must be positive");
    return 1.0 / (2.0 * std::sqrt(node_density));
}

// Ids of disks containing the target; boundary (distance == radius) counts
// as covered. Order-stable in the input list, hence permutation-invariant
// as a set.
inline std::vector<size_t> covering_nodes(const Vec2& target, const std::vector<CoverageDisk>& disks) {
    std::vector<size_t> out;
    for (size_t i = 0; i < disks.size(); ++i) {
        if (disks[i].covers(target)) out.push_back(i);
    }
    return out;
}

inline double disk_radius_for_area(double area) { return std::sqrt(area / M_PI); }

}  // namespace crn::scene
