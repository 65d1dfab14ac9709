#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "priorgan/numerics.hpp"

namespace priorgan {

enum class WorldKind { Ring, TwoRegion, Grid };

/// Equal-weight isotropic Gaussian mixture in the plane.
struct WorldSpec {
    WorldKind kind = WorldKind::Ring;
    std::size_t k = 8;          // ring: number of modes
    double radius = 2.0;        // ring
    double separation = 4.0;    // two_region: distance between the two centres
    std::size_t rows = 3;       // grid
    std::size_t cols = 3;       // grid
    double spacing = 2.0;       // grid
    double sigma = 0.1;

    static WorldSpec ring(std::size_t k, double radius, double sigma);
    static WorldSpec two_region(double separation, double sigma);
    static WorldSpec grid(std::size_t rows, std::size_t cols, double sigma, double spacing = 2.0);

    friend bool operator==(const WorldSpec&, const WorldSpec&) = default;
};

std::string to_string(WorldKind kind);
WorldKind world_kind_from_string(const std::string& name);

struct BoundingBox {
    double x_min, x_max, y_min, y_max;
};

class ToyWorld {
public:
    explicit ToyWorld(WorldSpec spec);

    const WorldSpec& spec() const noexcept { return spec_; }
    const std::vector<Vec>& centers() const noexcept { return centers_; }
    std::size_t modes() const noexcept { return centers_.size(); }
    double sigma() const noexcept { return spec_.sigma; }

    double log_density(std::span<const double> x) const;
    /// Exact mixture density; values below the double range read as 0.
    double density(std::span<const double> x) const;
    Vec log_density_gradient(std::span<const double> x) const;

    std::vector<Vec> sample(Rng& rng, std::size_t n) const;

    /// Mode centres padded by `margin_sigmas`·σ on every side.
    BoundingBox bounding_box(double margin_sigmas = 4.0) const;

private:
    WorldSpec spec_;
    std::vector<Vec> centers_;
};

struct ModeCoverage {
    std::size_t covered = 0;
    Vec fraction_per_mode;
};

/// A mode counts as covered when at least `min_fraction` of the samples lie
/// within `capture_radius` of its centre.
ModeCoverage mode_coverage(const ToyWorld& world, std::span<const Vec> samples, double capture_radius,
                           double min_fraction = 0.01);

/// Fraction of samples whose world density is at least `density_floor`.
double high_quality_fraction(const ToyWorld& world, std::span<const Vec> samples, double density_floor);

/// Density floor = given percentile of world density over `n` fresh world draws.
double calibrate_density_floor(const ToyWorld& world, Rng& rng, std::size_t n = 10000, double pct = 5.0);

}  // namespace priorgan
