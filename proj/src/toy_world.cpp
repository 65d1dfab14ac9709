#include "priorgan/toy_world.hpp"

#include <cmath>
#include <numbers>

namespace priorgan {

WorldSpec WorldSpec::ring(std::size_t k, double radius, double sigma) {
    WorldSpec s;
    s.kind = WorldKind::Ring;
    s.k = k;
    s.radius = radius;
    s.sigma = sigma;
    return s;
}

WorldSpec WorldSpec::two_region(double separation, double sigma) {
    WorldSpec s;
    s.kind = WorldKind::TwoRegion;
    s.separation = separation;
    s.sigma = sigma;
    return s;
}

WorldSpec WorldSpec::grid(std::size_t rows, std::size_t cols, double sigma, double spacing) {
    WorldSpec s;
    s.kind = WorldKind::Grid;
    s.rows = rows;
    s.cols = cols;
    s.sigma = sigma;
    s.spacing = spacing;
    return s;
}

std::string to_string(WorldKind kind) {
    switch (kind) {
    case WorldKind::Ring: return "ring";
    case WorldKind::TwoRegion: return "two_region";
    case WorldKind::Grid: return "grid";
    }
    return "ring";
}

WorldKind world_kind_from_string(const std::string& name) {
    if (name == "ring") return WorldKind::Ring;
    if (name == "two_region") return WorldKind::TwoRegion;
    if (name == "grid") return WorldKind::Grid;
    fail(ErrorCode::InvalidArgument, "unknown world kind '" + name + "'");
}

ToyWorld::ToyWorld(WorldSpec spec) : spec_(spec) {
    require(spec_.sigma > 0.0 && std::isfinite(spec_.sigma), ErrorCode::InvalidArgument, "world sigma must be > 0");
    switch (spec_.kind) {
    case WorldKind::Ring:
        require(spec_.k >= 1 && spec_.radius > 0.0, ErrorCode::InvalidArgument, "ring needs k >= 1 and radius > 0");
        for (std::size_t j = 0; j < spec_.k; ++j) {
            const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(spec_.k);
            centers_.push_back({spec_.radius * std::cos(a), spec_.radius * std::sin(a)});
        }
        break;
    case WorldKind::TwoRegion:
        require(spec_.separation > 0.0, ErrorCode::InvalidArgument, "two_region needs separation > 0");
        centers_.push_back({-0.5 * spec_.separation, 0.0});
        centers_.push_back({0.5 * spec_.separation, 0.0});
        break;
    case WorldKind::Grid: {
        require(spec_.rows >= 1 && spec_.cols >= 1 && spec_.spacing > 0.0, ErrorCode::InvalidArgument,
                "grid needs rows, cols >= 1 and spacing > 0");
        const double x0 = -0.5 * spec_.spacing * static_cast<double>(spec_.cols - 1);
        const double y0 = -0.5 * spec_.spacing * static_cast<double>(spec_.rows - 1);
        for (std::size_t r = 0; r < spec_.rows; ++r)
            for (std::size_t c = 0; c < spec_.cols; ++c)
                centers_.push_back({x0 + spec_.spacing * static_cast<double>(c), y0 + spec_.spacing * static_cast<double>(r)});
        break;
    }
    }
}

double ToyWorld::log_density(std::span<const double> x) const {
    require(x.size() == 2, ErrorCode::DimensionMismatch, "toy worlds are two-dimensional");
    const double s2 = spec_.sigma * spec_.sigma;
    const double log_norm = -std::log(static_cast<double>(modes())) - std::log(2.0 * std::numbers::pi * s2);
    Vec terms(modes());
    for (std::size_t j = 0; j < modes(); ++j) terms[j] = log_norm - 0.5 * squared_distance(x, centers_[j]) / s2;
    return log_sum_exp(terms);
}

double ToyWorld::density(std::span<const double> x) const {
    require(x.size() == 2, ErrorCode::DimensionMismatch, "toy worlds are two-dimensional");
    const double s2 = spec_.sigma * spec_.sigma;
    const double norm = 1.0 / (static_cast<double>(modes()) * 2.0 * std::numbers::pi * s2);
    double p = 0.0;
    for (const auto& c : centers_) p += norm * std::exp(-0.5 * squared_distance(x, c) / s2);
    return p;
}

Vec ToyWorld::log_density_gradient(std::span<const double> x) const {
    require(x.size() == 2, ErrorCode::DimensionMismatch, "toy worlds are two-dimensional");
    const double s2 = spec_.sigma * spec_.sigma;
    Vec terms(modes());
    for (std::size_t j = 0; j < modes(); ++j) terms[j] = -0.5 * squared_distance(x, centers_[j]) / s2;
    const double lse = log_sum_exp(terms);
    Vec g(2, 0.0);
    for (std::size_t j = 0; j < modes(); ++j) {
        const double gamma = std::exp(terms[j] - lse);
        g[0] -= gamma * (x[0] - centers_[j][0]) / s2;
        g[1] -= gamma * (x[1] - centers_[j][1]) / s2;
    }
    return g;
}

std::vector<Vec> ToyWorld::sample(Rng& rng, std::size_t n) const {
    std::vector<Vec> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = centers_[rng.uniform_index(modes())];
        const double a = rng.normal();
        const double b = rng.normal();
        out.push_back({c[0] + spec_.sigma * a, c[1] + spec_.sigma * b});
    }
    return out;
}

BoundingBox ToyWorld::bounding_box(double margin_sigmas) const {
    BoundingBox b{centers_[0][0], centers_[0][0], centers_[0][1], centers_[0][1]};
    for (const auto& c : centers_) {
        b.x_min = std::min(b.x_min, c[0]);
        b.x_max = std::max(b.x_max, c[0]);
        b.y_min = std::min(b.y_min, c[1]);
        b.y_max = std::max(b.y_max, c[1]);
    }
    const double m = margin_sigmas * spec_.sigma;
    return {b.x_min - m, b.x_max + m, b.y_min - m, b.y_max + m};
}

ModeCoverage mode_coverage(const ToyWorld& world, std::span<const Vec> samples, double capture_radius,
                           double min_fraction) {
    require(!samples.empty(), ErrorCode::EmptySet, "mode coverage of an empty sample set");
    ModeCoverage out;
    out.fraction_per_mode.assign(world.modes(), 0.0);
    const double r2 = capture_radius * capture_radius;
    for (const auto& s : samples)
        for (std::size_t j = 0; j < world.modes(); ++j)
            if (squared_distance(s, world.centers()[j]) <= r2) out.fraction_per_mode[j] += 1.0;
    const double n = static_cast<double>(samples.size());
    for (double& f : out.fraction_per_mode) {
        f /= n;
        if (f >= min_fraction) ++out.covered;
    }
    return out;
}

double high_quality_fraction(const ToyWorld& world, std::span<const Vec> samples, double density_floor) {
    require(!samples.empty(), ErrorCode::EmptySet, "high-quality fraction of an empty sample set");
    std::size_t hits = 0;
    for (const auto& s : samples)
        if (world.density(s) >= density_floor) ++hits;
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

double calibrate_density_floor(const ToyWorld& world, Rng& rng, std::size_t n, double pct) {
    const auto draws = world.sample(rng, n);
    std::vector<double> dens;
    dens.reserve(n);
    for (const auto& x : draws) dens.push_back(world.density(x));
    return percentile(std::move(dens), pct);
}

}  // namespace priorgan
