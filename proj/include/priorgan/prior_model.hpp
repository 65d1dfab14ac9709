#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "priorgan/feature_map.hpp"
#include "priorgan/gmm.hpp"
#include "priorgan/guidance.hpp"
#include "priorgan/metrics.hpp"
#include "priorgan/toy_world.hpp"

namespace priorgan {

struct PriorFitSettings {
    std::size_t components = 8;
    FeatureKind feature = FeatureKind::Identity;
    double variance_keep = 0.98;       // pca
    std::size_t projection_dim = 2;    // random_projection
    double theta_percentile = 5.0;
    int max_iters = 500;
    double tol = 1e-6;
    double ridge_scale = 1e-6;         // ridge = scale · mean data variance
};

struct PriorFitMetadata {
    std::uint64_t seed = 0;
    int iterations = 0;
    double final_nll = 0.0;
    bool converged = false;
    std::size_t real_count = 0;
    double ridge = 0.0;
    std::string rng_version = Rng::kVersion;
    std::optional<WorldSpec> world;
};

/// Everything needed to score samples against the real-data prior: the
/// feature map, the mixture over features, the quality-score anchors, the
/// quality-loss threshold and the real occupancy profile.
struct PriorModel {
    FeatureMap feature_map;
    GmmPrior gmm;
    QsCalibration qs;
    double log_theta = 0.0;
    double theta_percentile = 5.0;
    FrequencyProfile real_profile;
    PriorFitMetadata meta;

    Vec features(std::span<const double> x) const { return feature_map.apply(x); }
    std::vector<Vec> features(std::span<const Vec> xs) const { return feature_map.apply_all(xs); }
    QualityLossConfig quality_config(double delta) const { return {log_theta, delta, theta_percentile}; }

    friend bool operator==(const PriorModel& a, const PriorModel& b);
};

struct PriorFit {
    PriorModel model;
    EmReport report;
};

/// Fit the feature map, then EM on the mapped real samples, then the
/// quality-score anchors, θ and the real occupancy profile.
PriorFit fit_prior_model(std::span<const Vec> real_samples, const PriorFitSettings& settings, Rng& rng);

}  // namespace priorgan
