#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "priorgan/gmm.hpp"
#include "priorgan/metrics.hpp"

namespace priorgan {

/// Thresholded quality loss settings. The threshold is held in log units so
/// the strict comparison p < θ is exact in the domain the density is
/// computed in.
struct QualityLossConfig {
    double log_theta = 0.0;
    double delta = 0.1;
    double theta_percentile = 5.0;

    double theta() const;
};

/// −log p(f) when p(f) < θ, else exactly 0.
double quality_loss(const GmmPrior& prior, const QualityLossConfig& cfg, std::span<const double> feature);
/// ∂/∂f of quality_loss: Σ_i γ_i Σ_i⁻¹ (f − μ_i) on the penalised set, zero
/// elsewhere (including p = θ).
Vec quality_loss_gradient(const GmmPrior& prior, const QualityLossConfig& cfg, std::span<const double> feature);

/// log θ at the given percentile (0, 50) of real-set log densities.
double calibrate_log_theta(const GmmPrior& prior, std::span<const Vec> real_features, double percentile);
/// θ itself (probability units).
double calibrate_theta(const GmmPrior& prior, std::span<const Vec> real_features, double percentile);

/// Pre-normalisation vector max(f^r_i + α·d_i, 0).
Vec resample_unnormalized(std::span<const double> real_freq, std::span<const double> gen_freq, double alpha);
/// Normalised resampling frequencies; AllClippedToZero when nothing survives.
Vec resample_update(const FrequencyProfile& real, const FrequencyProfile& gen, double alpha);
Vec resample_update(std::span<const double> real_freq, std::span<const double> gen_freq, double alpha);

/// Group-wise real-data sampler: pick a group by `new_frequencies`, then a
/// uniform member of that group's pool.
struct ResamplePlan {
    double alpha = 0.0;
    Vec real_frequencies;
    Vec gen_frequencies;
    Vec new_frequencies;
    std::vector<std::vector<std::size_t>> group_pools;
    Rng rng_stream;
};

/// Pools of real-sample indices keyed by nearest component.
std::vector<std::vector<std::size_t>> build_group_pools(const GmmPrior& prior, std::span<const Vec> real_features);

std::vector<std::size_t> draw_real_batch(ResamplePlan& plan, std::size_t batch);

ResamplePlan refresh_plan(const GmmPrior& prior, std::span<const Vec> real_features, std::span<const Vec> gen_features,
                          double alpha, Rng rng);
/// Variant reusing pools and the real profile computed once for a fixed real set.
ResamplePlan refresh_plan(const GmmPrior& prior, const FrequencyProfile& real_profile,
                          std::vector<std::vector<std::size_t>> pools, std::span<const Vec> gen_features, double alpha,
                          Rng rng);

}  // namespace priorgan
