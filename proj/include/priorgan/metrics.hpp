#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "priorgan/gmm.hpp"

namespace priorgan {

/// Per-component occupancy of a sample set under nearest-mean assignment.
struct FrequencyProfile {
    std::vector<std::uint64_t> counts;
    Vec frequencies;
    std::uint64_t total = 0;

    static FrequencyProfile from_counts(std::vector<std::uint64_t> counts);
    std::size_t components() const noexcept { return counts.size(); }
};

/// Anchors of the affine log-density normalisation used by the quality score.
struct QsCalibration {
    double log_density_low = 0.0;   // 1st percentile over the real set
    double log_density_high = 0.0;  // 99th percentile over the real set
};

struct DiversityDistance {
    Vec d;  // f^r − f^g
    double dds = 0.0;
};

FrequencyProfile frequency_profile(const GmmPrior& prior, std::span<const Vec> features);
DiversityDistance diversity_distance(const FrequencyProfile& real, const FrequencyProfile& gen);
/// Same, directly on frequency vectors.
DiversityDistance diversity_distance(std::span<const double> real_freq, std::span<const double> gen_freq);

inline constexpr std::size_t kMinCalibrationPoints = 100;

QsCalibration calibrate_qs(const GmmPrior& prior, std::span<const Vec> real_features);
/// Calibration from precomputed log densities (≥ 100 values).
QsCalibration calibrate_qs_from_log_densities(std::vector<double> log_densities);

/// clamp((log p − low)/(high − low), 0, 1) for one log density.
double normalized_log_density(const QsCalibration& cal, double log_density);
/// Mean normalised log density over a set; in [0, 1].
double quality_score(const GmmPrior& prior, const QsCalibration& cal, std::span<const Vec> features);
double quality_score_from_log_densities(const QsCalibration& cal, std::span<const double> log_densities);

}  // namespace priorgan
