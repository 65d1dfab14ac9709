#include "priorgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace priorgan {

FrequencyProfile FrequencyProfile::from_counts(std::vector<std::uint64_t> counts) {
    require(!counts.empty(), ErrorCode::InvalidArgument, "profile needs at least one component");
    FrequencyProfile p;
    p.counts = std::move(counts);
    for (auto c : p.counts) p.total += c;
    require(p.total > 0, ErrorCode::EmptySet, "frequency profile over an empty set");
    p.frequencies.resize(p.counts.size());
    const double total = static_cast<double>(p.total);
    for (std::size_t i = 0; i < p.counts.size(); ++i) p.frequencies[i] = static_cast<double>(p.counts[i]) / total;
    return p;
}

FrequencyProfile frequency_profile(const GmmPrior& prior, std::span<const Vec> features) {
    require(!features.empty(), ErrorCode::EmptySet, "frequency profile over an empty set");
    std::vector<std::uint64_t> counts(prior.components(), 0);
    for (const auto& f : features) ++counts[prior.assign_component(f)];
    return FrequencyProfile::from_counts(std::move(counts));
}

DiversityDistance diversity_distance(std::span<const double> real_freq, std::span<const double> gen_freq) {
    if (real_freq.size() != gen_freq.size())
        fail(ErrorCode::ProfileLengthMismatch, "profiles have " + std::to_string(real_freq.size()) + " and " +
                                                   std::to_string(gen_freq.size()) + " components");
    DiversityDistance out;
    out.d.resize(real_freq.size());
    for (std::size_t i = 0; i < real_freq.size(); ++i) {
        out.d[i] = real_freq[i] - gen_freq[i];
        out.dds += std::abs(out.d[i]);
    }
    return out;
}

DiversityDistance diversity_distance(const FrequencyProfile& real, const FrequencyProfile& gen) {
    return diversity_distance(real.frequencies, gen.frequencies);
}

QsCalibration calibrate_qs_from_log_densities(std::vector<double> log_densities) {
    if (log_densities.size() < kMinCalibrationPoints)
        fail(ErrorCode::TooFewPoints, "quality calibration needs at least 100 real samples, got " +
                                          std::to_string(log_densities.size()));
    QsCalibration cal;
    cal.log_density_low = percentile(log_densities, 1.0);
    cal.log_density_high = percentile(std::move(log_densities), 99.0);
    if (!(cal.log_density_low < cal.log_density_high))
        fail(ErrorCode::DegenerateCalibration, "1st and 99th percentile log densities coincide");
    return cal;
}

QsCalibration calibrate_qs(const GmmPrior& prior, std::span<const Vec> real_features) {
    std::vector<double> lds;
    lds.reserve(real_features.size());
    for (const auto& f : real_features) lds.push_back(prior.log_density(f));
    return calibrate_qs_from_log_densities(std::move(lds));
}

double normalized_log_density(const QsCalibration& cal, double log_density) {
    const double t = (log_density - cal.log_density_low) / (cal.log_density_high - cal.log_density_low);
    return std::clamp(t, 0.0, 1.0);
}

double quality_score_from_log_densities(const QsCalibration& cal, std::span<const double> log_densities) {
    require(!log_densities.empty(), ErrorCode::EmptySet, "quality score over an empty set");
    double s = 0.0;
    for (double ld : log_densities) s += normalized_log_density(cal, ld);
    return s / static_cast<double>(log_densities.size());
}

double quality_score(const GmmPrior& prior, const QsCalibration& cal, std::span<const Vec> features) {
    require(!features.empty(), ErrorCode::EmptySet, "quality score over an empty set");
    double s = 0.0;
    for (const auto& f : features) s += normalized_log_density(cal, prior.log_density(f));
    return s / static_cast<double>(features.size());
}

}  // namespace priorgan
