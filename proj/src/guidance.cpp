#include "priorgan/guidance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace priorgan {

double QualityLossConfig::theta() const { return std::exp(log_theta); }

double quality_loss(const GmmPrior& prior, const QualityLossConfig& cfg, std::span<const double> feature) {
    const double lp = prior.log_density(feature);
    return lp < cfg.log_theta ? -lp : 0.0;
}

Vec quality_loss_gradient(const GmmPrior& prior, const QualityLossConfig& cfg, std::span<const double> feature) {
    const double lp = prior.log_density(feature);
    if (!(lp < cfg.log_theta)) return Vec(prior.dim(), 0.0);
    Vec g = prior.log_density_gradient(feature);
    for (double& v : g) v = -v;
    return g;
}

double calibrate_log_theta(const GmmPrior& prior, std::span<const Vec> real_features, double pct) {
    require(pct > 0.0 && pct < 50.0, ErrorCode::InvalidArgument, "theta percentile must lie in (0, 50)");
    if (real_features.size() < kMinCalibrationPoints)
        fail(ErrorCode::TooFewPoints, "theta calibration needs at least 100 real samples, got " +
                                          std::to_string(real_features.size()));
    std::vector<double> lds;
    lds.reserve(real_features.size());
    for (const auto& f : real_features) lds.push_back(prior.log_density(f));
    return percentile(std::move(lds), pct);
}

double calibrate_theta(const GmmPrior& prior, std::span<const Vec> real_features, double pct) {
    return std::exp(calibrate_log_theta(prior, real_features, pct));
}

Vec resample_unnormalized(std::span<const double> real_freq, std::span<const double> gen_freq, double alpha) {
    const auto dist = diversity_distance(real_freq, gen_freq);
    Vec out(real_freq.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(real_freq[i] + alpha * dist.d[i], 0.0);
    return out;
}

Vec resample_update(std::span<const double> real_freq, std::span<const double> gen_freq, double alpha) {
    require(alpha > 0.0, ErrorCode::InvalidArgument, "resample weight alpha must be > 0");
    Vec f = resample_unnormalized(real_freq, gen_freq, alpha);
    double total = 0.0;
    for (double v : f) total += v;
    if (!(total > 0.0)) fail(ErrorCode::AllClippedToZero, "every resampling frequency clipped to zero");
    for (double& v : f) v /= total;
    return f;
}

Vec resample_update(const FrequencyProfile& real, const FrequencyProfile& gen, double alpha) {
    return resample_update(real.frequencies, gen.frequencies, alpha);
}

std::vector<std::vector<std::size_t>> build_group_pools(const GmmPrior& prior, std::span<const Vec> real_features) {
    std::vector<std::vector<std::size_t>> pools(prior.components());
    for (std::size_t i = 0; i < real_features.size(); ++i) pools[prior.assign_component(real_features[i])].push_back(i);
    return pools;
}

std::vector<std::size_t> draw_real_batch(ResamplePlan& plan, std::size_t batch) {
    require(batch >= 1, ErrorCode::InvalidArgument, "batch must be >= 1");
    require(plan.group_pools.size() == plan.new_frequencies.size(), ErrorCode::DimensionMismatch,
            "plan pools and frequencies disagree on group count");
    for (std::size_t g = 0; g < plan.group_pools.size(); ++g)
        if (plan.new_frequencies[g] > 0.0 && plan.group_pools[g].empty())
            fail(ErrorCode::EmptyGroupPool, "group " + std::to_string(g) + " has positive frequency but no real samples");

    std::vector<std::size_t> out(batch);
    for (auto& idx : out) {
        const std::size_t g = sample_categorical(plan.rng_stream, plan.new_frequencies);
        const auto& pool = plan.group_pools[g];
        idx = pool[plan.rng_stream.uniform_index(pool.size())];
    }
    return out;
}

ResamplePlan refresh_plan(const GmmPrior& prior, const FrequencyProfile& real_profile,
                          std::vector<std::vector<std::size_t>> pools, std::span<const Vec> gen_features, double alpha,
                          Rng rng) {
    const FrequencyProfile gen_profile = frequency_profile(prior, gen_features);
    ResamplePlan plan;
    plan.alpha = alpha;
    plan.real_frequencies = real_profile.frequencies;
    plan.gen_frequencies = gen_profile.frequencies;
    plan.new_frequencies = resample_update(real_profile, gen_profile, alpha);
    plan.group_pools = std::move(pools);
    plan.rng_stream = rng;
    return plan;
}

ResamplePlan refresh_plan(const GmmPrior& prior, std::span<const Vec> real_features, std::span<const Vec> gen_features,
                          double alpha, Rng rng) {
    require(!real_features.empty() && !gen_features.empty(), ErrorCode::EmptySet, "refresh_plan needs non-empty sets");
    return refresh_plan(prior, frequency_profile(prior, real_features), build_group_pools(prior, real_features),
                        gen_features, alpha, rng);
}

}  // namespace priorgan
