#include "priorgan/prior_model.hpp"

namespace priorgan {

bool operator==(const PriorModel& a, const PriorModel& b) {
    return a.feature_map == b.feature_map && a.gmm == b.gmm && a.qs.log_density_low == b.qs.log_density_low &&
           a.qs.log_density_high == b.qs.log_density_high && a.log_theta == b.log_theta &&
           a.theta_percentile == b.theta_percentile && a.real_profile.counts == b.real_profile.counts &&
           a.meta.seed == b.meta.seed && a.meta.iterations == b.meta.iterations &&
           a.meta.final_nll == b.meta.final_nll && a.meta.converged == b.meta.converged &&
           a.meta.real_count == b.meta.real_count && a.meta.ridge == b.meta.ridge &&
           a.meta.rng_version == b.meta.rng_version && a.meta.world == b.meta.world;
}

PriorFit fit_prior_model(std::span<const Vec> real_samples, const PriorFitSettings& settings, Rng& rng) {
    require(!real_samples.empty(), ErrorCode::EmptySet, "prior fit on an empty sample set");
    const std::size_t d = real_samples.front().size();

    FeatureMap fmap = [&] {
        switch (settings.feature) {
        case FeatureKind::Identity: return FeatureMap::identity(d);
        case FeatureKind::RandomProjection: {
            Rng proj = rng.derive(0x70726f6aULL);
            return FeatureMap::random_projection(d, settings.projection_dim, proj);
        }
        case FeatureKind::Pca: return FeatureMap::fit_pca(real_samples, settings.variance_keep);
        }
        return FeatureMap::identity(d);
    }();

    const auto feats = fmap.apply_all(real_samples);
    EmConfig em{settings.max_iters, settings.tol, default_ridge(feats, settings.ridge_scale)};
    EmFit fit = fit_em(feats, settings.components, rng, em);

    const QsCalibration qs = calibrate_qs(fit.prior, feats);
    const double log_theta = calibrate_log_theta(fit.prior, feats, settings.theta_percentile);
    FrequencyProfile profile = frequency_profile(fit.prior, feats);

    PriorFitMetadata meta;
    meta.seed = rng.seed();
    meta.iterations = fit.report.iterations_run;
    meta.final_nll = fit.report.nll_trace.back();
    meta.converged = fit.report.converged;
    meta.real_count = real_samples.size();
    meta.ridge = em.ridge;

    PriorModel model{std::move(fmap), std::move(fit.prior), qs, log_theta, settings.theta_percentile,
                     std::move(profile), std::move(meta)};
    return PriorFit{std::move(model), std::move(fit.report)};
}

}  // namespace priorgan
