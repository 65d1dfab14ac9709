#include "json_codec.hpp"

namespace priorgan::codec {

json world_to_json(const WorldSpec& w) {
    json j = {{"kind", to_string(w.kind)}, {"sigma", w.sigma}};
    switch (w.kind) {
        case WorldKind::Ring:
            j["k"] = w.k;
            j["radius"] = w.radius;
            break;
        case WorldKind::TwoRegion:
            j["separation"] = w.separation;
            break;
        case WorldKind::Grid:
            j["rows"] = w.rows;
            j["cols"] = w.cols;
            j["spacing"] = w.spacing;
            break;
    }
    return j;
}

WorldSpec world_from_json(const json& j) {
    const WorldKind kind = world_kind_from_string(get<std::string>(j, "kind"));
    WorldSpec w;
    switch (kind) {
        case WorldKind::Ring: w = WorldSpec::ring(8, 2.0, 0.1); break;
        case WorldKind::TwoRegion: w = WorldSpec::two_region(4.0, 0.25); break;
        case WorldKind::Grid: w = WorldSpec::grid(3, 3, 0.1); break;
    }
    w.sigma = j.value("sigma", w.sigma);
    w.k = j.value("k", w.k);
    w.radius = j.value("radius", w.radius);
    w.separation = j.value("separation", w.separation);
    w.rows = j.value("rows", w.rows);
    w.cols = j.value("cols", w.cols);
    w.spacing = j.value("spacing", w.spacing);
    // Re-run the factory so its validation applies to the merged values.
    switch (kind) {
        case WorldKind::Ring: return WorldSpec::ring(w.k, w.radius, w.sigma);
        case WorldKind::TwoRegion: return WorldSpec::two_region(w.separation, w.sigma);
        case WorldKind::Grid: return WorldSpec::grid(w.rows, w.cols, w.sigma, w.spacing);
    }
    return w;
}

json train_config_to_json(const TrainConfig& c) {
    return {{"latent_dim", c.latent_dim},
            {"hidden_width", c.hidden_width},
            {"batch_size", c.batch_size},
            {"d_steps_per_g_step", c.d_steps_per_g_step},
            {"learning_rate", c.learning_rate},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"total_g_iters", c.total_g_iters},
            {"delta", c.delta},
            {"alpha", c.alpha},
            {"refresh_every", c.refresh_every},
            {"gen_sample_count", c.gen_sample_count},
            {"seed", c.seed},
            {"loss", to_string(c.loss)},
            {"real_set_size", c.real_set_size},
            {"log_every", c.log_every},
            {"eval_samples", c.eval_samples},
            {"capture_sigmas", c.capture_sigmas},
            {"guidance_warmup", c.guidance_warmup},
            {"final_eval_samples", c.final_eval_samples}};
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    c.hidden_width = j.value("hidden_width", c.hidden_width);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.d_steps_per_g_step = j.value("d_steps_per_g_step", c.d_steps_per_g_step);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.total_g_iters = j.value("total_g_iters", c.total_g_iters);
    c.delta = j.value("delta", c.delta);
    c.alpha = j.value("alpha", c.alpha);
    c.refresh_every = j.value("refresh_every", c.refresh_every);
    c.gen_sample_count = j.value("gen_sample_count", c.gen_sample_count);
    c.seed = j.value("seed", c.seed);
    if (j.contains("loss")) c.loss = gan_loss_from_string(get<std::string>(j, "loss"));
    c.real_set_size = j.value("real_set_size", c.real_set_size);
    c.log_every = j.value("log_every", c.log_every);
    c.eval_samples = j.value("eval_samples", c.eval_samples);
    c.capture_sigmas = j.value("capture_sigmas", c.capture_sigmas);
    c.guidance_warmup = j.value("guidance_warmup", c.guidance_warmup);
    c.final_eval_samples = j.value("final_eval_samples", c.final_eval_samples);
    return c;
}

json prior_settings_to_json(const PriorFitSettings& s) {
    return {{"components", s.components},
            {"feature_map", to_string(s.feature)},
            {"variance_keep", s.variance_keep},
            {"projection_dim", s.projection_dim},
            {"theta_percentile", s.theta_percentile},
            {"max_iters", s.max_iters},
            {"tol", s.tol},
            {"ridge_scale", s.ridge_scale}};
}

PriorFitSettings prior_settings_from_json(const json& j) {
    PriorFitSettings s;
    s.components = j.value("components", s.components);
    if (j.contains("feature_map")) s.feature = feature_kind_from_string(get<std::string>(j, "feature_map"));
    s.variance_keep = j.value("variance_keep", s.variance_keep);
    s.projection_dim = j.value("projection_dim", s.projection_dim);
    s.theta_percentile = j.value("theta_percentile", s.theta_percentile);
    s.max_iters = j.value("max_iters", s.max_iters);
    s.tol = j.value("tol", s.tol);
    s.ridge_scale = j.value("ridge_scale", s.ridge_scale);
    return s;
}

}  // namespace priorgan::codec
