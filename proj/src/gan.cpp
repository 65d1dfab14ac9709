#include "priorgan/gan.hpp"

#include <cmath>
#include <limits>

#include "priorgan/guidance.hpp"

namespace priorgan {

std::string to_string(GanLoss kind) {
    return kind == GanLoss::NonSaturating ? "nonsaturating" : "least_squares";
}

GanLoss gan_loss_from_string(const std::string& name) {
    if (name == "nonsaturating") return GanLoss::NonSaturating;
    if (name == "least_squares") return GanLoss::LeastSquares;
    fail(ErrorCode::InvalidArgument, "unknown GAN loss '" + name + "'");
}

GanLosses gan_losses(GanLoss kind, double d_real, double d_fake) {
    if (kind == GanLoss::LeastSquares)
        return {(d_real - 1.0) * (d_real - 1.0) + d_fake * d_fake, (d_fake - 1.0) * (d_fake - 1.0)};
    if (!(d_real > 0.0 && d_real < 1.0 && d_fake > 0.0 && d_fake < 1.0))
        fail(ErrorCode::DomainError, "non-saturating loss needs discriminator outputs in (0, 1)");
    return {-std::log(d_real) - std::log1p(-d_fake), -std::log(d_fake)};
}

AdamState AdamState::zeros_like(const Mlp& net) {
    return AdamState{MlpGrads::zeros_like(net), MlpGrads::zeros_like(net), 0};
}

namespace {

void adam_update(std::span<double> p, std::span<double> m, std::span<double> v, std::span<const double> g,
                 const AdamSettings& s, double c1, double c2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        p[i] -= s.learning_rate * mhat / (std::sqrt(vhat) + s.epsilon);
    }
}

}  // namespace

void adam_step(Mlp& net, AdamState& state, const MlpGrads& grads, const AdamSettings& settings) {
    require(state.m.weight.size() == net.layer_count() && grads.weight.size() == net.layer_count(),
            ErrorCode::DimensionMismatch, "optimizer state does not match network");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(settings.beta1, t);
    const double c2 = 1.0 - std::pow(settings.beta2, t);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        auto& layer = net.layers()[l];
        require(grads.weight[l].size() == layer.weight.size() && grads.bias[l].size() == layer.bias.size(),
                ErrorCode::DimensionMismatch, "gradient shape does not match layer");
        adam_update(layer.weight.data(), state.m.weight[l].data(), state.v.weight[l].data(), grads.weight[l].data(),
                    settings, c1, c2);
        adam_update(layer.bias, state.m.bias[l], state.v.bias[l], grads.bias[l], settings, c1, c2);
    }
}

void validate(const TrainConfig& cfg) {
    auto positive = [](std::size_t v, const char* name) {
        if (v == 0) fail(ErrorCode::InvalidArgument, std::string(name) + " must be positive");
    };
    positive(cfg.latent_dim, "latent_dim");
    positive(cfg.hidden_width, "hidden_width");
    positive(cfg.batch_size, "batch_size");
    positive(cfg.d_steps_per_g_step, "d_steps_per_g_step");
    positive(cfg.total_g_iters, "total_g_iters");
    positive(cfg.refresh_every, "refresh_every");
    positive(cfg.gen_sample_count, "gen_sample_count");
    positive(cfg.real_set_size, "real_set_size");
    positive(cfg.log_every, "log_every");
    positive(cfg.eval_samples, "eval_samples");
    require(cfg.learning_rate > 0.0, ErrorCode::InvalidArgument, "learning_rate must be positive");
    require(cfg.beta1 > 0.0 && cfg.beta1 < 1.0 && cfg.beta2 > 0.0 && cfg.beta2 < 1.0, ErrorCode::InvalidArgument,
            "adam betas must lie in (0, 1)");
    require(cfg.delta >= 0.0 && std::isfinite(cfg.delta), ErrorCode::InvalidArgument, "delta must be >= 0");
    require(cfg.alpha >= 0.0 && std::isfinite(cfg.alpha), ErrorCode::InvalidArgument, "alpha must be >= 0");
    require(cfg.capture_sigmas > 0.0, ErrorCode::InvalidArgument, "capture_sigmas must be positive");
}

GanModel make_gan_model(const TrainConfig& cfg, std::size_t data_dim, Rng& init) {
    GanModel model;
    model.loss = cfg.loss;
    model.latent_dim = cfg.latent_dim;
    const std::size_t w = cfg.hidden_width;
    model.generator = Mlp::random({cfg.latent_dim, w, w, data_dim}, Activation::Tanh, Activation::Identity, init);
    model.discriminator =
        Mlp::random({data_dim, w, w, 1}, Activation::Relu,
                    cfg.loss == GanLoss::NonSaturating ? Activation::Sigmoid : Activation::Identity, init);
    model.g_opt = AdamState::zeros_like(model.generator);
    model.d_opt = AdamState::zeros_like(model.discriminator);
    return model;
}

namespace {

Mat latent_batch(Rng& rng, std::size_t n, std::size_t dim) {
    Mat z(n, dim);
    for (double& v : z.data()) v = rng.normal();
    return z;
}

// log(1 + e^x) without overflow.
double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Stream tags for the independent random streams of a run.
enum StreamTag : std::uint64_t {
    kInitStream = 1,
    kRealSetStream = 3,
    kLatentStream = 4,
    kBatchStream = 5,
    kPlanStream = 6,
    kEvalStream = 7,
    kRefreshStream = 8,
};

}  // namespace

std::vector<Vec> generate(const Mlp& generator, std::size_t n, Rng& latent) {
    return mat_to_rows(forward(generator, latent_batch(latent, n, generator.input_dim())));
}

double world_density_floor(const ToyWorld& world) {
    Rng rng(0x666c6f6f72ULL);
    return calibrate_density_floor(world, rng, 10000, 5.0);
}

EvalMetrics evaluate_samples(const PriorModel& prior, const ToyWorld& world, std::span<const Vec> samples,
                             double density_floor, double capture_radius) {
    require(!samples.empty(), ErrorCode::EmptySet, "evaluation over an empty sample set");
    EvalMetrics out;
    const auto feats = prior.features(samples);
    out.qs = quality_score(prior.gmm, prior.qs, feats);
    out.gen_profile = frequency_profile(prior.gmm, feats);
    out.distance = diversity_distance(prior.real_profile, out.gen_profile);
    out.dds = out.distance.dds;
    out.coverage = mode_coverage(world, samples, capture_radius);
    out.high_quality_fraction = high_quality_fraction(world, samples, density_floor);
    return out;
}

TrainResult train(const ToyWorld& world, const TrainConfig& cfg, const PriorModel* guidance,
                  const PriorModel* evaluation, const TrainObserver* observer, const std::vector<Vec>* real_set) {
    validate(cfg);
    const std::size_t data_dim = 2;
    if (!guidance && (cfg.delta > 0.0 || cfg.alpha > 0.0))
        fail(ErrorCode::InvalidArgument, "delta or alpha > 0 requires a prior");
    if (guidance && guidance->feature_map.input_dim() != data_dim)
        fail(ErrorCode::DimensionMismatch, "prior feature map does not match world dimension");
    const PriorModel* evaluator = evaluation ? evaluation : guidance;
    if (evaluator && evaluator->feature_map.input_dim() != data_dim)
        fail(ErrorCode::DimensionMismatch, "evaluation prior does not match world dimension");

    const Rng root(cfg.seed);
    Rng init = root.derive(kInitStream);
    TrainResult result;
    GanModel& model = result.model;
    model = make_gan_model(cfg, data_dim, init);

    std::vector<Vec> drawn;
    if (real_set) {
        require(!real_set->empty(), ErrorCode::EmptySet, "empty training set");
        for (const Vec& x : *real_set)
            require(x.size() == data_dim, ErrorCode::DimensionMismatch, "training point has the wrong dimension");
    } else {
        Rng real_rng = root.derive(kRealSetStream);
        drawn = world.sample(real_rng, cfg.real_set_size);
    }
    const std::vector<Vec>& real = real_set ? *real_set : drawn;
    Rng latent = root.derive(kLatentStream);
    Rng batch_rng = root.derive(kBatchStream);
    const Rng eval_root = root.derive(kEvalStream);

    const bool use_quality = guidance && cfg.delta > 0.0;
    const bool use_resample = guidance && cfg.alpha > 0.0;
    const QualityLossConfig qcfg = guidance ? guidance->quality_config(cfg.delta) : QualityLossConfig{};

    ResamplePlan plan;
    FrequencyProfile real_profile;
    std::vector<std::vector<std::size_t>> pools;
    Rng refresh_rng = root.derive(kRefreshStream);
    auto refresh = [&](std::size_t iteration, Rng stream) {
        const auto gen = guidance->features(generate(model.generator, cfg.gen_sample_count, refresh_rng));
        plan = refresh_plan(guidance->gmm, real_profile, pools, gen, cfg.alpha, stream);
        PlanRow row{iteration, cfg.alpha, plan.real_frequencies, plan.gen_frequencies, plan.new_frequencies};
        if (observer && observer->on_plan) observer->on_plan(row);
        result.plans.push_back(std::move(row));
    };
    if (use_resample) {
        const auto real_feats = guidance->features(real);
        real_profile = frequency_profile(guidance->gmm, real_feats);
        pools = build_group_pools(guidance->gmm, real_feats);
    }
    const std::size_t warmup = cfg.guidance_warmup;
    if (use_resample && warmup == 0) refresh(0, root.derive(kPlanStream));

    const double density_floor = world_density_floor(world);
    const double capture_radius = cfg.capture_sigmas * world.sigma();
    const AdamSettings adam = cfg.adam();
    const std::size_t batch = cfg.batch_size;
    const double inv_batch = 1.0 / static_cast<double>(batch);
    const bool nonsat = cfg.loss == GanLoss::NonSaturating;

    MlpGrads d_grads = MlpGrads::zeros_like(model.discriminator);
    MlpGrads g_grads = MlpGrads::zeros_like(model.generator);
    Tape tape_real, tape_fake, tape_gen, tape_disc;
    Mat real_batch(batch, data_dim);
    std::vector<std::size_t> indices(batch);

    for (std::size_t it = 1; it <= cfg.total_g_iters; ++it) {
        double d_loss = 0.0;
        const bool active = it > warmup;
        for (std::size_t ds = 0; ds < cfg.d_steps_per_g_step; ++ds) {
            if (use_resample && active) {
                indices = draw_real_batch(plan, batch);
            } else {
                for (auto& idx : indices) idx = batch_rng.uniform_index(real.size());
            }
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t j = 0; j < data_dim; ++j) real_batch(b, j) = real[indices[b]][j];
            const Mat fake = forward(model.generator, latent_batch(latent, batch, cfg.latent_dim));

            forward(model.discriminator, real_batch, tape_real);
            forward(model.discriminator, fake, tape_fake);
            Mat g_real(batch, 1), g_fake(batch, 1);
            d_loss = 0.0;
            for (std::size_t b = 0; b < batch; ++b) {
                if (nonsat) {
                    const double zr = tape_real.pre.back()(b, 0);
                    const double zf = tape_fake.pre.back()(b, 0);
                    d_loss += softplus(-zr) + softplus(zf);
                    g_real(b, 0) = (sigmoid(zr) - 1.0) * inv_batch;
                    g_fake(b, 0) = sigmoid(zf) * inv_batch;
                } else {
                    const double dr = tape_real.output(b, 0);
                    const double df = tape_fake.output(b, 0);
                    d_loss += (dr - 1.0) * (dr - 1.0) + df * df;
                    g_real(b, 0) = 2.0 * (dr - 1.0) * inv_batch;
                    g_fake(b, 0) = 2.0 * df * inv_batch;
                }
            }
            d_loss *= inv_batch;
            d_grads.set_zero();
            backward_from_preactivation(model.discriminator, tape_real, std::move(g_real), &d_grads);
            backward_from_preactivation(model.discriminator, tape_fake, std::move(g_fake), &d_grads);
            adam_step(model.discriminator, model.d_opt, d_grads, adam);
        }

        const Mat x = forward(model.generator, latent_batch(latent, batch, cfg.latent_dim), tape_gen);
        forward(model.discriminator, x, tape_disc);
        Mat g_out(batch, 1);
        double g_loss = 0.0;
        for (std::size_t b = 0; b < batch; ++b) {
            if (nonsat) {
                const double zf = tape_disc.pre.back()(b, 0);
                g_loss += softplus(-zf);
                g_out(b, 0) = (sigmoid(zf) - 1.0) * inv_batch;
            } else {
                const double df = tape_disc.output(b, 0);
                g_loss += (df - 1.0) * (df - 1.0);
                g_out(b, 0) = 2.0 * (df - 1.0) * inv_batch;
            }
        }
        g_loss *= inv_batch;
        Mat grad_x = backward_from_preactivation(model.discriminator, tape_disc, std::move(g_out), nullptr);
        if (use_quality && active) {
            const double scale = cfg.delta * inv_batch;
            for (std::size_t b = 0; b < batch; ++b) {
                const Vec f = guidance->features(x.row(b));
                const Vec gf = quality_loss_gradient(guidance->gmm, qcfg, f);
                const Vec gx = guidance->feature_map.apply_jacobian_transpose(gf);
                for (std::size_t j = 0; j < data_dim; ++j) grad_x(b, j) += scale * gx[j];
            }
        }
        g_grads.set_zero();
        backward(model.generator, tape_gen, grad_x, &g_grads);
        adam_step(model.generator, model.g_opt, g_grads, adam);
        model.iteration = it;

        if (!std::isfinite(d_loss) || !std::isfinite(g_loss))
            fail(ErrorCode::NonFiniteLoss, "non-finite loss at generator iteration " + std::to_string(it));

        if (use_resample && it >= warmup) {
            if (it == warmup)
                refresh(it, root.derive(kPlanStream));
            else if ((it - warmup) % cfg.refresh_every == 0)
                refresh(it, plan.rng_stream);
        }

        if (it % cfg.log_every == 0) {
            MetricsRow row;
            row.iteration = it;
            row.d_loss = d_loss;
            row.g_loss = g_loss;
            Rng eval_rng = eval_root.derive(it);
            const auto samples = generate(model.generator, cfg.eval_samples, eval_rng);
            row.mode_coverage = mode_coverage(world, samples, capture_radius).covered;
            row.high_quality_fraction = high_quality_fraction(world, samples, density_floor);
            if (evaluator) {
                const auto m = evaluate_samples(*evaluator, world, samples, density_floor, capture_radius);
                row.qs = m.qs;
                row.dds = m.dds;
                row.gen_frequencies = m.gen_profile.frequencies;
            } else {
                row.qs = row.dds = std::numeric_limits<double>::quiet_NaN();
            }
            if (observer && observer->on_metrics) observer->on_metrics(row);
            result.trace.push_back(std::move(row));
        }
    }
    if (evaluator && cfg.final_eval_samples > 0) {
        Rng eval_rng = eval_root.derive(0);
        const auto samples = generate(model.generator, cfg.final_eval_samples, eval_rng);
        result.final_metrics = evaluate_samples(*evaluator, world, samples, density_floor, capture_radius);
    }
    return result;
}

}  // namespace priorgan
