#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "priorgan/mlp.hpp"
#include "priorgan/prior_model.hpp"
#include "priorgan/toy_world.hpp"

namespace priorgan {

enum class GanLoss { NonSaturating, LeastSquares };

std::string to_string(GanLoss kind);
GanLoss gan_loss_from_string(const std::string& name);

struct GanLosses {
    double d_loss = 0.0;
    double g_loss = 0.0;
};

/// Per-sample GAN objectives from discriminator outputs.
///   nonsaturating: d = −log D(x) − log(1 − D(G(z))),  g = −log D(G(z))
///   least_squares: d = (D(x) − 1)² + D(G(z))²,        g = (D(G(z)) − 1)²
/// Non-saturating inputs must lie strictly inside (0, 1); DomainError otherwise.
GanLosses gan_losses(GanLoss kind, double d_real, double d_fake);

/// First/second moment accumulators for one network.
struct AdamState {
    MlpGrads m;
    MlpGrads v;
    std::uint64_t step = 0;

    static AdamState zeros_like(const Mlp& net);
    friend bool operator==(const AdamState&, const AdamState&) = default;
};

struct AdamSettings {
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected adaptive-moment update, in place.
void adam_step(Mlp& net, AdamState& state, const MlpGrads& grads, const AdamSettings& settings);

struct TrainConfig {
    std::size_t latent_dim = 2;
    std::size_t hidden_width = 64;
    std::size_t batch_size = 64;
    std::size_t d_steps_per_g_step = 1;
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    std::size_t total_g_iters = 20000;
    double delta = 0.06;  // quality-loss weight; 0 disables
    double alpha = 2.0;   // resample weight; 0 disables
    std::size_t refresh_every = 100;
    std::size_t gen_sample_count = 16384;
    std::uint64_t seed = 1;
    GanLoss loss = GanLoss::NonSaturating;
    std::size_t real_set_size = 10000;
    std::size_t log_every = 100;
    std::size_t eval_samples = 2000;
    double capture_sigmas = 3.0;  // mode-coverage radius in world σ
    std::size_t guidance_warmup = 2000;  // generator iterations before δ/α take effect
    std::size_t final_eval_samples = 50000;

    AdamSettings adam() const { return {learning_rate, beta1, beta2, 1e-8}; }
};

void validate(const TrainConfig& cfg);

struct GanModel {
    Mlp generator;
    Mlp discriminator;
    GanLoss loss = GanLoss::NonSaturating;
    AdamState g_opt;
    AdamState d_opt;
    std::size_t latent_dim = 2;
    std::size_t iteration = 0;

    friend bool operator==(const GanModel&, const GanModel&) = default;
};

/// Generator latent→(w, w tanh)→data; discriminator data→(w, w relu)→1 with
/// a sigmoid head for the non-saturating loss and an identity head otherwise.
GanModel make_gan_model(const TrainConfig& cfg, std::size_t data_dim, Rng& init);

std::vector<Vec> generate(const Mlp& generator, std::size_t n, Rng& latent);

struct EvalMetrics {
    double qs = 0.0;
    double dds = 0.0;
    ModeCoverage coverage;
    double high_quality_fraction = 0.0;
    FrequencyProfile gen_profile;
    DiversityDistance distance;
};

/// Score a sample set against the prior (QS, DDS) and the world (coverage,
/// high-quality fraction).
EvalMetrics evaluate_samples(const PriorModel& prior, const ToyWorld& world, std::span<const Vec> samples,
                             double density_floor, double capture_radius);

/// Density floor used by every run on a given world (fixed calibration draw).
double world_density_floor(const ToyWorld& world);

struct MetricsRow {
    std::size_t iteration = 0;
    double d_loss = 0.0;
    double g_loss = 0.0;
    double qs = 0.0;
    double dds = 0.0;
    std::size_t mode_coverage = 0;
    double high_quality_fraction = 0.0;
    Vec gen_frequencies;

    friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct PlanRow {
    std::size_t iteration = 0;
    double alpha = 0.0;
    Vec real_frequencies;
    Vec gen_frequencies;
    Vec new_frequencies;
};

struct TrainObserver {
    std::function<void(const MetricsRow&)> on_metrics;
    std::function<void(const PlanRow&)> on_plan;
};

struct TrainResult {
    GanModel model;
    std::vector<MetricsRow> trace;
    std::vector<PlanRow> plans;
    /// Scored on `final_eval_samples` fresh samples after the last iteration.
    std::optional<EvalMetrics> final_metrics;
};

/// Adversarial training on `world`. When `guidance` is given, δ > 0 adds the
/// quality loss to the generator objective and α > 0 replaces uniform real
/// batches by resampled ones. `evaluation` (defaults to `guidance`) scores the
/// generator every `log_every` iterations; without either, QS/DDS are NaN.
/// `real_set`, when given, is the training data (normally the set the prior
/// was fitted on); otherwise `real_set_size` points are drawn from the world.
TrainResult train(const ToyWorld& world, const TrainConfig& cfg, const PriorModel* guidance,
                  const PriorModel* evaluation = nullptr, const TrainObserver* observer = nullptr,
                  const std::vector<Vec>* real_set = nullptr);

}  // namespace priorgan
