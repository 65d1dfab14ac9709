#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "priorgan/gan.hpp"
#include "priorgan/gmm.hpp"
#include "priorgan/guidance.hpp"
#include "priorgan/prior_model.hpp"
#include "priorgan/toy_world.hpp"

namespace priorgan {

enum class FieldSource { Discriminator, Optimal, Quality };

std::string to_string(FieldSource s);
FieldSource field_source_from_string(const std::string& name);

/// D*(x) = p_r(x) / (p_r(x) + p̂_g(x)). Raises BothDensitiesUnderflow when
/// p_r + p̂_g < 1e-300.
double optimal_discriminator(const ToyWorld& world, const GmmPrior& gen_density, std::span<const double> x);

/// Gradient of −log D*(x), the non-saturating generator objective against
/// the oracle discriminator: (1 − D*)(∇log p̂_g − ∇log p_r).
Vec optimal_generator_gradient(const ToyWorld& world, const GmmPrior& gen_density, std::span<const double> x);

/// Gradient of the generator loss with respect to a point fed to the
/// learned discriminator.
Vec discriminator_generator_gradient(const Mlp& discriminator, GanLoss loss, std::span<const double> x);

/// Quality-loss gradient with respect to the raw point (through the feature map).
Vec quality_generator_gradient(const PriorModel& prior, double log_theta, std::span<const double> x);

/// Uniform nx × ny probe lattice over `box`, row-major with x varying fastest.
std::vector<Vec> probe_grid(const BoundingBox& box, std::size_t nx, std::size_t ny);

struct GradientField {
    FieldSource source = FieldSource::Discriminator;
    BoundingBox box{};
    std::size_t nx = 0, ny = 0;
    std::vector<Vec> probes;
    std::vector<Vec> arrows;
};

/// Fit the generated-density oracle: an M-component GMM on generated samples.
GmmPrior fit_generated_density(std::span<const Vec> generated, std::size_t components, Rng& rng);

GradientField discriminator_field(const Mlp& discriminator, GanLoss loss, const BoundingBox& box, std::size_t n);
GradientField optimal_field(const ToyWorld& world, const GmmPrior& gen_density, const BoundingBox& box, std::size_t n);
GradientField quality_field(const PriorModel& prior, double log_theta, const BoundingBox& box, std::size_t n);

/// Columns x, y, dx, dy, source; one row per probe.
void write_field_csv(const GradientField& field, const std::string& path);

/// 800×800 quiver plot: real samples green, generated blue, arrows red and
/// scaled so the 95th-percentile magnitude spans 0.9 of a grid cell.
std::string field_svg(const GradientField& field, std::span<const Vec> real, std::span<const Vec> generated);

}  // namespace priorgan
