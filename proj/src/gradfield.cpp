#include "priorgan/gradfield.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "priorgan/io.hpp"

namespace priorgan {

std::string to_string(FieldSource s) {
    switch (s) {
        case FieldSource::Discriminator: return "discriminator";
        case FieldSource::Optimal: return "optimal";
        case FieldSource::Quality: return "quality";
    }
    return "?";
}

FieldSource field_source_from_string(const std::string& name) {
    if (name == "discriminator") return FieldSource::Discriminator;
    if (name == "optimal") return FieldSource::Optimal;
    if (name == "quality") return FieldSource::Quality;
    fail(ErrorCode::InvalidArgument, "unknown field source '" + name + "' (discriminator, optimal, quality)");
}

namespace {

constexpr double kUnderflow = 1e-300;

struct OracleTerms {
    double pr, pg;
};

OracleTerms oracle_terms(const ToyWorld& world, const GmmPrior& gen, std::span<const double> x) {
    require(x.size() == 2, ErrorCode::DimensionMismatch, "oracle discriminator probes must be 2D");
    require(gen.dim() == 2, ErrorCode::DimensionMismatch, "generated-density estimate must be 2D");
    const double pr = world.density(x);
    const double pg = std::exp(gen.log_density(x));
    if (!(pr + pg >= kUnderflow))
        fail(ErrorCode::BothDensitiesUnderflow, "real and generated densities both underflow at the probe");
    return {pr, pg};
}

}  // namespace

double optimal_discriminator(const ToyWorld& world, const GmmPrior& gen_density, std::span<const double> x) {
    const auto [pr, pg] = oracle_terms(world, gen_density, x);
    return pr / (pr + pg);
}

Vec optimal_generator_gradient(const ToyWorld& world, const GmmPrior& gen_density, std::span<const double> x) {
    const auto [pr, pg] = oracle_terms(world, gen_density, x);
    const double one_minus_d = pg / (pr + pg);
    Vec out(2, 0.0);
    if (one_minus_d == 0.0) return out;
    const Vec gr = world.log_density_gradient(x);
    const Vec gg = gen_density.log_density_gradient(x);
    for (int j = 0; j < 2; ++j) out[j] = one_minus_d * (gg[j] - gr[j]);
    return out;
}

Vec discriminator_generator_gradient(const Mlp& discriminator, GanLoss loss, std::span<const double> x) {
    Tape tape;
    forward(discriminator, x, tape);
    const double z = tape.pre.back()(0, 0);
    Mat g(1, 1);
    if (loss == GanLoss::NonSaturating)
        g(0, 0) = 1.0 / (1.0 + std::exp(-z)) - 1.0;
    else
        g(0, 0) = 2.0 * (tape.output(0, 0) - 1.0);
    return backward_from_preactivation(discriminator, tape, std::move(g), nullptr).data();
}

Vec quality_generator_gradient(const PriorModel& prior, double log_theta, std::span<const double> x) {
    const QualityLossConfig cfg{log_theta, 1.0, prior.theta_percentile};
    return prior.feature_map.apply_jacobian_transpose(quality_loss_gradient(prior.gmm, cfg, prior.features(x)));
}

std::vector<Vec> probe_grid(const BoundingBox& box, std::size_t nx, std::size_t ny) {
    require(nx >= 2 && ny >= 2, ErrorCode::InvalidArgument, "probe grid needs at least 2 points per axis");
    require(box.x_max > box.x_min && box.y_max > box.y_min, ErrorCode::InvalidArgument, "empty bounding box");
    std::vector<Vec> out;
    out.reserve(nx * ny);
    for (std::size_t iy = 0; iy < ny; ++iy) {
        const double ty = static_cast<double>(iy) / static_cast<double>(ny - 1);
        const double y = box.y_min + ty * (box.y_max - box.y_min);
        for (std::size_t ix = 0; ix < nx; ++ix) {
            const double tx = static_cast<double>(ix) / static_cast<double>(nx - 1);
            out.push_back({box.x_min + tx * (box.x_max - box.x_min), y});
        }
    }
    return out;
}

GmmPrior fit_generated_density(std::span<const Vec> generated, std::size_t components, Rng& rng) {
    require(!generated.empty(), ErrorCode::EmptySet, "no generated samples to fit");
    EmConfig cfg;
    cfg.ridge = default_ridge(generated);
    return fit_em(generated, components, rng, cfg).prior;
}

namespace {

template <typename F>
GradientField make_field(FieldSource source, const BoundingBox& box, std::size_t n, F&& grad) {
    GradientField f;
    f.source = source;
    f.box = box;
    f.nx = f.ny = n;
    f.probes = probe_grid(box, n, n);
    f.arrows.reserve(f.probes.size());
    for (const Vec& p : f.probes) {
        Vec a = grad(p);
        require(all_finite(a), ErrorCode::DomainError, "non-finite gradient at a probe");
        f.arrows.push_back(std::move(a));
    }
    return f;
}

}  // namespace

GradientField discriminator_field(const Mlp& discriminator, GanLoss loss, const BoundingBox& box, std::size_t n) {
    return make_field(FieldSource::Discriminator, box, n,
                      [&](const Vec& p) { return discriminator_generator_gradient(discriminator, loss, p); });
}

GradientField optimal_field(const ToyWorld& world, const GmmPrior& gen_density, const BoundingBox& box, std::size_t n) {
    return make_field(FieldSource::Optimal, box, n,
                      [&](const Vec& p) { return optimal_generator_gradient(world, gen_density, p); });
}

GradientField quality_field(const PriorModel& prior, double log_theta, const BoundingBox& box, std::size_t n) {
    require(prior.feature_map.input_dim() == 2, ErrorCode::DimensionMismatch, "prior is not over 2D points");
    return make_field(FieldSource::Quality, box, n,
                      [&](const Vec& p) { return quality_generator_gradient(prior, log_theta, p); });
}

void write_field_csv(const GradientField& field, const std::string& path) {
    CsvWriter csv(path, {"x", "y", "dx", "dy", "source"});
    const std::string src = to_string(field.source);
    for (std::size_t i = 0; i < field.probes.size(); ++i)
        csv.write_row({format_double(field.probes[i][0]), format_double(field.probes[i][1]),
                       format_double(field.arrows[i][0]), format_double(field.arrows[i][1]), src});
}

namespace {

std::string fmt3(double v) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "%.3f", v);
    return buf.data();
}

}  // namespace

std::string field_svg(const GradientField& field, std::span<const Vec> real, std::span<const Vec> generated) {
    constexpr double kSize = 800.0;
    constexpr double kPad = 20.0;
    const BoundingBox& b = field.box;
    const double sx = (kSize - 2 * kPad) / (b.x_max - b.x_min);
    const double sy = (kSize - 2 * kPad) / (b.y_max - b.y_min);
    auto px = [&](double x) { return kPad + (x - b.x_min) * sx; };
    auto py = [&](double y) { return kSize - kPad - (y - b.y_min) * sy; };
    auto inside = [&](const Vec& p) { return p[0] >= b.x_min && p[0] <= b.x_max && p[1] >= b.y_min && p[1] <= b.y_max; };

    std::vector<double> mags;
    mags.reserve(field.arrows.size());
    for (const Vec& a : field.arrows) mags.push_back(std::hypot(a[0], a[1]));
    const double ref = mags.empty() ? 0.0 : percentile(mags, 95.0);
    const double cell = std::min((kSize - 2 * kPad) / static_cast<double>(std::max<std::size_t>(field.nx - 1, 1)),
                                 (kSize - 2 * kPad) / static_cast<double>(std::max<std::size_t>(field.ny - 1, 1)));
    const double unit = ref > 0.0 ? 0.9 * cell / ref : 0.0;

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n";
    s += "<defs><marker id=\"head\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" orient=\"auto\">"
         "<path d=\"M0,0 L6,3 L0,6 z\" fill=\"red\"/></marker></defs>\n";
    s += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"white\"/>\n";
    s += "<g fill=\"green\">\n";
    for (const Vec& p : real)
        if (inside(p)) s += "<circle cx=\"" + fmt3(px(p[0])) + "\" cy=\"" + fmt3(py(p[1])) + "\" r=\"2\"/>\n";
    s += "</g>\n<g fill=\"blue\">\n";
    for (const Vec& p : generated)
        if (inside(p)) s += "<circle cx=\"" + fmt3(px(p[0])) + "\" cy=\"" + fmt3(py(p[1])) + "\" r=\"2\"/>\n";
    s += "</g>\n<g stroke=\"red\" stroke-width=\"1.2\" marker-end=\"url(#head)\">\n";
    for (std::size_t i = 0; i < field.probes.size(); ++i) {
        const Vec& p = field.probes[i];
        const Vec& a = field.arrows[i];
        if (mags[i] == 0.0 || unit == 0.0) continue;
        // Long arrows are capped at 1.5 cells so outliers stay readable.
        const double len = std::min(mags[i] * unit, 1.5 * cell);
        const double dx = a[0] / mags[i] * len, dy = a[1] / mags[i] * len;
        const double x0 = px(p[0]), y0 = py(p[1]);
        s += "<line x1=\"" + fmt3(x0) + "\" y1=\"" + fmt3(y0) + "\" x2=\"" + fmt3(x0 + dx) + "\" y2=\"" +
             fmt3(y0 - dy) + "\"/>\n";
    }
    s += "</g>\n</svg>\n";
    return s;
}

}  // namespace priorgan
