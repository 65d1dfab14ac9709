#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "priorgan/error.hpp"
#include "priorgan/gradfield.hpp"

using namespace priorgan;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Ok;
}

// Mixture over the ring's own modes, optionally pulled toward the origin.
GmmPrior ring_like(const ToyWorld& w, double scale, double var) {
    std::vector<Vec> means;
    std::vector<Mat> covs;
    for (const auto& c : w.centers()) {
        means.push_back({scale * c[0], scale * c[1]});
        covs.push_back(Mat(2, 2, {var, 0.0, 0.0, var}));
    }
    return GmmPrior(Vec(w.modes(), 1.0 / static_cast<double>(w.modes())), means, covs);
}

Vec rotate(const Vec& v, double a) {
    return {std::cos(a) * v[0] - std::sin(a) * v[1], std::sin(a) * v[0] + std::cos(a) * v[1]};
}

Vec central_difference(auto&& f, const Vec& x, double h = 1e-6) {
    Vec out(2);
    for (int i = 0; i < 2; ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        out[i] = (f(xp) - f(xm)) / (2 * h);
    }
    return out;
}

}  // namespace

TEST_CASE("oracle discriminator") {
    const ToyWorld w(WorldSpec::ring(8, 2.0, 0.1));
    const GmmPrior same = ring_like(w, 1.0, 0.01);
    Rng rng(81);
    for (int t = 0; t < 20; ++t) {
        const Vec x = w.sample(rng, 1).front();
        CHECK(optimal_discriminator(w, same, x) == doctest::Approx(0.5).epsilon(1e-9));
        const Vec g = optimal_generator_gradient(w, same, x);
        CHECK(std::abs(g[0]) < 1e-6);
        CHECK(std::abs(g[1]) < 1e-6);
    }
    // Where only the generator puts mass, D* vanishes.
    const GmmPrior inner = ring_like(w, 0.5, 0.01);
    CHECK(optimal_discriminator(w, inner, Vec{1.0, 0.0}) < 1e-12);
    CHECK(optimal_discriminator(w, inner, Vec{2.0, 0.0}) > 1.0 - 1e-12);
    CHECK(code_of([&] { optimal_discriminator(w, inner, Vec{100.0, 100.0}); }) == ErrorCode::BothDensitiesUnderflow);
}

TEST_CASE("oracle gradient is the derivative of -log D*") {
    const ToyWorld w(WorldSpec::ring(8, 2.0, 0.3));
    const GmmPrior gen = ring_like(w, 0.8, 0.15);
    Rng rng(82);
    for (int t = 0; t < 30; ++t) {
        const Vec x{2.0 * rng.normal(), 2.0 * rng.normal()};
        const Vec g = optimal_generator_gradient(w, gen, x);
        const Vec fd = central_difference([&](const Vec& p) { return -std::log(optimal_discriminator(w, gen, p)); }, x);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(g[i] - fd[i]) <= 1e-5 * std::max(1.0, std::abs(fd[i])));
    }
}

TEST_CASE("oracle field respects the ring symmetry") {
    const ToyWorld w(WorldSpec::ring(8, 2.0, 0.3));
    const GmmPrior gen = ring_like(w, 0.8, 0.15);
    const double turn = 2.0 * std::numbers::pi / 8.0;
    Rng rng(83);
    for (int t = 0; t < 20; ++t) {
        const Vec x{1.5 * rng.normal(), 1.5 * rng.normal()};
        const Vec a = optimal_generator_gradient(w, gen, x);
        const Vec b = optimal_generator_gradient(w, gen, rotate(x, turn));
        const Vec ra = rotate(a, turn);
        for (int i = 0; i < 2; ++i) CHECK(b[i] == doctest::Approx(ra[i]).epsilon(1e-8).scale(1.0));
    }
    // Descending the objective moves a point inside the ring outward, toward the
    // real mode, so the raw gradient there points at the origin.
    CHECK(optimal_generator_gradient(w, gen, Vec{1.3, 0.0})[0] < 0.0);
}

TEST_CASE("learned discriminator gradients") {
    Rng rng(84);
    const Mlp ns = Mlp::random({2, 8, 8, 1}, Activation::Relu, Activation::Sigmoid, rng);
    const Mlp ls = Mlp::random({2, 8, 8, 1}, Activation::Tanh, Activation::Identity, rng);
    for (int t = 0; t < 20; ++t) {
        const Vec x{rng.normal(), rng.normal()};
        const Vec g_ns = discriminator_generator_gradient(ns, GanLoss::NonSaturating, x);
        const Vec fd_ns = central_difference(
            [&](const Vec& p) {
                Tape tape;
                return -std::log(forward(ns, p, tape)[0]);
            },
            x);
        const Vec g_ls = discriminator_generator_gradient(ls, GanLoss::LeastSquares, x);
        const Vec fd_ls = central_difference(
            [&](const Vec& p) {
                Tape tape;
                const double d = forward(ls, p, tape)[0];
                return (d - 1.0) * (d - 1.0);
            },
            x);
        for (int i = 0; i < 2; ++i) {
            CHECK(std::abs(g_ns[i] - fd_ns[i]) < 1e-7);
            CHECK(std::abs(g_ls[i] - fd_ls[i]) < 1e-7);
        }
    }
}

TEST_CASE("quality field") {
    const ToyWorld w(WorldSpec::ring(8, 2.0, 0.2));
    Rng rng(85);
    const auto real = w.sample(rng, 3000);
    const PriorModel prior = fit_prior_model(real, PriorFitSettings{}, rng).model;
    Rng probe_rng(86);
    for (int t = 0; t < 20; ++t) {
        const Vec x{2.0 * probe_rng.normal(), 2.0 * probe_rng.normal()};
        const Vec g = quality_generator_gradient(prior, 50.0, x);
        const Vec fd = central_difference([&](const Vec& p) { return -prior.gmm.log_density(prior.features(p)); }, x);
        for (int i = 0; i < 2; ++i) CHECK(std::abs(g[i] - fd[i]) <= 1e-5 * std::max(1.0, std::abs(fd[i])));
    }
    const BoundingBox box = w.bounding_box();
    const GradientField off = quality_field(prior, -INFINITY, box, 6);
    for (const auto& a : off.arrows) CHECK(a == Vec{0.0, 0.0});
    const GradientField on = quality_field(prior, prior.log_theta, box, 6);
    CHECK(on.source == FieldSource::Quality);
    std::size_t active = 0;
    for (const auto& a : on.arrows) active += a != Vec{0.0, 0.0};
    CHECK(active > 0);
    CHECK(active < on.arrows.size());
}

TEST_CASE("probe grid layout") {
    const auto g = probe_grid(BoundingBox{0.0, 2.0, 0.0, 1.0}, 3, 2);
    CHECK(g == std::vector<Vec>{{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {2, 1}});
    CHECK_THROWS_AS(probe_grid(BoundingBox{0.0, 1.0, 0.0, 1.0}, 1, 2), Error);
}

TEST_CASE("csv and svg export") {
    const ToyWorld w(WorldSpec::ring(8, 2.0, 0.3));
    const GmmPrior gen = ring_like(w, 0.8, 0.15);
    const GradientField f = optimal_field(w, gen, w.bounding_box(), 5);
    REQUIRE(f.probes.size() == 25);
    CHECK(to_string(f.source) == "optimal");
    CHECK(field_source_from_string("discriminator") == FieldSource::Discriminator);
    CHECK(code_of([] { field_source_from_string("oracle"); }) == ErrorCode::InvalidArgument);

    const auto dir = std::filesystem::temp_directory_path() / "priorgan_test_gradfield";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "field.csv").string();
    write_field_csv(f, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "x,y,dx,dy,source");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.substr(line.rfind(',') + 1) == "optimal");
    }
    CHECK(rows == 25);
    std::filesystem::remove_all(dir);

    Rng rng(87);
    const auto real = w.sample(rng, 40);
    const auto fake = gen.sample(rng, 30);
    const std::string svg = field_svg(f, real, fake);
    auto count = [&](const std::string& needle) {
        std::size_t n = 0;
        for (auto p = svg.find(needle); p != std::string::npos; p = svg.find(needle, p + 1)) ++n;
        return n;
    };
    CHECK(svg.starts_with("<svg"));
    CHECK(count("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"800\"") == 1);
    CHECK(count("<circle") <= 70);
    CHECK(count("<circle") >= 60);
    std::size_t nonzero = 0;
    for (const auto& a : f.arrows) nonzero += a != Vec{0.0, 0.0};
    CHECK(count("<line") == nonzero);
}
