#include <doctest.h>

#include <cmath>

#include "priorgan/feature_map.hpp"

using namespace priorgan;

namespace {

// Central differences of one output coordinate's weighted sum: ∂(gᵀF(x))/∂x.
Vec fd_jacobian_transpose(const FeatureMap& m, const Vec& x, const Vec& g, double h = 1e-5) {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        Vec xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        out[i] = (dot(g, m.apply(xp)) - dot(g, m.apply(xm))) / (2 * h);
    }
    return out;
}

std::vector<Vec> anisotropic_cloud(Rng& rng, std::size_t n) {
    std::vector<Vec> pts;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = 3.0 * rng.normal(), b = 0.5 * rng.normal(), c = 0.01 * rng.normal();
        pts.push_back({1.0 + a + b, 2.0 + a - b, -1.0 + c});
    }
    return pts;
}

}  // namespace

TEST_CASE("identity map") {
    const auto m = FeatureMap::identity(2);
    CHECK(m.apply(Vec{1, 2}) == Vec{1, 2});
    CHECK(m.apply_jacobian_transpose(Vec{3, -4}) == Vec{3, -4});
    CHECK(m.apply_jacobian_transpose(Vec{0, 0}) == Vec{0, 0});
    CHECK_THROWS_AS(m.apply(Vec{1, 2, 3}), Error);
}

TEST_CASE("random projection is deterministic and matches the frozen golden vector") {
    Rng rng(31337);
    const auto m = FeatureMap::random_projection(4, 3, rng);
    const Vec y = m.apply(Vec{1.0, -2.0, 0.5, 3.0});
    REQUIRE(y.size() == 3);
    CHECK(y[0] == -0.045225637164971522);
    CHECK(y[1] == 0.52526633475288276);
    CHECK(y[2] == 1.0532505431693937);

    Rng again(31337);
    CHECK(FeatureMap::random_projection(4, 3, again) == m);

    Rng big(5);
    const auto wide = FeatureMap::random_projection(50, 40, big);
    double ss = 0.0;
    for (double v : wide.projection().data()) ss += v * v;
    CHECK(ss / 2000.0 == doctest::Approx(1.0 / 40.0).epsilon(0.1));
}

TEST_CASE("pca on rank-1 line data") {
    std::vector<Vec> line;
    const double ux = 0.6, uy = 0.8;
    for (int i = -20; i <= 20; ++i) line.push_back({1.0 + ux * i * 0.1, -2.0 + uy * i * 0.1});
    const auto m = FeatureMap::fit_pca(line, 0.98);
    CHECK(m.output_dim() == 1);
    // A point on the line maps to its signed coordinate along the unit direction.
    const Vec p{1.0 + ux * 0.7, -2.0 + uy * 0.7};
    const double coord = m.apply(p)[0];
    CHECK(std::abs(std::abs(coord) - 0.7) < 1e-12);
    CHECK(m.explained_variance_fraction() == doctest::Approx(1.0));
}

TEST_CASE("pca on an isotropic cloud keeps both directions") {
    Rng rng(3);
    std::vector<Vec> pts;
    for (int i = 0; i < 5000; ++i) pts.push_back({rng.normal(), rng.normal()});
    const auto m = FeatureMap::fit_pca(pts, 0.98);
    CHECK(m.output_dim() == 2);
}

TEST_CASE("pca invariants on anisotropic data") {
    Rng rng(4);
    const auto pts = anisotropic_cloud(rng, 2000);
    const auto full = FeatureMap::fit_pca(pts, 1.0);
    CHECK(full.output_dim() == 3);
    const auto m = FeatureMap::fit_pca(pts, 0.98);
    CHECK(m.output_dim() == 2);

    const Mat& p = m.projection();
    for (std::size_t a = 0; a < p.rows(); ++a)
        for (std::size_t b = 0; b < p.rows(); ++b)
            CHECK(std::abs(dot(p.row(a), p.row(b)) - (a == b ? 1.0 : 0.0)) < 1e-10);
    for (std::size_t a = 0; a < p.rows(); ++a) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < p.cols(); ++j)
            if (std::abs(p(a, j)) > std::abs(p(a, arg))) arg = j;
        CHECK(p(a, arg) > 0.0);
    }

    // Linearity on centred coordinates.
    const Vec& mu = m.mean_offset();
    const Vec x{0.3, -1.2, 2.0}, y{-0.5, 0.4, 1.0};
    const double a = 1.7, b = -0.4;
    Vec combo(3);
    for (int i = 0; i < 3; ++i) combo[i] = a * x[i] + b * y[i] + mu[i];
    Vec xs(3), ys(3);
    for (int i = 0; i < 3; ++i) {
        xs[i] = x[i] + mu[i];
        ys[i] = y[i] + mu[i];
    }
    const Vec lhs = m.apply(combo), fx = m.apply(xs), fy = m.apply(ys);
    for (std::size_t k = 0; k < lhs.size(); ++k) CHECK(std::abs(lhs[k] - (a * fx[k] + b * fy[k])) < 1e-12);
}

TEST_CASE("jacobian transpose agrees with finite differences for every kind") {
    Rng rng(6);
    const auto pts = anisotropic_cloud(rng, 500);
    Rng prng(7);
    const std::vector<FeatureMap> maps = {FeatureMap::identity(3), FeatureMap::random_projection(3, 2, prng),
                                          FeatureMap::fit_pca(pts, 0.98)};
    for (const auto& m : maps) {
        for (int t = 0; t < 10; ++t) {
            const Vec x = sample_standard_normal(rng, 3);
            const Vec g = sample_standard_normal(rng, m.output_dim());
            const Vec jt = m.apply_jacobian_transpose(g);
            const Vec fd = fd_jacobian_transpose(m, x, g);
            for (int i = 0; i < 3; ++i) CHECK(std::abs(jt[i] - fd[i]) <= 1e-8 * std::max(1.0, std::abs(fd[i])));
        }
        CHECK(m.apply_jacobian_transpose(Vec(m.output_dim(), 0.0)) == Vec(3, 0.0));
        CHECK_THROWS_AS(m.apply_jacobian_transpose(Vec(m.output_dim() + 1, 0.0)), Error);
    }
}

TEST_CASE("pca error cases") {
    std::vector<Vec> same(10, Vec{1.0, 2.0});
    try {
        FeatureMap::fit_pca(same, 0.98);
        FAIL("expected DegenerateData");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateData);
    }
    try {
        FeatureMap::fit_pca(std::vector<Vec>{{1.0, 2.0}}, 0.98);
        FAIL("expected TooFewPoints");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooFewPoints);
    }
    CHECK_THROWS_AS(FeatureMap::fit_pca(std::vector<Vec>{{0, 0}, {1, 1}}, 0.0), Error);
}
