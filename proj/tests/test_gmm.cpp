#include <doctest.h>

#include <cmath>
#include <numbers>

#include "priorgan/error.hpp"
#include "priorgan/gmm.hpp"

using namespace priorgan;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Closed-form bivariate normal density through the explicit 2×2 inverse.
double normal2(const Vec& x, const Vec& mu, const Mat& s) {
    const double det = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
    const double dx = x[0] - mu[0], dy = x[1] - mu[1];
    const double q = (s(1, 1) * dx * dx - 2.0 * s(0, 1) * dx * dy + s(0, 0) * dy * dy) / det;
    return std::exp(-0.5 * q) / (kTwoPi * std::sqrt(det));
}

GmmPrior two_component() {
    return GmmPrior({0.3, 0.7}, {{-1.0, 0.5}, {2.0, -1.0}},
                    {Mat(2, 2, {1.0, 0.3, 0.3, 0.5}), Mat(2, 2, {0.8, -0.2, -0.2, 1.5})});
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::Ok;
}

std::vector<Vec> two_clusters(Rng& rng, std::size_t n) {
    std::vector<Vec> pts;
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.uniform() < 0.4)
            pts.push_back({-3.0 + 0.5 * rng.normal(), 1.0 + 0.5 * rng.normal()});
        else
            pts.push_back({3.0 + 0.8 * rng.normal(), -2.0 + 0.3 * rng.normal()});
    }
    return pts;
}

}  // namespace

TEST_CASE("log density of standard normals") {
    const GmmPrior one({1.0}, {{0.0}}, {Mat(1, 1, {1.0})});
    CHECK(one.log_density(Vec{0.0}) == doctest::Approx(-0.9189385332046727).epsilon(1e-15));
    CHECK(one.log_density(Vec{2.0}) == doctest::Approx(-0.9189385332046727 - 2.0).epsilon(1e-15));

    const GmmPrior iso({1.0}, {{0.0, 0.0}}, {Mat::identity(2)});
    CHECK(iso.log_density(Vec{0.0, 0.0}) == doctest::Approx(-1.8378770664093453).epsilon(1e-15));
}

TEST_CASE("mixture density matches the closed form") {
    const GmmPrior g = two_component();
    Rng rng(21);
    for (int t = 0; t < 200; ++t) {
        const Vec x{4.0 * rng.normal(), 4.0 * rng.normal()};
        const double p = 0.3 * normal2(x, g.means()[0], g.covariances()[0]) +
                         0.7 * normal2(x, g.means()[1], g.covariances()[1]);
        CHECK(g.log_density(x) == doctest::Approx(std::log(p)).epsilon(1e-12));
    }
    // Far away, the naive sum underflows but log-sum-exp does not.
    const double far = g.log_density(Vec{80.0, 80.0});
    CHECK(std::isfinite(far));
    CHECK(far < -1000.0);
}

TEST_CASE("responsibilities") {
    const GmmPrior g = two_component();
    Rng rng(22);
    for (int t = 0; t < 100; ++t) {
        const Vec x{3.0 * rng.normal(), 3.0 * rng.normal()};
        const Vec r = g.responsibilities(x);
        CHECK(r[0] + r[1] == doctest::Approx(1.0).epsilon(1e-14));
        const double p0 = 0.3 * normal2(x, g.means()[0], g.covariances()[0]);
        const double p1 = 0.7 * normal2(x, g.means()[1], g.covariances()[1]);
        CHECK(r[0] == doctest::Approx(p0 / (p0 + p1)).epsilon(1e-10));
    }
    const GmmPrior sym({0.5, 0.5}, {{-1.0, 0.0}, {1.0, 0.0}}, {Mat::identity(2), Mat::identity(2)});
    const Vec r = sym.responsibilities(Vec{0.0, 3.0});
    CHECK(r[0] == doctest::Approx(0.5));
    CHECK(r[1] == doctest::Approx(0.5));
}

TEST_CASE("log density gradient agrees with central differences") {
    const GmmPrior g = two_component();
    Rng rng(23);
    const double h = 1e-5;
    for (int t = 0; t < 50; ++t) {
        const Vec x{2.0 * rng.normal(), 2.0 * rng.normal()};
        const Vec grad = g.log_density_gradient(x);
        for (int i = 0; i < 2; ++i) {
            Vec xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            const double fd = (g.log_density(xp) - g.log_density(xm)) / (2 * h);
            CHECK(std::abs(grad[i] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
    const GmmPrior one({1.0}, {{1.0, 2.0}}, {Mat::identity(2)});
    const Vec at_mean = one.log_density_gradient(Vec{1.0, 2.0});
    CHECK(at_mean[0] == 0.0);
    CHECK(at_mean[1] == 0.0);
}

TEST_CASE("nearest-mean assignment") {
    const GmmPrior g({0.25, 0.25, 0.5}, {{0.0, 0.0}, {2.0, 0.0}, {0.0, 5.0}},
                     {Mat::identity(2), Mat::identity(2), Mat::identity(2)});
    CHECK(g.assign_component(Vec{1.0, 0.0}) == 0u);  // equidistant: lowest index
    CHECK(g.assign_component(Vec{1.0001, 0.0}) == 1u);
    CHECK(g.assign_component(Vec{0.0, 4.0}) == 2u);

    Rng rng(24);
    for (int t = 0; t < 1000; ++t) {
        const Vec x{4.0 * rng.normal(), 4.0 * rng.normal()};
        std::size_t best = 0;
        double best_d = INFINITY;
        for (std::size_t i = 0; i < 3; ++i) {
            const double dx = x[0] - g.means()[i][0], dy = x[1] - g.means()[i][1];
            if (dx * dx + dy * dy < best_d) {
                best_d = dx * dx + dy * dy;
                best = i;
            }
        }
        CHECK(g.assign_component(x) == best);
    }
}

TEST_CASE("constructor validation") {
    CHECK(code_of([] { GmmPrior({-0.5, 1.5}, {{0.0}, {1.0}}, {Mat(1, 1, {1.0}), Mat(1, 1, {1.0})}); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([] { GmmPrior({1.0}, {{0.0, 0.0}}, {Mat(2, 2, {1, 2, 2, 1})}); }) ==
          ErrorCode::NotPositiveDefinite);
    CHECK(code_of([] { GmmPrior({1.0}, {{0.0, 0.0}}, {Mat::identity(3)}); }) == ErrorCode::DimensionMismatch);
    const GmmPrior scaled({2.0, 6.0}, {{0.0}, {1.0}}, {Mat(1, 1, {1.0}), Mat(1, 1, {1.0})});
    CHECK(scaled.weights()[0] == doctest::Approx(0.25));
    CHECK(code_of([&] { scaled.log_density(Vec{1.0, 2.0}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("single-component EM is the sample mean and covariance") {
    Rng rng(25);
    std::vector<Vec> pts;
    for (int i = 0; i < 500; ++i) {
        const double a = rng.normal(), b = rng.normal();
        pts.push_back({1.0 + 2.0 * a, -1.0 + 0.5 * a + 0.3 * b});
    }
    Vec mean(2, 0.0);
    for (const auto& p : pts)
        for (int j = 0; j < 2; ++j) mean[j] += p[j] / 500.0;
    Mat cov(2, 2);
    for (const auto& p : pts)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) cov(a, b) += (p[a] - mean[a]) * (p[b] - mean[b]) / 500.0;

    EmConfig cfg;
    cfg.ridge = 1e-3;
    const EmFit fit = fit_em(pts, 1, rng, cfg);
    CHECK(fit.report.converged);
    for (int j = 0; j < 2; ++j) CHECK(fit.prior.means()[0][j] == doctest::Approx(mean[j]).epsilon(1e-12));
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            CHECK(fit.prior.covariances()[0](a, b) ==
                  doctest::Approx(cov(a, b) + (a == b ? 1e-3 : 0.0)).epsilon(1e-10));
}

TEST_CASE("EM recovers two separated clusters and never increases the NLL") {
    Rng data_rng(26);
    const auto pts = two_clusters(data_rng, 4000);
    Rng rng(27);
    EmConfig cfg;
    cfg.ridge = default_ridge(pts);
    const EmFit fit = fit_em(pts, 2, rng, cfg);
    CHECK(fit.report.converged);
    // One NLL for the hard-assignment start plus one per EM iteration.
    CHECK(fit.report.nll_trace.size() == static_cast<std::size_t>(fit.report.iterations_run) + 1);
    for (std::size_t i = 1; i < fit.report.nll_trace.size(); ++i)
        CHECK(fit.report.nll_trace[i] <= fit.report.nll_trace[i - 1] * (1.0 + 1e-12) + 1e-9);

    const std::size_t left = fit.prior.means()[0][0] < fit.prior.means()[1][0] ? 0 : 1;
    const std::size_t right = 1 - left;
    CHECK(std::abs(fit.prior.means()[left][0] + 3.0) < 0.05);
    CHECK(std::abs(fit.prior.means()[left][1] - 1.0) < 0.05);
    CHECK(std::abs(fit.prior.means()[right][0] - 3.0) < 0.05);
    CHECK(std::abs(fit.prior.means()[right][1] + 2.0) < 0.05);
    CHECK(std::abs(fit.prior.weights()[left] - 0.4) < 0.03);
    CHECK(std::abs(fit.prior.covariances()[right](0, 0) - 0.64) < 0.06);
    CHECK(std::abs(fit.prior.covariances()[right](1, 1) - 0.09) < 0.01);
    CHECK(negative_log_likelihood(fit.prior, pts) == doctest::Approx(fit.report.nll_trace.back()).epsilon(1e-6));

    Rng again(27);
    CHECK(fit_em(pts, 2, again, cfg).prior == fit.prior);
}

TEST_CASE("EM argument errors") {
    Rng rng(28);
    std::vector<Vec> five{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 2}};
    CHECK(code_of([&] { fit_em(five, 2, rng, EmConfig{}); }) == ErrorCode::TooFewPoints);
    std::vector<Vec> six = five;
    six.push_back({3, 1});
    EmConfig cfg;
    cfg.ridge = 1e-6;
    CHECK(code_of([&] { fit_em(six, 2, rng, cfg); }) == ErrorCode::Ok);
    CHECK(code_of([&] { fit_em(five, 0, rng, cfg); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("k-means++ seeds are distinct data points") {
    Rng data_rng(29);
    const auto pts = two_clusters(data_rng, 200);
    Rng rng(30);
    const auto seeds = kmeans_pp_seeds(pts, 4, rng);
    CHECK(seeds.size() == 4);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        CHECK(std::find(pts.begin(), pts.end(), seeds[i]) != pts.end());
        for (std::size_t j = 0; j < i; ++j) CHECK(seeds[i] != seeds[j]);
    }
}

TEST_CASE("sampling reproduces the mixture moments") {
    const GmmPrior g = two_component();
    Rng rng(31);
    const auto xs = g.sample(rng, 200000);
    Vec mean(2, 0.0);
    for (const auto& x : xs)
        for (int j = 0; j < 2; ++j) mean[j] += x[j] / 200000.0;
    // E[x] = Σ w_i μ_i.
    CHECK(std::abs(mean[0] - (0.3 * -1.0 + 0.7 * 2.0)) < 0.02);
    CHECK(std::abs(mean[1] - (0.3 * 0.5 + 0.7 * -1.0)) < 0.02);
    std::size_t first = 0;
    for (const auto& x : xs) first += g.assign_component(x) == 0;
    CHECK(std::abs(first / 200000.0 - 0.3) < 0.05);
}

TEST_CASE("worked examples") {
    const GmmPrior pair({0.5, 0.5}, {{1.0, 0.0}, {-1.0, 0.0}}, {Mat::identity(2), Mat::identity(2)});
    CHECK(pair.log_density(Vec{0.0, 0.0}) == doctest::Approx(-2.3378770664093453).epsilon(1e-14));
    const GmmPrior one({1.0}, {{0.0, 0.0}}, {Mat::identity(2)});
    CHECK(one.responsibilities(Vec{3.0, -1.0}) == Vec{1.0});
    const GmmPrior far({0.5, 0.5}, {{0.0, 0.0}, {5.0, 5.0}}, {Mat::identity(2), Mat::identity(2)});
    CHECK(far.assign_component(Vec{1.0, 1.0}) == 0u);
    // Assignment is unchanged by a common translation.
    const GmmPrior moved({0.5, 0.5}, {{10.0, -3.0}, {15.0, 2.0}}, {Mat::identity(2), Mat::identity(2)});
    CHECK(moved.assign_component(Vec{11.0, -2.0}) == 0u);
    CHECK(moved.assign_component(Vec{13.0, 0.0}) == 1u);

    const GmmPrior only_first({1.0, 0.0}, {{0.0, 0.0}, {50.0, 0.0}}, {Mat::identity(2), Mat::identity(2)});
    Rng rng(32);
    for (const auto& x : only_first.sample(rng, 1000)) CHECK(x[0] < 10.0);
    Rng srng(33);
    const auto xs = one.sample(srng, 100000);
    Vec mean(2, 0.0);
    for (const auto& x : xs)
        for (int j = 0; j < 2; ++j) mean[j] += x[j] / 100000.0;
    CHECK(std::abs(mean[0]) < 0.05);
    CHECK(std::abs(mean[1]) < 0.05);
}

TEST_CASE("EM recovers the unequal two-component mixture") {
    const GmmPrior truth({0.7, 0.3}, {{2.0, 0.0}, {-2.0, 0.0}}, {Mat::identity(2), Mat::identity(2)});
    Rng data_rng(34);
    const auto pts = truth.sample(data_rng, 5000);
    Rng rng(35);
    EmConfig cfg;
    cfg.ridge = default_ridge(pts);
    const EmFit fit = fit_em(pts, 2, rng, cfg);
    const std::size_t a = fit.prior.means()[0][0] > 0.0 ? 0 : 1;
    CHECK(std::hypot(fit.prior.means()[a][0] - 2.0, fit.prior.means()[a][1]) < 0.05);
    CHECK(std::hypot(fit.prior.means()[1 - a][0] + 2.0, fit.prior.means()[1 - a][1]) < 0.05);
    CHECK(std::abs(fit.prior.weights()[a] - 0.7) < 0.02);
    double sum = 0.0;
    for (double w : fit.prior.weights()) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}
