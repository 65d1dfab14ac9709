#include "priorgan/gmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace priorgan {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2π)

Mat sample_covariance(std::span<const Vec> data, std::span<const double> mean) {
    const std::size_t d = mean.size();
    Mat cov(d, d);
    Vec c(d);
    for (const auto& x : data) {
        for (std::size_t j = 0; j < d; ++j) c[j] = x[j] - mean[j];
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) cov(a, b) += c[a] * c[b];
    }
    const double n = static_cast<double>(data.size());
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            cov(a, b) /= n;
            cov(b, a) = cov(a, b);
        }
    return cov;
}

}  // namespace

GmmPrior::GmmPrior(Vec weights, std::vector<Vec> means, std::vector<Mat> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covariances_(std::move(covariances)) {
    const std::size_t m = weights_.size();
    require(m >= 1, ErrorCode::InvalidArgument, "mixture needs at least one component");
    require(means_.size() == m && covariances_.size() == m, ErrorCode::DimensionMismatch,
            "weights, means and covariances disagree on component count");
    const std::size_t d = means_.front().size();
    require(d >= 1, ErrorCode::InvalidArgument, "mixture dimension must be >= 1");

    double total = 0.0;
    for (double w : weights_) {
        require(w >= 0.0 && std::isfinite(w), ErrorCode::InvalidArgument, "mixture weights must be finite and >= 0");
        total += w;
    }
    require(total > 0.0, ErrorCode::InvalidArgument, "mixture weights sum to zero");
    if (std::abs(total - 1.0) > 1e-12)
        for (double& w : weights_) w /= total;

    chol_.reserve(m);
    log_norm_.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        require(means_[i].size() == d, ErrorCode::DimensionMismatch, "component means differ in dimension");
        require(all_finite(means_[i]), ErrorCode::InvalidArgument, "non-finite component mean");
        const Mat& cov = covariances_[i];
        require(cov.rows() == d && cov.cols() == d, ErrorCode::DimensionMismatch, "covariance shape mismatch");
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a + 1; b < d; ++b)
                require(std::abs(cov(a, b) - cov(b, a)) <= 1e-12 * (std::abs(cov(a, b)) + std::abs(cov(b, a)) + 1e-300),
                        ErrorCode::InvalidArgument, "covariance not symmetric");
        chol_.push_back(cholesky(cov));
        log_norm_.push_back(-0.5 * (static_cast<double>(d) * kLog2Pi + log_det_from_cholesky(chol_.back())));
    }
}

void GmmPrior::check_dim(std::span<const double> x) const {
    if (x.size() != dim())
        fail(ErrorCode::DimensionMismatch,
             "feature has " + std::to_string(x.size()) + " entries, prior expects " + std::to_string(dim()));
}

Vec GmmPrior::component_log_terms(std::span<const double> x) const {
    check_dim(x);
    const std::size_t d = dim();
    Vec terms(components());
    Vec diff(d);
    for (std::size_t i = 0; i < components(); ++i) {
        for (std::size_t j = 0; j < d; ++j) diff[j] = x[j] - means_[i][j];
        const Vec y = solve_triangular(chol_[i], diff);
        const double maha = dot(y, y);
        terms[i] = std::log(weights_[i]) + log_norm_[i] - 0.5 * maha;
    }
    return terms;
}

double GmmPrior::log_density(std::span<const double> x) const { return log_sum_exp(component_log_terms(x)); }

Vec GmmPrior::responsibilities(std::span<const double> x) const {
    Vec terms = component_log_terms(x);
    const double lse = log_sum_exp(terms);
    for (double& t : terms) t = std::exp(t - lse);
    return terms;
}

Vec GmmPrior::solve_covariance(std::size_t component, std::span<const double> v) const {
    return solve_triangular_transposed(chol_[component], solve_triangular(chol_[component], v));
}

Vec GmmPrior::log_density_gradient(std::span<const double> x) const {
    const Vec gamma = responsibilities(x);
    const std::size_t d = dim();
    Vec grad(d, 0.0);
    Vec diff(d);
    for (std::size_t i = 0; i < components(); ++i) {
        if (gamma[i] == 0.0) continue;
        for (std::size_t j = 0; j < d; ++j) diff[j] = x[j] - means_[i][j];
        const Vec s = solve_covariance(i, diff);
        for (std::size_t j = 0; j < d; ++j) grad[j] -= gamma[i] * s[j];
    }
    return grad;
}

std::size_t GmmPrior::assign_component(std::span<const double> x) const {
    check_dim(x);
    std::size_t best = 0;
    double best_d = squared_distance(x, means_[0]);
    for (std::size_t i = 1; i < components(); ++i) {
        const double d2 = squared_distance(x, means_[i]);
        if (d2 < best_d) {
            best_d = d2;
            best = i;
        }
    }
    return best;
}

std::vector<Vec> GmmPrior::sample(Rng& rng, std::size_t n) const {
    require(n >= 1, ErrorCode::InvalidArgument, "sample count must be >= 1");
    const std::size_t d = dim();
    std::vector<Vec> out;
    out.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t c = sample_categorical(rng, weights_);
        const Vec eps = sample_standard_normal(rng, d);
        Vec x = means_[c];
        const Mat& l = chol_[c];
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t k = 0; k <= r; ++k) x[r] += l(r, k) * eps[k];
        out.push_back(std::move(x));
    }
    return out;
}

double negative_log_likelihood(const GmmPrior& prior, std::span<const Vec> data) {
    CompensatedSum nll;
    for (const auto& x : data) nll.add(-prior.log_density(x));
    return nll.value();
}

double default_ridge(std::span<const Vec> data, double scale) {
    require(!data.empty(), ErrorCode::EmptySet, "default_ridge of empty set");
    const std::size_t d = data.front().size();
    Vec mean(d, 0.0);
    for (const auto& x : data)
        for (std::size_t j = 0; j < d; ++j) mean[j] += x[j];
    const double n = static_cast<double>(data.size());
    for (double& v : mean) v /= n;
    double var = 0.0;
    for (const auto& x : data) var += squared_distance(x, mean);
    var /= n * static_cast<double>(d);
    return scale * var;
}

std::vector<Vec> kmeans_pp_seeds(std::span<const Vec> data, std::size_t k, Rng& rng) {
    require(k >= 1 && data.size() >= k, ErrorCode::TooFewPoints, "k-means++ needs at least k points");
    std::vector<Vec> centres;
    centres.reserve(k);
    centres.push_back(data[rng.uniform_index(data.size())]);

    std::vector<double> d2(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) d2[i] = squared_distance(data[i], centres[0]);

    while (centres.size() < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick = 0;
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            double cum = 0.0;
            pick = data.size() - 1;
            for (std::size_t i = 0; i < data.size(); ++i) {
                cum += d2[i];
                if (u < cum && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.uniform_index(data.size());
        }
        centres.push_back(data[pick]);
        for (std::size_t i = 0; i < data.size(); ++i)
            d2[i] = std::min(d2[i], squared_distance(data[i], centres.back()));
    }
    return centres;
}

namespace {

struct MixtureParams {
    Vec weights;
    std::vector<Vec> means;
    std::vector<Mat> covs;
};

// Weighted M-step from an N×M responsibility matrix (row-major).
// Returns the index of a collapsed component, or M when none collapsed.
std::size_t m_step(std::span<const Vec> data, const std::vector<double>& resp, std::size_t m, double ridge,
                   MixtureParams& out) {
    const std::size_t n = data.size();
    const std::size_t d = data.front().size();
    const double collapse_mass = 10.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n);

    out.weights.assign(m, 0.0);
    out.means.assign(m, Vec(d, 0.0));
    out.covs.assign(m, Mat(d, d));

    Vec mass(m, 0.0);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t i = 0; i < m; ++i) {
            const double r = resp[p * m + i];
            mass[i] += r;
            for (std::size_t j = 0; j < d; ++j) out.means[i][j] += r * data[p][j];
        }
    for (std::size_t i = 0; i < m; ++i)
        if (mass[i] < collapse_mass) return i;

    for (std::size_t i = 0; i < m; ++i)
        for (double& v : out.means[i]) v /= mass[i];

    Vec c(d);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t i = 0; i < m; ++i) {
            const double r = resp[p * m + i];
            if (r == 0.0) continue;
            for (std::size_t j = 0; j < d; ++j) c[j] = data[p][j] - out.means[i][j];
            Mat& cov = out.covs[i];
            for (std::size_t a = 0; a < d; ++a) {
                const double rc = r * c[a];
                for (std::size_t b = a; b < d; ++b) cov(a, b) += rc * c[b];
            }
        }
    for (std::size_t i = 0; i < m; ++i) {
        Mat& cov = out.covs[i];
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) {
                cov(a, b) /= mass[i];
                cov(b, a) = cov(a, b);
            }
        for (std::size_t a = 0; a < d; ++a) cov(a, a) += ridge;
        out.weights[i] = mass[i] / static_cast<double>(n);
    }
    return m;
}

}  // namespace

EmFit fit_em(std::span<const Vec> data, std::size_t components, Rng& rng, const EmConfig& config) {
    require(components >= 1, ErrorCode::InvalidArgument, "component count must be >= 1");
    require(!data.empty(), ErrorCode::TooFewPoints, "EM on an empty set");
    const std::size_t n = data.size();
    const std::size_t d = data.front().size();
    for (const auto& x : data) require(x.size() == d, ErrorCode::DimensionMismatch, "EM inputs differ in dimension");
    if (n < components * (d + 1))
        fail(ErrorCode::TooFewPoints, std::to_string(n) + " points cannot support " + std::to_string(components) +
                                          " components in " + std::to_string(d) + " dimensions");
    require(config.max_iters >= 1, ErrorCode::InvalidArgument, "max_iters must be >= 1");
    require(config.ridge >= 0.0, ErrorCode::InvalidArgument, "ridge must be >= 0");

    const std::size_t m = components;
    std::vector<double> resp(n * m, 0.0);

    // Hard assignment to the k-means++ seeds.
    const auto seeds = kmeans_pp_seeds(data, m, rng);
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t best = 0;
        double best_d = squared_distance(data[p], seeds[0]);
        for (std::size_t i = 1; i < m; ++i) {
            const double d2 = squared_distance(data[p], seeds[i]);
            if (d2 < best_d) {
                best_d = d2;
                best = i;
            }
        }
        resp[p * m + best] = 1.0;
    }

    int reseeds = 0;
    Mat global_cov;
    auto reseed_or_fail = [&](std::size_t collapsed, MixtureParams& params) {
        if (reseeds >= 1)
            fail(ErrorCode::CollapsedComponent, "component " + std::to_string(collapsed) + " collapsed again after reseeding");
        ++reseeds;
        if (global_cov.size() == 0) {
            Vec mean(d, 0.0);
            for (const auto& x : data)
                for (std::size_t j = 0; j < d; ++j) mean[j] += x[j];
            for (double& v : mean) v /= static_cast<double>(n);
            global_cov = sample_covariance(data, mean);
            for (std::size_t a = 0; a < d; ++a) global_cov(a, a) += config.ridge;
        }
        // Refit the healthy components as usual and restart the collapsed one
        // at a random data point with the global covariance.
        const std::size_t pick = rng.uniform_index(n);
        for (std::size_t p = 0; p < n; ++p) resp[p * m + collapsed] = 0.0;
        resp[pick * m + collapsed] = 1.0;
        const std::size_t again = m_step(data, resp, m, config.ridge, params);
        if (again != m && again != collapsed)
            fail(ErrorCode::CollapsedComponent, "component " + std::to_string(again) + " collapsed during reseed");
        params.means[collapsed] = data[pick];
        params.covs[collapsed] = global_cov;
        params.weights[collapsed] = 1.0 / static_cast<double>(m);
    };

    MixtureParams params;
    if (const std::size_t c = m_step(data, resp, m, config.ridge, params); c != m) reseed_or_fail(c, params);

    EmReport report;
    Vec terms(m);
    for (int iter = 0;; ++iter) {
        GmmPrior prior(params.weights, params.means, params.covs);

        CompensatedSum total;
        for (std::size_t p = 0; p < n; ++p) {
            terms = prior.component_log_terms(data[p]);
            const double lse = log_sum_exp(terms);
            total.add(-lse);
            for (std::size_t i = 0; i < m; ++i) resp[p * m + i] = std::exp(terms[i] - lse);
        }
        const double nll = total.value();
        if (!std::isfinite(nll)) fail(ErrorCode::NonFiniteLoss, "EM negative log-likelihood is not finite");
        report.nll_trace.push_back(nll);
        report.iterations_run = iter;

        const std::size_t len = report.nll_trace.size();
        if (len >= 2 && std::abs(report.nll_trace[len - 2] - nll) < config.tol * std::abs(nll)) {
            report.converged = true;
            report.reseeds = reseeds;
            return EmFit{std::move(prior), std::move(report)};
        }
        if (iter >= config.max_iters) {
            report.reseeds = reseeds;
            return EmFit{std::move(prior), std::move(report)};
        }

        if (const std::size_t c = m_step(data, resp, m, config.ridge, params); c != m) reseed_or_fail(c, params);
    }
}

}  // namespace priorgan
