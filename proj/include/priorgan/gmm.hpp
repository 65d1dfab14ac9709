#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "priorgan/numerics.hpp"

namespace priorgan {

/// Full-covariance Gaussian mixture p(x) = Σ_i w_i N(x | μ_i, Σ_i).
///
/// Construction validates the parameters, renormalises the weights and
/// caches a Cholesky factor per component; instances are immutable.
class GmmPrior {
public:
    GmmPrior(Vec weights, std::vector<Vec> means, std::vector<Mat> covariances);

    std::size_t components() const noexcept { return weights_.size(); }
    std::size_t dim() const noexcept { return means_.front().size(); }

    const Vec& weights() const noexcept { return weights_; }
    const std::vector<Vec>& means() const noexcept { return means_; }
    const std::vector<Mat>& covariances() const noexcept { return covariances_; }
    const std::vector<Mat>& cholesky_factors() const noexcept { return chol_; }

    /// log w_i + log N(x | μ_i, Σ_i) for every component.
    Vec component_log_terms(std::span<const double> x) const;
    /// log p(x), via log-sum-exp over the component terms.
    double log_density(std::span<const double> x) const;
    /// Posterior component probabilities γ_i(x); sums to one.
    Vec responsibilities(std::span<const double> x) const;
    /// ∇ₓ log p(x) = −Σ_i γ_i Σ_i⁻¹ (x − μ_i).
    Vec log_density_gradient(std::span<const double> x) const;
    /// Nearest mean in Euclidean distance; ties go to the lowest index.
    std::size_t assign_component(std::span<const double> x) const;
    /// Σ_i⁻¹ v through the cached factor.
    Vec solve_covariance(std::size_t component, std::span<const double> v) const;

    /// Ancestral sampling: component by weight, then μ_i + L_i·ε.
    std::vector<Vec> sample(Rng& rng, std::size_t n) const;

    friend bool operator==(const GmmPrior& a, const GmmPrior& b) {
        return a.weights_ == b.weights_ && a.means_ == b.means_ && a.covariances_ == b.covariances_;
    }

private:
    void check_dim(std::span<const double> x) const;

    Vec weights_;
    std::vector<Vec> means_;
    std::vector<Mat> covariances_;
    std::vector<Mat> chol_;
    Vec log_norm_;  // −½(d·log 2π + log|Σ_i|)
};

struct EmConfig {
    int max_iters = 500;
    double tol = 1e-6;  // relative NLL change
    double ridge = 0.0;  // absolute, added to every covariance diagonal
};

struct EmReport {
    int iterations_run = 0;
    std::vector<double> nll_trace;  // Σ −log p(x) over the fit set, one per E-step
    bool converged = false;
    int reseeds = 0;
};

struct EmFit {
    GmmPrior prior;
    EmReport report;
};

/// ridge = scale · mean per-dimension variance of the data.
double default_ridge(std::span<const Vec> data, double scale = 1e-6);

/// k-means++ seeding: first centre uniform, the rest by D² weighting.
std::vector<Vec> kmeans_pp_seeds(std::span<const Vec> data, std::size_t k, Rng& rng);

/// EM for a full-covariance mixture, seeded by k-means++ and one
/// hard-assignment M-step. Errors: TooFewPoints when n < M·(d+1);
/// CollapsedComponent when a component loses all mass a second time.
EmFit fit_em(std::span<const Vec> data, std::size_t components, Rng& rng, const EmConfig& config);

/// Σ −log p(x) over a set.
double negative_log_likelihood(const GmmPrior& prior, std::span<const Vec> data);

}  // namespace priorgan
