#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "priorgan/numerics.hpp"

namespace priorgan {

enum class FeatureKind { Identity, RandomProjection, Pca };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& name);

/// Deterministic affine map from raw samples to the feature space the prior
/// lives in: F(x) = P·(x − offset). Identity carries no matrix.
class FeatureMap {
public:
    static FeatureMap identity(std::size_t dim);
    /// Gaussian projection with entries N(0, 1/output_dim) drawn from `rng`.
    static FeatureMap random_projection(std::size_t input_dim, std::size_t output_dim, Rng& rng);
    /// Centered projection onto the leading principal directions whose
    /// eigenvalue mass reaches `variance_keep` of the total.
    static FeatureMap fit_pca(std::span<const Vec> data, double variance_keep);
    /// Reassemble from stored parts (used by the model-file loader).
    static FeatureMap from_parts(FeatureKind kind, std::size_t input_dim, std::size_t output_dim, Mat projection,
                                 Vec mean_offset, double explained_variance_fraction);

    Vec apply(std::span<const double> x) const;
    std::vector<Vec> apply_all(std::span<const Vec> xs) const;
    /// Jᵀ·g for the (constant) Jacobian J of apply.
    Vec apply_jacobian_transpose(std::span<const double> grad_feature) const;

    FeatureKind kind() const noexcept { return kind_; }
    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t output_dim() const noexcept { return output_dim_; }
    const Mat& projection() const noexcept { return projection_; }
    const Vec& mean_offset() const noexcept { return mean_offset_; }
    double explained_variance_fraction() const noexcept { return explained_; }

    friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

private:
    FeatureKind kind_ = FeatureKind::Identity;
    std::size_t input_dim_ = 0;
    std::size_t output_dim_ = 0;
    Mat projection_;  // output_dim × input_dim
    Vec mean_offset_;
    double explained_ = 1.0;
};

}  // namespace priorgan
