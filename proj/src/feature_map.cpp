#include "priorgan/feature_map.hpp"

#include <algorithm>
#include <cmath>

namespace priorgan {

std::string to_string(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::Identity: return "identity";
    case FeatureKind::RandomProjection: return "random_projection";
    case FeatureKind::Pca: return "pca";
    }
    return "identity";
}

FeatureKind feature_kind_from_string(const std::string& name) {
    if (name == "identity") return FeatureKind::Identity;
    if (name == "random_projection") return FeatureKind::RandomProjection;
    if (name == "pca") return FeatureKind::Pca;
    fail(ErrorCode::InvalidArgument, "unknown feature map kind '" + name + "'");
}

FeatureMap FeatureMap::identity(std::size_t dim) {
    require(dim >= 1, ErrorCode::InvalidArgument, "identity feature map needs dim >= 1");
    FeatureMap m;
    m.kind_ = FeatureKind::Identity;
    m.input_dim_ = m.output_dim_ = dim;
    return m;
}

FeatureMap FeatureMap::random_projection(std::size_t input_dim, std::size_t output_dim, Rng& rng) {
    require(input_dim >= 1 && output_dim >= 1, ErrorCode::InvalidArgument, "projection dims must be >= 1");
    FeatureMap m;
    m.kind_ = FeatureKind::RandomProjection;
    m.input_dim_ = input_dim;
    m.output_dim_ = output_dim;
    m.projection_ = Mat(output_dim, input_dim);
    const double scale = 1.0 / std::sqrt(static_cast<double>(output_dim));
    for (double& v : m.projection_.data()) v = scale * rng.normal();
    return m;
}

FeatureMap FeatureMap::fit_pca(std::span<const Vec> data, double variance_keep) {
    require(variance_keep > 0.0 && variance_keep <= 1.0, ErrorCode::InvalidArgument, "variance_keep must be in (0,1]");
    require(data.size() >= 2, ErrorCode::TooFewPoints, "PCA needs at least two points");
    const std::size_t d = data.front().size();
    for (const auto& x : data) require(x.size() == d, ErrorCode::DimensionMismatch, "PCA input dims differ");

    const double n = static_cast<double>(data.size());
    Vec mean(d, 0.0);
    for (const auto& x : data)
        for (std::size_t j = 0; j < d; ++j) mean[j] += x[j];
    for (double& v : mean) v /= n;

    Mat cov(d, d);
    Vec centered(d);
    for (const auto& x : data) {
        for (std::size_t j = 0; j < d; ++j) centered[j] = x[j] - mean[j];
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) cov(a, b) += centered[a] * centered[b];
    }
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = a; b < d; ++b) {
            cov(a, b) /= n;
            cov(b, a) = cov(a, b);
        }

    const auto eig = jacobi_eigen(cov);
    const double lead = std::max(eig.values.front(), 0.0);
    if (!(lead > 0.0)) fail(ErrorCode::DegenerateData, "PCA input points are all identical");

    // Eigenvalues below this relative floor are rounding noise of a rank-deficient covariance.
    const double floor = 1e-12 * lead;
    double total = 0.0;
    for (double v : eig.values)
        if (v > floor) total += v;

    std::size_t k = 0;
    double kept = 0.0;
    while (k < d && eig.values[k] > floor) {
        kept += eig.values[k];
        ++k;
        if (kept >= variance_keep * total * (1.0 - 1e-12)) break;
    }

    FeatureMap m;
    m.kind_ = FeatureKind::Pca;
    m.input_dim_ = d;
    m.output_dim_ = k;
    m.projection_ = Mat(k, d);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < d; ++c) m.projection_(r, c) = eig.vectors(c, r);
    m.mean_offset_ = std::move(mean);
    m.explained_ = kept / total;
    return m;
}

FeatureMap FeatureMap::from_parts(FeatureKind kind, std::size_t input_dim, std::size_t output_dim, Mat projection,
                                  Vec mean_offset, double explained_variance_fraction) {
    FeatureMap m;
    m.kind_ = kind;
    m.input_dim_ = input_dim;
    m.output_dim_ = output_dim;
    if (kind == FeatureKind::Identity) {
        require(input_dim == output_dim, ErrorCode::FormatError, "identity map with differing dims");
    } else {
        require(projection.rows() == output_dim && projection.cols() == input_dim, ErrorCode::FormatError,
                "projection shape does not match map dims");
    }
    if (kind == FeatureKind::Pca)
        require(mean_offset.size() == input_dim, ErrorCode::FormatError, "pca offset length mismatch");
    m.projection_ = std::move(projection);
    m.mean_offset_ = std::move(mean_offset);
    m.explained_ = explained_variance_fraction;
    return m;
}

Vec FeatureMap::apply(std::span<const double> x) const {
    require(x.size() == input_dim_, ErrorCode::DimensionMismatch, "feature map input dimension mismatch");
    if (kind_ == FeatureKind::Identity) return Vec(x.begin(), x.end());
    if (mean_offset_.empty()) return matvec(projection_, x);
    Vec centered(input_dim_);
    for (std::size_t j = 0; j < input_dim_; ++j) centered[j] = x[j] - mean_offset_[j];
    return matvec(projection_, centered);
}

std::vector<Vec> FeatureMap::apply_all(std::span<const Vec> xs) const {
    std::vector<Vec> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(apply(x));
    return out;
}

Vec FeatureMap::apply_jacobian_transpose(std::span<const double> grad_feature) const {
    require(grad_feature.size() == output_dim_, ErrorCode::DimensionMismatch,
            "feature gradient dimension mismatch");
    if (kind_ == FeatureKind::Identity) return Vec(grad_feature.begin(), grad_feature.end());
    return matvec_transposed(projection_, grad_feature);
}

}  // namespace priorgan
