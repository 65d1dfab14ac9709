#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "priorgan/error.hpp"

namespace priorgan {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Mat(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Mat identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    Mat transpose() const;

    friend bool operator==(const Mat&, const Mat&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Mat matmul(const Mat& a, const Mat& b);
Vec matvec(const Mat& a, std::span<const double> x);
/// aᵀ·x without materialising the transpose.
Vec matvec_transposed(const Mat& a, std::span<const double> x);
double frobenius_norm(const Mat& m);
double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> v);

/// Lower-triangular L with L·Lᵀ = m. Throws NotPositiveDefinite on a
/// non-positive pivot.
Mat cholesky(const Mat& m);
double log_det_from_cholesky(const Mat& lower);
/// Forward substitution for L·y = b.
Vec solve_triangular(const Mat& lower, std::span<const double> b);
/// Back substitution for Lᵀ·x = y.
Vec solve_triangular_transposed(const Mat& lower, std::span<const double> y);

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Eigenvalues are
/// returned in descending order; column k of `vectors` pairs with value k and
/// is sign-normalised so its largest-magnitude entry is positive.
struct SymmetricEigen {
    Vec values;
    Mat vectors;
};
SymmetricEigen jacobi_eigen(const Mat& symmetric, int max_sweeps = 100);

double log_sum_exp(std::span<const double> v);

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

/// Percentile (0..100) by linear interpolation between order statistics
/// (rank = p/100 · (n−1), the "type 7" rule). Input need not be sorted.
double percentile(std::vector<double> values, double pct);

/// xoshiro256** seeded through splitmix64. Normals use the basic Box–Muller
/// transform; the second variate of each pair is cached in the state.
class Rng {
public:
    static constexpr const char* kVersion = "xoshiro256starstar+splitmix64/box-muller-v1";

    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t next_u64() noexcept;
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform integer on [0, n), unbiased (rejection on the multiply-shift).
    std::size_t uniform_index(std::size_t n);
    double normal() noexcept;
    /// Independent stream derived from this generator's seed and a tag;
    /// does not advance this generator.
    Rng derive(std::uint64_t tag) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t position() const noexcept { return counter_; }

    friend bool operator==(const Rng&, const Rng&) = default;

    /// Raw state, for checkpointing.
    struct State {
        std::uint64_t seed = 0;
        std::uint64_t counter = 0;
        std::array<std::uint64_t, 4> s{};
        bool has_spare = false;
        double spare = 0.0;
    };
    State state() const noexcept;
    static Rng from_state(const State& st) noexcept;

private:
    std::uint64_t seed_ = 0;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 4> s_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

Vec sample_standard_normal(Rng& rng, std::size_t d);

/// Index drawn from a categorical distribution with the given (normalised)
/// probabilities by inverse-CDF scan. Zero-probability entries are never chosen.
std::size_t sample_categorical(Rng& rng, std::span<const double> probs);

}  // namespace priorgan
