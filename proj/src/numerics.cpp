#include "priorgan/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <numbers>

namespace priorgan {

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, ErrorCode::DimensionMismatch, "matrix element count != rows*cols");
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Mat matmul(const Mat& a, const Mat& b) {
    require(a.cols() == b.rows(), ErrorCode::DimensionMismatch, "matmul: inner dimensions differ");
    Mat out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto orow = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Vec matvec(const Mat& a, std::span<const double> x) {
    require(a.cols() == x.size(), ErrorCode::DimensionMismatch, "matvec: dimension mismatch");
    Vec y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
    return y;
}

Vec matvec_transposed(const Mat& a, std::span<const double> x) {
    require(a.rows() == x.size(), ErrorCode::DimensionMismatch, "matvec_transposed: dimension mismatch");
    Vec y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto r = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) y[j] += x[i] * r[j];
    }
    return y;
}

double frobenius_norm(const Mat& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Mat cholesky(const Mat& m) {
    require(m.rows() == m.cols(), ErrorCode::DimensionMismatch, "cholesky: matrix not square");
    const std::size_t n = m.rows();
    Mat l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = m(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (!(diag > 0.0) || !std::isfinite(diag))
            fail(ErrorCode::NotPositiveDefinite, "cholesky: non-positive pivot at row " + std::to_string(j));
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

double log_det_from_cholesky(const Mat& lower) {
    double s = 0.0;
    for (std::size_t k = 0; k < lower.rows(); ++k) s += std::log(lower(k, k));
    return 2.0 * s;
}

Vec solve_triangular(const Mat& lower, std::span<const double> b) {
    const std::size_t n = lower.rows();
    require(lower.cols() == n && b.size() == n, ErrorCode::DimensionMismatch, "solve_triangular: dimension mismatch");
    Vec y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double diag = lower(i, i);
        if (diag == 0.0) fail(ErrorCode::SingularMatrix, "solve_triangular: zero diagonal at row " + std::to_string(i));
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * y[k];
        y[i] = s / diag;
    }
    return y;
}

Vec solve_triangular_transposed(const Mat& lower, std::span<const double> y) {
    const std::size_t n = lower.rows();
    require(lower.cols() == n && y.size() == n, ErrorCode::DimensionMismatch,
            "solve_triangular_transposed: dimension mismatch");
    Vec x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        const double diag = lower(ii, ii);
        if (diag == 0.0) fail(ErrorCode::SingularMatrix, "solve_triangular_transposed: zero diagonal");
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= lower(k, ii) * x[k];
        x[ii] = s / diag;
    }
    return x;
}

SymmetricEigen jacobi_eigen(const Mat& symmetric, int max_sweeps) {
    require(symmetric.rows() == symmetric.cols(), ErrorCode::DimensionMismatch, "jacobi_eigen: matrix not square");
    const std::size_t n = symmetric.rows();
    Mat a = symmetric;
    Mat v = Mat::identity(n);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        double total = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = 0; q < n; ++q) {
                total += a(p, q) * a(p, q);
                if (p != q) off += a(p, q) * a(p, q);
            }
        if (off <= 1e-30 * total || off == 0.0) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    SymmetricEigen out{Vec(n), Mat(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.values[k] = a(src, src);
        std::size_t argmax = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(v(i, src)) > std::abs(v(argmax, src))) argmax = i;
        const double sign = v(argmax, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * v(i, src);
    }
    return out;
}

double log_sum_exp(std::span<const double> v) {
    if (v.empty()) return -std::numeric_limits<double>::infinity();
    const double mx = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

double percentile(std::vector<double> values, double pct) {
    require(!values.empty(), ErrorCode::EmptySet, "percentile of empty set");
    require(pct >= 0.0 && pct <= 100.0, ErrorCode::InvalidArgument, "percentile outside [0,100]");
    std::sort(values.begin(), values.end());
    const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
}

std::uint64_t Rng::next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    ++counter_;
    return result;
}

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t Rng::uniform_index(std::size_t n) {
    require(n > 0, ErrorCode::InvalidArgument, "uniform_index over empty range");
    const auto bound = static_cast<std::uint64_t>(n);
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t x = next_u64();
        const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
        if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::size_t>(m >> 64);
    }
}

double Rng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    has_spare_ = true;
    return r * std::cos(phi);
}

Rng Rng::derive(std::uint64_t tag) const noexcept {
    std::uint64_t x = seed_ ^ (tag * 0xd1b54a32d192ed03ULL);
    return Rng(splitmix64(x));
}

Rng::State Rng::state() const noexcept { return State{seed_, counter_, s_, has_spare_, spare_}; }

Rng Rng::from_state(const State& st) noexcept {
    Rng r;
    r.seed_ = st.seed;
    r.counter_ = st.counter;
    r.s_ = st.s;
    r.has_spare_ = st.has_spare;
    r.spare_ = st.spare;
    return r;
}

Vec sample_standard_normal(Rng& rng, std::size_t d) {
    require(d >= 1, ErrorCode::InvalidArgument, "sample_standard_normal: d must be >= 1");
    Vec out(d);
    for (auto& v : out) v = rng.normal();
    return out;
}

std::size_t sample_categorical(Rng& rng, std::span<const double> probs) {
    require(!probs.empty(), ErrorCode::EmptySet, "categorical over empty support");
    const double u = rng.uniform();
    double cum = 0.0;
    std::size_t last_positive = probs.size();
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        cum += probs[i];
        last_positive = i;
        if (u < cum) return i;
    }
    require(last_positive < probs.size(), ErrorCode::InvalidArgument, "categorical with no positive mass");
    return last_positive;
}

}  // namespace priorgan
