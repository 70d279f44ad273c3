#pragma once

// Vector/matrix primitives and the sparse-geometry quantities used throughout
// the library: rearrangements, lp norms, best s-term error, the block norm
// ||.||_{D_s^q} and membership in the cone T_{rho,s}^q.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparserec {

/// Thrown for any violated precondition on user-supplied input.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Relative tolerance for norm identities asserted across the library and tests.
inline constexpr double kNormIdentityTol = 1e-10;

using DenseVector = std::vector<double>;
using ConstVec = std::span<const double>;
using MutVec = std::span<double>;

inline void require(bool cond, const std::string& what) {
    if (!cond) throw InvalidArgument(what);
}

inline bool all_finite(ConstVec x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

inline void require_finite(ConstVec x, const char* name) {
    if (!all_finite(x)) throw InvalidArgument(std::string(name) + ": non-finite entry");
}

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// length, so results are reproducible regardless of how inputs were produced.
inline double pairwise_sum(ConstVec x) {
    constexpr std::size_t kBlock = 8;
    if (x.size() <= kBlock) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    const std::size_t half = x.size() / 2;
    return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

inline double dot(ConstVec a, ConstVec b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Dense real matrix, row-major.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        require(rows >= 1 && cols >= 1, "DenseMatrix: dimensions must be >= 1");
    }
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        require(rows >= 1 && cols >= 1, "DenseMatrix: dimensions must be >= 1");
        require(data_.size() == rows * cols, "DenseMatrix: data size does not match dimensions");
        require_finite(data_, "DenseMatrix");
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix I(n, n);
        for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    ConstVec row(std::size_t i) const { return ConstVec(data_).subspan(i * cols_, cols_); }
    MutVec row(std::size_t i) { return MutVec(data_).subspan(i * cols_, cols_); }

    ConstVec data() const { return data_; }
    MutVec data() { return data_; }

    /// out = A x
    void multiply(ConstVec x, MutVec out) const {
        for (std::size_t i = 0; i < rows_; ++i) out[i] = dot(row(i), x);
    }
    DenseVector multiply(ConstVec x) const {
        require(x.size() == cols_, "DenseMatrix::multiply: dimension mismatch");
        DenseVector out(rows_);
        multiply(x, out);
        return out;
    }

    /// out = A^T w
    void multiply_transpose(ConstVec w, MutVec out) const {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double wi = w[i];
            if (wi == 0.0) continue;
            const auto r = row(i);
            for (std::size_t j = 0; j < cols_; ++j) out[j] += wi * r[j];
        }
    }
    DenseVector multiply_transpose(ConstVec w) const {
        require(w.size() == rows_, "DenseMatrix::multiply_transpose: dimension mismatch");
        DenseVector out(cols_);
        multiply_transpose(w, out);
        return out;
    }

    DenseMatrix scaled(double c) const {
        DenseMatrix B = *this;
        for (double& v : B.data_) v *= c;
        return B;
    }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// |x| sorted in nonincreasing order.
inline DenseVector rearrangement(ConstVec x) {
    DenseVector r(x.size());
    std::transform(x.begin(), x.end(), r.begin(), [](double v) { return std::abs(v); });
    std::stable_sort(r.begin(), r.end(), std::greater<>());
    return r;
}

/// Indices of the s largest |x_i|; ties go to the lower index.
inline std::vector<std::size_t> top_s_indices(ConstVec x, std::size_t s) {
    require(s <= x.size(), "top_s_indices: s exceeds dimension");
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return std::abs(x[a]) > std::abs(x[b]); });
    idx.resize(s);
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// ||x||_p for p >= 1 or p = infinity. Computed on |x|/max|x| to avoid
/// overflow at large p.
inline double lp_norm(ConstVec x, double p) {
    if (!(p >= 1.0)) throw InvalidArgument("lp_norm: p must be >= 1 (got " + std::to_string(p) + ")");
    double amax = 0.0;
    for (double v : x) amax = std::max(amax, std::abs(v));
    if (std::isinf(p) || amax == 0.0) return amax;
    if (p == 1.0) {
        double s = 0.0;
        for (double v : x) s += std::abs(v);
        return s;
    }
    if (p == 2.0) {
        double s = 0.0;
        for (double v : x) {
            const double t = v / amax;
            s += t * t;
        }
        return amax * std::sqrt(s);
    }
    double s = 0.0;
    for (double v : x) s += std::pow(std::abs(v) / amax, p);
    return amax * std::pow(s, 1.0 / p);
}

/// Hoelder conjugate exponent: 1 <-> inf, 2 <-> 2, p -> p/(p-1).
inline double dual_exponent(double p) {
    require(p >= 1.0, "dual_exponent: p must be >= 1");
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

/// sigma_s(x)_1: l1 mass outside the s largest entries.
inline double best_s_term_error(ConstVec x, std::size_t s) {
    require(s <= x.size(), "best_s_term_error: s exceeds dimension");
    const DenseVector r = rearrangement(x);
    return pairwise_sum(ConstVec(r).subspan(s));
}

/// ||x||_{D_s^q}: sum over consecutive length-s blocks of the rearrangement
/// of the blockwise lq norm. The last block holds the remaining n - s*(k-1)
/// entries.
inline double dsq_norm(ConstVec x, std::size_t s, double q) {
    require(s >= 1 && s <= x.size(), "dsq_norm: need 1 <= s <= n");
    require(q >= 1.0 && std::isfinite(q), "dsq_norm: q must be finite and >= 1");
    const DenseVector r = rearrangement(x);
    const ConstVec rv(r);
    double total = 0.0;
    for (std::size_t start = 0; start < r.size(); start += s) {
        const std::size_t len = std::min(s, r.size() - start);
        total += lp_norm(rv.subspan(start, len), q);
    }
    return total;
}

/// Parameters (rho, s, q) of the cone T_{rho,s}^q.
struct ConeParams {
    double rho = 0.5;
    std::size_t s = 1;
    double q = 2.0;

    void validate(std::size_t n) const {
        require(rho > 0.0 && rho < 1.0, "ConeParams: rho must lie in (0,1)");
        require(s >= 1 && s <= n, "ConeParams: need 1 <= s <= n");
        require(q >= 1.0 && std::isfinite(q), "ConeParams: q must be finite and >= 1");
    }
};

struct ConeTest {
    bool member = false;
    /// ||x_S||_q - rho / s^{1-1/q} * ||x_{S^c}||_1 with S the top-s support.
    double margin = 0.0;
};

/// Evaluates the cone inequality on the top-s support, which maximizes
/// ||x_S||_q and minimizes ||x_{S^c}||_1 simultaneously.
inline ConeTest cone_membership(ConstVec x, const ConeParams& cp) {
    cp.validate(x.size());
    require_finite(x, "cone_membership");
    const bool nonzero = std::any_of(x.begin(), x.end(), [](double v) { return v != 0.0; });
    require(nonzero, "cone_membership: zero vector");

    const auto S = top_s_indices(x, cp.s);
    std::vector<char> in_s(x.size(), 0);
    DenseVector head;
    head.reserve(cp.s);
    for (std::size_t i : S) {
        in_s[i] = 1;
        head.push_back(x[i]);
    }
    DenseVector tail;
    tail.reserve(x.size() - cp.s);
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!in_s[i]) tail.push_back(std::abs(x[i]));

    const double coeff = cp.rho / std::pow(static_cast<double>(cp.s), 1.0 - 1.0 / cp.q);
    ConeTest t;
    t.margin = lp_norm(head, cp.q) - coeff * pairwise_sum(tail);
    t.member = t.margin >= 0.0;
    return t;
}

}  // namespace sparserec
