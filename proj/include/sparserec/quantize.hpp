#pragma once

// Uniform scalar quantization of measurements and quantization-consistent
// basis pursuit.

#include <cmath>

#include "core.hpp"
#include "solvers.hpp"

namespace sparserec {

struct QuantizerConfig {
    double theta = 1.0;  ///< bin width

    void validate() const { require(theta > 0.0 && std::isfinite(theta), "QuantizerConfig: theta must be > 0"); }
};

/// Lattice indices beyond 2^52 are not exactly representable.
inline constexpr double kMaxLatticeIndex = 4503599627370496.0;

/// Q_theta(z)_i = theta * floor(z_i / theta) + theta / 2. A value on a bin
/// edge k*theta maps to the bin [k theta, (k+1) theta).
inline DenseVector quantize(ConstVec z, double theta) {
    QuantizerConfig{theta}.validate();
    require_finite(z, "quantize");
    DenseVector out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double t = z[i] / theta;
        require(std::abs(t) <= kMaxLatticeIndex, "quantize: |z_i|/theta exceeds 2^52");
        out[i] = theta * std::floor(t) + theta / 2.0;
    }
    return out;
}

struct ConsistencyReport {
    bool consistent = false;
    bool off_lattice = false;        ///< y is not on theta*Z + theta/2 (warning only)
    double max_abs_residual = 0.0;   ///< ||A x - y||_inf
};

/// A x - y in the half-open box [-theta/2, theta/2)^m.
inline ConsistencyReport is_consistent(const DenseMatrix& A, ConstVec x, ConstVec y, double theta) {
    QuantizerConfig{theta}.validate();
    require(x.size() == A.cols() && y.size() == A.rows(), "is_consistent: dimension mismatch");
    ConsistencyReport rep;
    for (double v : y) {
        const double k = (v - theta / 2.0) / theta;
        if (k != std::round(k)) {
            rep.off_lattice = true;
            break;
        }
    }
    const DenseVector Ax = A.multiply(x);
    rep.consistent = true;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = Ax[i] - y[i];
        rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(r));
        if (!(r >= -theta / 2.0 && r < theta / 2.0)) rep.consistent = false;
    }
    return rep;
}

struct QcbpResult {
    SolveResult solve;
    ConsistencyReport consistency;
};

/// Solves the closed-box program (BPDN_inf with eps = theta/2) and reports
/// whether the minimizer it found is quantization consistent. An inconsistent
/// result is returned as is.
inline QcbpResult solve_qcbp(const DenseMatrix& A, ConstVec y, double theta, const SolverConfig& cfg = {}) {
    QuantizerConfig{theta}.validate();
    QcbpResult r;
    r.solve = solve_bpdn(A, y, kInf, theta / 2.0, cfg);
    r.consistency = is_consistent(A, r.solve.estimate, y, theta);
    return r;
}

struct NoiseBound {
    double epsilon = 0.0;
    double probability = 0.0;  ///< 1 - exp(-2 t^2)
};

/// eps_p = theta / (2 (p+1)^{1/p}) * (m + t (p+1) sqrt(m))^{1/p}, the bound on
/// ||e||_p for i.i.d. U[-theta/2, theta/2] errors.
inline NoiseBound high_res_noise_bound(double theta, double p, std::size_t m, double t) {
    QuantizerConfig{theta}.validate();
    require(p >= 1.0, "high_res_noise_bound: p must be >= 1");
    require(std::isfinite(p), "high_res_noise_bound: p = inf has no closed form");
    require(m >= 1, "high_res_noise_bound: m must be >= 1");
    require(t >= 0.0, "high_res_noise_bound: t must be >= 0");
    const double mm = static_cast<double>(m);
    NoiseBound b;
    b.epsilon = theta / (2.0 * std::pow(p + 1.0, 1.0 / p)) * std::pow(mm + t * (p + 1.0) * std::sqrt(mm), 1.0 / p);
    b.probability = 1.0 - std::exp(-2.0 * t * t);
    return b;
}

}  // namespace sparserec
