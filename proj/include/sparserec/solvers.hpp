#pragma once

// lp-constrained basis pursuit:
//
//     minimize ||z||_1  subject to  ||A z - y||_p <= eps
//
// solved with the restarted primal-dual engine in pdhg.hpp.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "core.hpp"
#include "pdhg.hpp"
#include "prox.hpp"

namespace sparserec {

struct OperatorNormEstimate {
    double norm = 0.0;               ///< sqrt of the last Rayleigh quotient
    double rayleigh_quotient = 0.0;  ///< <v, A^T A v> for the final unit iterate v
    int iterations = 0;
};

/// Power iteration on A^T A from the normalized all-ones vector. If that
/// start lies in the null space of a nonzero A, the iteration restarts from
/// the column with the largest norm.
inline OperatorNormEstimate operator_norm(const DenseMatrix& A, int iters) {
    require(iters >= 1, "operator_norm: iters must be >= 1");
    const std::size_t n = A.cols();
    DenseVector v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    DenseVector u(A.rows()), g(n);
    OperatorNormEstimate est;
    bool restarted = false;
    for (int it = 0; it < iters; ++it) {
        A.multiply(v, u);
        est.rayleigh_quotient = dot(u, u);
        est.iterations = it + 1;
        A.multiply_transpose(u, g);
        const double ng = lp_norm(g, 2.0);
        if (ng == 0.0) {
            if (restarted) break;
            restarted = true;
            std::size_t best = 0;
            double best_norm = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double c = 0.0;
                for (std::size_t i = 0; i < A.rows(); ++i) c += A(i, j) * A(i, j);
                if (c > best_norm) {
                    best_norm = c;
                    best = j;
                }
            }
            if (best_norm == 0.0) break;  // zero matrix
            std::fill(v.begin(), v.end(), 0.0);
            v[best] = 1.0;
            continue;
        }
        for (std::size_t j = 0; j < n; ++j) v[j] = g[j] / ng;
    }
    A.multiply(v, u);
    est.rayleigh_quotient = dot(u, u);
    est.norm = std::sqrt(est.rayleigh_quotient);
    return est;
}

enum class SolveStatus { converged, max_iters, infeasible_detected };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::max_iters: return "max_iters";
        case SolveStatus::infeasible_detected: return "infeasible_detected";
    }
    return "?";
}

struct SolverConfig {
    int max_iters = 100000;
    double primal_step = 0.0;  ///< 0 = automatic
    double dual_step = 0.0;    ///< 0 = automatic
    double tol_feas = 1e-8;
    double tol_obj = 1e-7;
    int operator_norm_iters = 200;

    void validate() const {
        require(max_iters >= 1, "SolverConfig: max_iters must be >= 1");
        require(primal_step >= 0.0 && dual_step >= 0.0, "SolverConfig: steps must be >= 0");
        require((primal_step > 0.0) == (dual_step > 0.0), "SolverConfig: set both steps or neither");
        require(tol_feas > 0.0 && tol_obj > 0.0, "SolverConfig: tolerances must be > 0");
        require(operator_norm_iters >= 1, "SolverConfig: operator_norm_iters must be >= 1");
    }

    bool operator==(const SolverConfig&) const = default;
};

struct SolveResult {
    DenseVector estimate;
    SolveStatus status = SolveStatus::max_iters;
    std::size_t iterations = 0;
    double feasibility_residual = 0.0;  ///< max(0, ||A z - y||_p - eps)
    double objective = 0.0;             ///< ||z||_1
    double dual_bound = -kInf;          ///< certified lower bound on the optimum
    std::vector<PdhgDiagnostic> diagnostics;
};

/// Slack added to the power-iteration estimate before deriving step sizes.
inline constexpr double kOperatorNormSafety = 1.01;

namespace detail {

class BpdnProblem {
public:
    BpdnProblem(const DenseMatrix& A, ConstVec y, double p, double eps, double tol_feas)
        : A_(A), y_(y), p_(p), q_(dual_exponent(p)), eps_(eps), tol_feas_(tol_feas), proj_(y.size()) {
        y_norm_ = lp_norm(y, 2.0);
    }

    std::size_t primal_dim() const { return A_.cols(); }
    std::size_t dual_dim() const { return A_.rows(); }

    void prox_primal(ConstVec v, double step, MutVec out) { soft_threshold(v, step, out); }

    /// Moreau: prox_{t g*}(v) = v - t P_B(v / t).
    void prox_dual_conj(ConstVec v, double step, MutVec out) {
        for (std::size_t i = 0; i < v.size(); ++i) proj_[i] = v[i] / step;
        project_ball(proj_, p_, eps_, y_, proj_, scratch_);
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - step * proj_[i];
    }

    double infeasibility(ConstVec Az) const {
        resid_.resize(Az.size());
        for (std::size_t i = 0; i < Az.size(); ++i) resid_[i] = Az[i] - y_[i];
        return std::max(0.0, lp_norm(resid_, p_) - eps_);
    }

    double feasibility_tolerance() const { return tol_feas_ * std::max(1.0, eps_); }

    IterateQuality quality(ConstVec z, ConstVec Az) const {
        IterateQuality q;
        q.objective = lp_norm(z, 1.0);
        q.infeasibility = infeasibility(Az);
        q.feasible = q.infeasibility <= feasibility_tolerance();
        return q;
    }

    /// Lower bound -<w,y> - eps ||w||_{p*} after scaling w into {||A^T w||_inf <= 1}.
    double dual_value(ConstVec w, ConstVec ATw) const {
        const double s = std::max(1.0, lp_norm(ATw, kInf));
        return -(dot(w, y_) + eps_ * lp_norm(w, q_)) / s;
    }

    KktMeasures kkt(ConstVec z, ConstVec Az, ConstVec w, ConstVec ATw) const {
        KktMeasures k;
        DenseVector pz(Az.size());
        DenseVector scratch;
        project_ball(Az, p_, eps_, y_, pz, scratch);
        double pr = 0.0;
        for (std::size_t i = 0; i < Az.size(); ++i) pr += (Az[i] - pz[i]) * (Az[i] - pz[i]);
        k.primal = std::sqrt(pr) / std::max({y_norm_, eps_, std::numeric_limits<double>::min()});

        double dr = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) {
            double d;
            if (z[j] != 0.0)
                d = -ATw[j] - std::copysign(1.0, z[j]);
            else
                d = std::max(0.0, std::abs(ATw[j]) - 1.0);
            dr += d * d;
        }
        k.dual = std::sqrt(dr / static_cast<double>(z.size()));

        const double obj = lp_norm(z, 1.0);
        k.dual_bound = dual_value(w, ATw);
        k.gap = std::abs(obj - k.dual_bound) /
                std::max({std::abs(obj), std::abs(k.dual_bound), std::numeric_limits<double>::min()});
        return k;
    }

    double optimality_error(const KktMeasures&, double best_obj, double best_dual) const {
        const double scale = std::max(std::abs(best_obj), std::numeric_limits<double>::min());
        return std::max(0.0, best_obj - best_dual) / scale;
    }

    double initial_primal_weight() const {
        const double b = std::max(y_norm_, eps_);
        return b > 0.0 ? std::sqrt(static_cast<double>(A_.cols())) / b : 1.0;
    }

    void initial_point(MutVec z) const { std::fill(z.begin(), z.end(), 0.0); }

    /// Farkas-type check: a direction d with A^T d ~ 0 and
    /// sup_{b in B} <d, b> < 0 proves {z : Az in B} empty.
    bool infeasibility_certificate(ConstVec d) const {
        const double nd = lp_norm(d, 2.0);
        if (!(nd > 0.0) || !std::isfinite(nd)) return false;
        DenseVector ATd = A_.multiply_transpose(d);
        const double L = std::max(norm_hint_, std::numeric_limits<double>::min());
        if (lp_norm(ATd, 2.0) > 1e-6 * L * nd) return false;
        for (double sgn : {1.0, -1.0}) {
            const double support = sgn * dot(d, y_) + eps_ * lp_norm(d, q_);
            if (support < -1e-6 * nd * std::max(y_norm_, 1.0)) return true;
        }
        return false;
    }

    void set_norm_hint(double L) { norm_hint_ = L; }

private:
    const DenseMatrix& A_;
    ConstVec y_;
    double p_, q_, eps_, tol_feas_;
    double y_norm_ = 0.0;
    double norm_hint_ = 1.0;
    DenseVector proj_;
    DenseVector scratch_;
    mutable DenseVector resid_;
};

inline void validate_bpdn_inputs(const DenseMatrix& A, ConstVec y, double p, double eps) {
    require(y.size() == A.rows(), "solve_bpdn: y has dimension " + std::to_string(y.size()) + ", A has " +
                                      std::to_string(A.rows()) + " rows");
    require(eps >= 0.0 && std::isfinite(eps), "solve_bpdn: epsilon must be finite and >= 0");
    require(p >= 1.0 && (std::isinf(p) || p <= kMaxFiniteBallExponent), "solve_bpdn: p must lie in [1,128] or be inf");
    require_finite(y, "solve_bpdn y");
}

}  // namespace detail

inline SolveResult solve_bpdn(const DenseMatrix& A, ConstVec y, double p, double epsilon,
                              const SolverConfig& cfg = {}) {
    detail::validate_bpdn_inputs(A, y, p, epsilon);
    cfg.validate();

    detail::BpdnProblem prob(A, y, p, epsilon, cfg.tol_feas);
    const double L = kOperatorNormSafety * operator_norm(A, cfg.operator_norm_iters).norm;
    prob.set_norm_hint(L);

    PdhgOptions opt;
    opt.max_iters = static_cast<std::size_t>(cfg.max_iters);
    opt.operator_norm = L;
    opt.fixed_tau = cfg.primal_step;
    opt.fixed_sigma = cfg.dual_step;
    opt.tol = cfg.tol_obj;
    opt.half_snapshot = opt.max_iters / 2;
    PdhgOutcome run = pdhg_solve(prob, A, opt);

    SolveResult res;
    res.iterations = run.iterations;
    res.diagnostics = std::move(run.history);
    res.dual_bound = run.best_dual_bound;
    if (run.have_best) {
        res.estimate = std::move(run.best_z);
        res.status = run.converged ? SolveStatus::converged : SolveStatus::max_iters;
    } else {
        res.estimate = std::move(run.last_z);
        DenseVector d(run.last_w.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = run.last_w[i] - run.snapshot_w[i];
        res.status = prob.infeasibility_certificate(d) ? SolveStatus::infeasible_detected : SolveStatus::max_iters;
    }
    res.objective = lp_norm(res.estimate, 1.0);
    res.feasibility_residual = prob.infeasibility(A.multiply(res.estimate));
    return res;
}

/// l_inf-constrained basis pursuit through the l_{log m} relaxation:
/// ||r||_inf <= ||r||_{log m} <= e ||r||_inf on R^m, so the program is solved
/// with p = log m and radius e * eps.
inline SolveResult solve_bpdn_inf_via_logm(const DenseMatrix& A, ConstVec y, double epsilon,
                                           const SolverConfig& cfg = {}) {
    require(A.rows() >= 3, "solve_bpdn_inf_via_logm: needs m >= 3");
    const double p = std::log(static_cast<double>(A.rows()));
    return solve_bpdn(A, y, p, std::numbers::e * epsilon, cfg);
}

}  // namespace sparserec
