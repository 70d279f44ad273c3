#pragma once

// Certifiers and Monte Carlo estimators for recovery conditions: the robust
// null space property (q = 1), the cone infimum inf ||Ax||_p over
// T_{rho,s}^q on the lq sphere, RIP_{p,q} constants, small-ball
// probabilities, Rademacher suprema and the small-ball lower bound chain.

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "ensembles.hpp"
#include "pdhg.hpp"
#include "prox.hpp"
#include "rng.hpp"
#include "solvers.hpp"

namespace sparserec {

/// Point estimate with a normal-approximation 95% half-width.
struct MonteCarloEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double half_width = 0.0;
    std::size_t samples = 0;
};

inline MonteCarloEstimate summarize_samples(ConstVec xs) {
    MonteCarloEstimate e;
    e.samples = xs.size();
    if (xs.empty()) return e;
    const double n = static_cast<double>(xs.size());
    e.value = pairwise_sum(xs) / n;
    if (xs.size() > 1) {
        DenseVector dev(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) dev[i] = (xs[i] - e.value) * (xs[i] - e.value);
        e.std_error = std::sqrt(pairwise_sum(dev) / (n - 1.0) / n);
    }
    e.half_width = 1.96 * e.std_error;
    return e;
}

// ---------------------------------------------------------------------------
// Null space property, q = 1

enum class NspVerdict { certified, refuted, inconclusive };

inline const char* to_string(NspVerdict v) {
    switch (v) {
        case NspVerdict::certified: return "certified";
        case NspVerdict::refuted: return "refuted";
        case NspVerdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct SubproblemMargin {
    std::size_t support_id = 0;
    std::size_t sign_id = 0;  ///< bit k set <=> sign -1 on the k-th support index
    double margin = 0.0;
    bool converged = false;
};

struct NspCertificate {
    double q = 1.0;
    std::size_t s = 1;
    double rho = 0.5;
    double tau = 1.0;
    double norm_p = 2.0;
    NspVerdict verdict = NspVerdict::inconclusive;
    double worst_margin = -kInf;
    std::optional<DenseVector> witness;
    double tolerance = 1e-6;
    std::string reason;
    std::vector<SubproblemMargin> margins;
};

struct NspOptions {
    /// Use tau/m^{1/p} on ||Ax||_p (default) or the raw tau.
    bool normalize_by_m = true;
    int max_iters = 20000;
    double max_subproblems = 1e6;
};

namespace detail {

/// min  rho ||x_{S^c}||_1 + c ||A x||_p   s.t.  sigma^T x_S = 1
class NspSubproblem {
public:
    NspSubproblem(const DenseMatrix& A, const std::vector<std::size_t>& support, const DenseVector& signs,
                  double rho, double c, double p, double norm_hint)
        : A_(A), support_(support), signs_(signs), rho_(rho), c_(c), p_(p), pstar_(dual_exponent(p)),
          L_(norm_hint), in_s_(A.cols(), 0), zero_(A.rows(), 0.0) {
        for (std::size_t k = 0; k < support_.size(); ++k) in_s_[support_[k]] = static_cast<int>(k) + 1;
    }

    std::size_t primal_dim() const { return A_.cols(); }
    std::size_t dual_dim() const { return A_.rows(); }

    void prox_primal(ConstVec v, double step, MutVec out) {
        double proj = 0.0;
        for (std::size_t k = 0; k < support_.size(); ++k) proj += signs_[k] * v[support_[k]];
        const double shift = (1.0 - proj) / static_cast<double>(support_.size());
        for (std::size_t j = 0; j < v.size(); ++j) {
            if (in_s_[j]) {
                out[j] = v[j] + signs_[in_s_[j] - 1] * shift;
            } else {
                const double a = std::abs(v[j]) - step * rho_;
                out[j] = a > 0.0 ? std::copysign(a, v[j]) : 0.0;
            }
        }
    }

    /// h* is the indicator of the radius-c ball of the dual norm.
    void prox_dual_conj(ConstVec v, double, MutVec out) { project_ball(v, pstar_, c_, zero_, out, scratch_); }

    double objective(ConstVec z, ConstVec Az) const {
        double tail = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j)
            if (!in_s_[j]) tail += std::abs(z[j]);
        return rho_ * tail + c_ * lp_norm(Az, p_);
    }

    IterateQuality quality(ConstVec z, ConstVec Az) const { return {objective(z, Az), 0.0, true}; }

    KktMeasures kkt(ConstVec z, ConstVec Az, ConstVec w, ConstVec ATw) const {
        KktMeasures k;
        double dr = 0.0;
        double along = 0.0;
        for (std::size_t kk = 0; kk < support_.size(); ++kk) along += -ATw[support_[kk]] * signs_[kk];
        along /= static_cast<double>(support_.size());
        for (std::size_t j = 0; j < z.size(); ++j) {
            double d;
            if (in_s_[j]) {
                d = -ATw[j] - along * signs_[in_s_[j] - 1];
            } else if (z[j] != 0.0) {
                d = -ATw[j] - rho_ * std::copysign(1.0, z[j]);
            } else {
                d = std::max(0.0, std::abs(ATw[j]) - rho_);
            }
            dr += d * d;
        }
        dual_abs_ = std::sqrt(dr);
        z_norm_ = lp_norm(z, 2.0);
        gap_abs_ = std::abs(c_ * lp_norm(Az, p_) - dot(w, Az));
        const double scale = std::max(rho_, c_ * L_);
        k.dual = dual_abs_ / (scale * std::sqrt(static_cast<double>(z.size())));
        k.gap = gap_abs_ / std::max(objective(z, Az), 1e-12);
        k.primal = 0.0;
        return k;
    }

    /// F(z) - F* <= FY-gap + ||dual residual|| * ||x* - z||, with ||z|| standing
    /// in for the unknown distance.
    double optimality_error(const KktMeasures&, double, double) const {
        return gap_abs_ + dual_abs_ * std::max(z_norm_, 1.0);
    }

    double initial_primal_weight() const { return 1.0 / std::max(c_ * L_, rho_); }

    void initial_point(MutVec z) const {
        std::fill(z.begin(), z.end(), 0.0);
        for (std::size_t k = 0; k < support_.size(); ++k)
            z[support_[k]] = signs_[k] / static_cast<double>(support_.size());
    }

private:
    const DenseMatrix& A_;
    const std::vector<std::size_t>& support_;
    const DenseVector& signs_;
    double rho_, c_, p_, pstar_, L_;
    std::vector<int> in_s_;
    DenseVector zero_;
    DenseVector scratch_;
    mutable double dual_abs_ = 0.0, gap_abs_ = 0.0, z_norm_ = 0.0;
};

inline double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

/// Advances a sorted index set to the next k-combination of [0, n).
inline bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
    const std::size_t k = c.size();
    for (std::size_t i = k; i-- > 0;) {
        if (c[i] < n - k + i) {
            ++c[i];
            for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
            return true;
        }
    }
    return false;
}

}  // namespace detail

/// NSP margin of x for support S: ||x_S||_1 - rho ||x_{S^c}||_1 - c ||Ax||_p.
inline double nsp_violation(const DenseMatrix& A, ConstVec x, const std::vector<std::size_t>& support, double rho,
                            double c, double p) {
    std::vector<char> in_s(x.size(), 0);
    double head = 0.0, tail = 0.0;
    for (std::size_t j : support) {
        in_s[j] = 1;
        head += std::abs(x[j]);
    }
    for (std::size_t j = 0; j < x.size(); ++j)
        if (!in_s[j]) tail += std::abs(x[j]);
    return head - rho * tail - c * lp_norm(A.multiply(x), p);
}

/// Robust NSP of order s for q = 1:
///   ||x_S||_1 <= rho ||x_{S^c}||_1 + c ||Ax||_p,  c = tau / m^{1/p}.
///
/// For each support S and sign pattern sigma, the convex program
///   v(S, sigma) = min rho ||x_{S^c}||_1 + c ||Ax||_p  s.t.  sigma^T x_S = 1
/// is solved; the property holds iff every v >= 1. The reported margin of a
/// subproblem is 1 - v. Patterns sigma and -sigma share a value, so only
/// sigma_0 = +1 is solved.
inline NspCertificate certify_nsp_q1(const DenseMatrix& A, std::size_t s, double rho, double tau, double p, double tol,
                                     const NspOptions& opts = {}) {
    const std::size_t n = A.cols();
    require(s >= 1 && s <= n, "certify_nsp_q1: need 1 <= s <= n");
    require(rho > 0.0 && rho < 1.0, "certify_nsp_q1: rho must lie in (0,1)");
    require(tau > 0.0, "certify_nsp_q1: tau must be > 0");
    require(tol > 0.0, "certify_nsp_q1: tol must be > 0");
    require(p >= 1.0 && (std::isinf(p) || p <= kMaxFiniteBallExponent), "certify_nsp_q1: unsupported p");

    NspCertificate cert;
    cert.s = s;
    cert.rho = rho;
    cert.tau = tau;
    cert.norm_p = p;
    cert.tolerance = tol;

    const double count = detail::binomial(n, s) * std::pow(2.0, static_cast<double>(s));
    if (count > opts.max_subproblems) {
        cert.verdict = NspVerdict::inconclusive;
        cert.reason = "enumeration guard exceeded: " + std::to_string(count) + " subproblems";
        return cert;
    }

    const double m_scale = std::isinf(p) ? 1.0 : std::pow(static_cast<double>(A.rows()), 1.0 / p);
    const double c = opts.normalize_by_m ? tau / m_scale : tau;
    const double L = kOperatorNormSafety * operator_norm(A, 200).norm;

    PdhgOptions po;
    po.max_iters = static_cast<std::size_t>(opts.max_iters);
    po.operator_norm = L > 0.0 ? L : 1.0;
    po.tol = 0.01 * tol;

    std::vector<std::size_t> support(s);
    for (std::size_t k = 0; k < s; ++k) support[k] = k;
    DenseVector signs(s);
    bool all_converged = true;
    std::size_t support_id = 0;
    const std::size_t half = std::size_t{1} << (s - 1);
    do {
        for (std::size_t sign_id = 0; sign_id < half; ++sign_id) {
            for (std::size_t k = 0; k < s; ++k) signs[k] = (sign_id >> k) & 1 ? -1.0 : 1.0;
            detail::NspSubproblem prob(A, support, signs, rho, c, p, po.operator_norm);
            PdhgOutcome run = pdhg_solve(prob, A, po);
            const double margin = 1.0 - run.best_objective;
            all_converged = all_converged && run.converged;
            const std::size_t mirrored = sign_id ^ ((std::size_t{1} << s) - 1);
            cert.margins.push_back({support_id, sign_id, margin, run.converged});
            cert.margins.push_back({support_id, mirrored, margin, run.converged});
            if (margin > cert.worst_margin) {
                cert.worst_margin = margin;
                cert.witness = run.best_z;  // sigma^T x_S = 1, so its violation equals the margin
            }
        }
        ++support_id;
    } while (detail::next_combination(support, n));

    // Witness sign patterns are emitted in pairs; keep the list ordered.
    std::stable_sort(cert.margins.begin(), cert.margins.end(), [](const auto& a, const auto& b) {
        return a.support_id != b.support_id ? a.support_id < b.support_id : a.sign_id < b.sign_id;
    });

    if (cert.worst_margin > tol) {
        cert.verdict = NspVerdict::refuted;
    } else if (cert.worst_margin <= -tol && all_converged) {
        cert.verdict = NspVerdict::certified;
    } else {
        cert.verdict = NspVerdict::inconclusive;
        cert.reason = all_converged ? "worst margin within tolerance of zero" : "subproblem did not converge";
        if (!(cert.worst_margin > tol)) cert.witness.reset();
    }
    if (cert.verdict == NspVerdict::certified) cert.witness.reset();
    return cert;
}

// ---------------------------------------------------------------------------
// Cone infimum

struct ConeInfimumEstimate {
    double value = kInf;          ///< best ||Ax||_p found on T cap S_q: an upper bound on the infimum
    DenseVector witness;
    double best_start_value = kInf;  ///< min over the start points alone
    std::size_t starts = 0;
};

namespace detail {

inline void lp_norm_gradient(ConstVec r, double p, MutVec g) {
    const double nr = lp_norm(r, p);
    std::fill(g.begin(), g.end(), 0.0);
    if (nr == 0.0) return;
    if (std::isinf(p)) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < r.size(); ++i)
            if (std::abs(r[i]) > std::abs(r[arg])) arg = i;
        g[arg] = std::copysign(1.0, r[arg]);
    } else if (p == 1.0) {
        for (std::size_t i = 0; i < r.size(); ++i) g[i] = r[i] == 0.0 ? 0.0 : std::copysign(1.0, r[i]);
    } else {
        for (std::size_t i = 0; i < r.size(); ++i)
            g[i] = std::copysign(std::pow(std::abs(r[i]) / nr, p - 1.0), r[i]);
    }
}

inline bool normalize_q(MutVec x, double q) {
    const double nx = lp_norm(x, q);
    if (!(nx > 0.0)) return false;
    for (double& v : x) v /= nx;
    return true;
}

/// Normalized-subgradient descent of ||Ax||_p with renormalization onto the
/// lq sphere; steps leaving the admissible set are rejected. `mask` (if
/// nonempty) pins the support.
inline double cone_local_search(const DenseMatrix& A, const ConeParams& cp, double p, DenseVector& x,
                                const std::vector<char>& mask, int iters) {
    const std::size_t n = x.size();
    DenseVector Ax = A.multiply(x), g(A.rows()), grad(n), cand(n);
    double f = lp_norm(Ax, p);
    double step = 0.1;
    for (int it = 0; it < iters && step > 1e-10; ++it) {
        lp_norm_gradient(Ax, p, g);
        A.multiply_transpose(g, grad);
        if (!mask.empty())
            for (std::size_t j = 0; j < n; ++j)
                if (!mask[j]) grad[j] = 0.0;
        const double ng = lp_norm(grad, 2.0);
        if (ng == 0.0) break;
        for (std::size_t j = 0; j < n; ++j) cand[j] = x[j] - step * grad[j] / ng;
        if (!normalize_q(cand, cp.q)) {
            step *= 0.5;
            continue;
        }
        if (mask.empty() && !cone_membership(cand, cp).member) {
            step *= 0.5;
            continue;
        }
        const DenseVector Ac = A.multiply(cand);
        const double fc = lp_norm(Ac, p);
        if (fc < f) {
            x = cand;
            Ax = Ac;
            f = fc;
            step *= 1.2;
        } else {
            step *= 0.5;
        }
    }
    return f;
}

}  // namespace detail

struct ConeSearchOptions {
    bool sparse_only = false;  ///< restrict to s-sparse points (a subset of the cone)
    int iters = 300;
};

/// Multi-start local minimization of ||Ax||_p over T_{rho,s}^q cap S_{lq}.
/// The full-cone search first runs the identical sparse-only search and then
/// continues from its minimizers and from perturbed near-sparse starts, so its
/// value never exceeds the sparse-only value for the same seed.
inline ConeInfimumEstimate cone_infimum_estimate(const DenseMatrix& A, const ConeParams& cp, double p, int restarts,
                                                 std::uint64_t seed, const ConeSearchOptions& opts = {}) {
    const std::size_t n = A.cols();
    cp.validate(n);
    require(restarts >= 1, "cone_infimum_estimate: restarts must be >= 1");
    require(p >= 1.0, "cone_infimum_estimate: p must be >= 1");

    RngStream rng(seed);
    ConeInfimumEstimate est;
    std::vector<DenseVector> sparse_results;
    auto record = [&](const DenseVector& x, double f) {
        if (f < est.value) {
            est.value = f;
            est.witness = x;
        }
    };

    for (int r = 0; r < restarts; ++r) {
        DenseVector x(n, 0.0);
        std::vector<char> mask(n, 0);
        std::size_t placed = 0;
        while (placed < cp.s) {
            const auto j = static_cast<std::size_t>(rng.below(n));
            if (mask[j]) continue;
            mask[j] = 1;
            x[j] = rng.normal();
            ++placed;
        }
        if (!detail::normalize_q(x, cp.q)) x[0] = 1.0;
        const double f0 = lp_norm(A.multiply(x), p);
        est.best_start_value = std::min(est.best_start_value, f0);
        record(x, f0);
        ++est.starts;
        const double f = detail::cone_local_search(A, cp, p, x, mask, opts.iters);
        record(x, f);
        sparse_results.push_back(x);
    }
    if (opts.sparse_only) return est;

    RngStream extra = rng.substream(1);
    for (DenseVector& x : sparse_results) {
        const double f = detail::cone_local_search(A, cp, p, x, {}, opts.iters);
        record(x, f);

        // Near-sparse start: the sparse minimizer plus a small dense perturbation.
        DenseVector y = x;
        for (double& v : y) v += 0.05 * extra.normal() / std::sqrt(static_cast<double>(n));
        if (!detail::normalize_q(y, cp.q) || !cone_membership(y, cp).member) continue;
        const double fy0 = lp_norm(A.multiply(y), p);
        est.best_start_value = std::min(est.best_start_value, fy0);
        record(y, fy0);
        ++est.starts;
        const double fy = detail::cone_local_search(A, cp, p, y, {}, opts.iters);
        record(y, fy);
    }
    return est;
}

// ---------------------------------------------------------------------------
// RIP_{p,q}

enum class RipMethod { monte_carlo, local_search };

struct RipEstimate {
    double p = 2.0, q = 2.0;
    std::size_t s = 1;
    double c_lower_est = kInf;   ///< smallest ratio found (>= true c)
    double C_upper_est = 0.0;    ///< largest ratio found (<= true C)
    std::size_t samples = 0;     ///< number of vectors evaluated
    RipMethod method = RipMethod::monte_carlo;
    DenseVector argmin, argmax;
};

/// Ratio ||Ax||_p / ||x||_q.
inline double rip_ratio(const DenseMatrix& A, ConstVec x, double p, double q) {
    return lp_norm(A.multiply(x), p) / lp_norm(x, q);
}

/// Evaluates random s-sparse vectors (random support, Gaussian entries), every
/// e_i, and the flat vectors 1_S on each sampled support; then refines both
/// extremes by support-preserving random perturbation.
inline RipEstimate rip_pq_estimate(const DenseMatrix& A, std::size_t s, double p, double q, std::size_t samples,
                                   std::uint64_t seed, int refine_steps = 200) {
    const std::size_t n = A.cols();
    require(s >= 1 && s <= n, "rip_pq_estimate: need 1 <= s <= n");
    require(samples >= 1, "rip_pq_estimate: samples must be >= 1");
    require(p >= 1.0 && q >= 1.0, "rip_pq_estimate: p, q must be >= 1");

    RipEstimate est;
    est.p = p;
    est.q = q;
    est.s = s;
    auto consider = [&](const DenseVector& x) {
        const double r = rip_ratio(A, x, p, q);
        ++est.samples;
        if (r < est.c_lower_est) {
            est.c_lower_est = r;
            est.argmin = x;
        }
        if (r > est.C_upper_est) {
            est.C_upper_est = r;
            est.argmax = x;
        }
    };

    for (std::size_t i = 0; i < n; ++i) {
        DenseVector e(n, 0.0);
        e[i] = 1.0;
        consider(e);
    }
    RngStream rng(seed);
    for (std::size_t k = 0; k < samples; ++k) {
        DenseVector x(n, 0.0), flat(n, 0.0);
        std::size_t placed = 0;
        while (placed < s) {
            const auto j = static_cast<std::size_t>(rng.below(n));
            if (flat[j] != 0.0) continue;
            flat[j] = 1.0;
            x[j] = rng.normal();
            ++placed;
        }
        consider(x);
        consider(flat);
    }

    if (refine_steps > 0) {
        est.method = RipMethod::local_search;
        RngStream walk = rng.substream(7);
        for (int dir : {-1, +1}) {
            DenseVector x = dir < 0 ? est.argmin : est.argmax;
            double best = rip_ratio(A, x, p, q);
            double step = 0.3;
            for (int it = 0; it < refine_steps; ++it) {
                DenseVector cand = x;
                for (std::size_t j = 0; j < n; ++j)
                    if (cand[j] != 0.0) cand[j] += step * walk.normal() * std::abs(cand[j]);
                if (lp_norm(cand, q) == 0.0) continue;
                const double r = rip_ratio(A, cand, p, q);
                ++est.samples;
                if ((dir < 0 && r < best) || (dir > 0 && r > best)) {
                    best = r;
                    x = cand;
                } else {
                    step *= 0.97;
                }
            }
            consider(x);
            --est.samples;
        }
    }
    return est;
}

struct GapDemo {
    double ratio_of_means = 0.0;   ///< mean ||A e_1||_1 / mean ||A x~||_1
    MonteCarloEstimate mean_ratio;  ///< per-draw ratio statistics
    double expected = 0.0;          ///< sqrt(s)
};

/// Compares ||A e_1||_1 with ||A x~||_1, x~ = s^{-1} sum_{i<=s} e_i, for
/// Gaussian A. Only the first s columns enter, so an m x s matrix is drawn
/// per trial. The means are m sqrt(2/pi) and m sqrt(2/(pi s)).
inline GapDemo rip11_gap_demo(std::size_t m, std::size_t s, std::size_t trials, std::uint64_t seed) {
    require(m >= 1 && s >= 1 && trials >= 1, "rip11_gap_demo: m, s, trials must be >= 1");
    RngStream rng(seed);
    DenseVector num(trials), den(trials), ratio(trials);
    DenseVector row(s);
    DenseVector col1(m), mix(m);
    for (std::size_t t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (double& v : row) {
                v = rng.normal();
                acc += v;
            }
            col1[i] = std::abs(row[0]);
            mix[i] = std::abs(acc / static_cast<double>(s));
        }
        num[t] = pairwise_sum(col1);
        den[t] = pairwise_sum(mix);
        ratio[t] = num[t] / den[t];
    }
    GapDemo g;
    g.ratio_of_means = pairwise_sum(num) / pairwise_sum(den);
    g.mean_ratio = summarize_samples(ratio);
    g.expected = std::sqrt(static_cast<double>(s));
    return g;
}

// ---------------------------------------------------------------------------
// Small-ball method

/// Empirical P(|<X, x>| >= u) over i.i.d. rows X; x is normalized internally.
inline MonteCarloEstimate small_ball_estimate(const EnsembleSpec& spec, ConstVec x, double u, std::size_t trials,
                                              std::uint64_t seed) {
    require(x.size() == spec.n, "small_ball_estimate: x dimension differs from spec.n");
    require(trials >= 1, "small_ball_estimate: trials must be >= 1");
    spec.validate();
    const double nx = lp_norm(x, 2.0);
    require(nx > 0.0, "small_ball_estimate: x must be nonzero");
    DenseVector xn(x.begin(), x.end());
    for (double& v : xn) v /= nx;

    RngStream rng(seed);
    DenseVector row(spec.n), hits(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        sample_row(spec, rng, row);
        hits[t] = std::abs(dot(row, xn)) >= u ? 1.0 : 0.0;
    }
    MonteCarloEstimate e;
    e.samples = trials;
    e.value = pairwise_sum(hits) / static_cast<double>(trials);
    e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(trials));
    e.half_width = 1.96 * e.std_error;
    return e;
}

/// l2 norm of the s largest |v_i|: sup over unit-l2 s-sparse x of <v, x>.
inline double top_s_l2(ConstVec v, std::size_t s) {
    const DenseVector r = rearrangement(v);
    double acc = 0.0;
    for (std::size_t i = 0; i < s; ++i) acc += r[i] * r[i];
    return std::sqrt(acc);
}

/// E sup_{x in Sigma_s^2} <V, x> with V = m^{-1/2} sum_i eps_i X_i, drawing
/// fresh rows and signs per trial.
inline MonteCarloEstimate rademacher_sup_estimate(const EnsembleSpec& spec, std::size_t m, std::size_t s,
                                                  std::size_t trials, std::uint64_t seed) {
    require(s >= 1 && s <= spec.n, "rademacher_sup_estimate: need 1 <= s <= n");
    require(m >= 1 && trials >= 1, "rademacher_sup_estimate: m, trials must be >= 1");
    spec.validate();
    RngStream rng(seed);
    DenseVector row(spec.n), V(spec.n), stats(trials);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (std::size_t t = 0; t < trials; ++t) {
        std::fill(V.begin(), V.end(), 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            sample_row(spec, rng, row);
            const double eps = rng.sign();
            for (std::size_t j = 0; j < spec.n; ++j) V[j] += eps * row[j];
        }
        for (double& v : V) v *= scale;
        stats[t] = top_s_l2(V, s);
    }
    return summarize_samples(stats);
}

/// sqrt(2 s log(e n / s)) + sqrt(s), an upper bound on the Gaussian width of Sigma_s^2.
inline double gaussian_width_bound(std::size_t n, std::size_t s) {
    require(s >= 1 && s <= n, "gaussian_width_bound: need 1 <= s <= n");
    const double ss = static_cast<double>(s);
    return std::sqrt(2.0 * ss * std::log(std::numbers::e * static_cast<double>(n) / ss)) + std::sqrt(ss);
}

struct KomBound {
    double value = 0.0;                ///< u^p (Q(2u) - 4 R_m / u - t / sqrt(m)); <= 0 is vacuous
    double failure_probability = 0.0;  ///< 2 exp(-2 t^2)
};

inline KomBound kom13_lower_bound(double u, double p, double Q2u, double Rm, double t, std::size_t m) {
    require(u > 0.0, "kom13_lower_bound: u must be > 0");
    require(p >= 1.0 && std::isfinite(p), "kom13_lower_bound: p must be finite and >= 1");
    require(Q2u >= 0.0 && Q2u <= 1.0, "kom13_lower_bound: Q must lie in [0,1]");
    require(Rm >= 0.0 && t >= 0.0 && m >= 1, "kom13_lower_bound: need Rm >= 0, t >= 0, m >= 1");
    KomBound b;
    b.value = std::pow(u, p) * (Q2u - 4.0 * Rm / u - t / std::sqrt(static_cast<double>(m)));
    b.failure_probability = 2.0 * std::exp(-2.0 * t * t);
    return b;
}

struct PipelineOptions {
    double p = 2.0;
    double eta = 0.05;                 ///< target failure probability; t = sqrt(log(2/eta)/2)
    double small_ball_target = 0.55;   ///< u_* solves P(|g| >= 2 u_*) = target
    std::size_t width_trials = 50;
    std::size_t small_ball_trials = 20000;
};

struct PipelineReport {
    MonteCarloEstimate width;          ///< E sup_{Sigma_s^2} <V, x>, Gaussian rows
    double width_bound = 0.0;          ///< closed-form upper bound on the width
    double cone_factor = 0.0;          ///< s^{1/2-1/q} (2 + 1/rho)
    double rademacher_bound = 0.0;     ///< bound on R_m(F) from the upper width confidence limit
    double u_star = 0.0;
    MonteCarloEstimate small_ball;     ///< Q_F(2 u_*) estimate
    double t = 0.0;
    KomBound bound;
    bool positive = false;
};

/// Composes the small-ball argument for Gaussian matrices at (n, s, m):
/// R_m(F) <= s^{1/2-1/q} (2 + 1/rho) m^{-1/2} w(Sigma_s^2), the Gaussian
/// small-ball probability at 2 u_*, and the resulting lower bound on
/// inf (1/m) sum |<X_i, x>|^p over the cone.
inline PipelineReport pipeline_check_theorem3(std::size_t n, std::size_t s, double q, double rho, std::size_t m,
                                              std::uint64_t seed, const PipelineOptions& opts = {}) {
    require(s >= 1 && s <= n, "pipeline_check_theorem3: need 1 <= s <= n");
    require(q >= 1.0 && std::isfinite(q), "pipeline_check_theorem3: q must be finite and >= 1");
    require(rho > 0.0 && rho < 1.0, "pipeline_check_theorem3: rho must lie in (0,1)");
    require(m >= 1, "pipeline_check_theorem3: m must be >= 1");
    require(opts.eta > 0.0 && opts.eta < 1.0, "pipeline_check_theorem3: eta must lie in (0,1)");
    require(opts.small_ball_target > 0.0 && opts.small_ball_target < 1.0,
            "pipeline_check_theorem3: small_ball_target must lie in (0,1)");

    PipelineReport rep;
    const EnsembleSpec gauss{EnsembleKind::gaussian, 6.0, m, n, seed};
    rep.width = rademacher_sup_estimate(gauss, m, s, opts.width_trials, derive_seed(seed, 1));
    rep.width_bound = gaussian_width_bound(n, s);
    const double ss = static_cast<double>(s);
    rep.cone_factor = std::pow(ss, 0.5 - 1.0 / q) * (2.0 + 1.0 / rho);
    rep.rademacher_bound =
        rep.cone_factor * (rep.width.value + rep.width.half_width) / std::sqrt(static_cast<double>(m));

    // P(|g| >= a) = target  <=>  a = sqrt(2) erf^{-1}(1 - target)
    rep.u_star = 0.5 * std::sqrt(2.0) * boost::math::erf_inv(1.0 - opts.small_ball_target);
    DenseVector direction(n, 1.0);
    rep.small_ball = small_ball_estimate(gauss, direction, 2.0 * rep.u_star, opts.small_ball_trials,
                                         derive_seed(seed, 2));
    rep.t = std::sqrt(std::log(2.0 / opts.eta) / 2.0);
    rep.bound = kom13_lower_bound(rep.u_star, opts.p, rep.small_ball.value, rep.rademacher_bound, rep.t, m);
    rep.positive = rep.bound.value > 0.0;
    return rep;
}

}  // namespace sparserec
