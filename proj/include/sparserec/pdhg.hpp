#pragma once

// Restarted primal-dual hybrid gradient (Chambolle-Pock) engine for
//
//     minimize  f(z) + g(A z)
//
// The problem type supplies prox_{t f}, prox_{t g*}, iterate quality and
// KKT-style residuals; the engine owns step sizes, adaptive restarts to the
// running average, primal-weight balancing, best-iterate tracking and
// termination.
//
// Problem interface:
//   std::size_t primal_dim() const;  std::size_t dual_dim() const;
//   void prox_primal(ConstVec v, double step, MutVec out);
//   void prox_dual_conj(ConstVec v, double step, MutVec out);
//   IterateQuality quality(ConstVec z, ConstVec Az) const;
//   KktMeasures kkt(ConstVec z, ConstVec Az, ConstVec w, ConstVec ATw) const;
//   double optimality_error(const KktMeasures&, double best_obj, double best_dual_bound) const;
//   double initial_primal_weight() const;
//   void initial_point(MutVec z) const;

#include <cmath>
#include <limits>
#include <vector>

#include "core.hpp"

namespace sparserec {

struct IterateQuality {
    double objective = 0.0;
    double infeasibility = 0.0;
    bool feasible = false;
};

struct KktMeasures {
    double primal = 0.0;  ///< relative primal residual
    double dual = 0.0;    ///< relative dual residual
    double gap = 0.0;     ///< relative complementarity / duality gap
    double dual_bound = -kInf;  ///< valid lower bound on the optimum, or -inf
    double norm() const { return std::sqrt(primal * primal + dual * dual + gap * gap); }
};

struct PdhgDiagnostic {
    std::size_t iteration = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    double best_objective = kInf;
};

struct PdhgOptions {
    std::size_t max_iters = 100000;
    double operator_norm = 1.0;  ///< an (approximate) upper bound on ||A||
    double fixed_tau = 0.0;      ///< > 0 together with fixed_sigma disables adaptivity
    double fixed_sigma = 0.0;
    double tol = 1e-7;           ///< threshold on Problem::optimality_error
    std::size_t restart_check = 50;
    std::size_t window = 100;
    std::size_t half_snapshot = 0;  ///< iteration at which the dual iterate is snapshotted
};

struct PdhgOutcome {
    DenseVector best_z;
    bool have_best = false;
    double best_objective = kInf;
    double best_infeasibility = kInf;
    double best_dual_bound = -kInf;
    DenseVector last_z;
    DenseVector last_w;
    DenseVector snapshot_w;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t restarts = 0;
    std::vector<PdhgDiagnostic> history;
};

template <class Problem>
PdhgOutcome pdhg_solve(Problem& prob, const DenseMatrix& A, const PdhgOptions& opt) {
    const std::size_t n = prob.primal_dim();
    const std::size_t m = prob.dual_dim();
    constexpr double kStepFraction = 0.95;

    const bool fixed = opt.fixed_tau > 0.0 && opt.fixed_sigma > 0.0;
    const double L = opt.operator_norm > 0.0 ? opt.operator_norm : 1.0;
    double omega = prob.initial_primal_weight();
    double tau = fixed ? opt.fixed_tau : kStepFraction / (omega * L);
    double sigma = fixed ? opt.fixed_sigma : kStepFraction * omega / L;

    DenseVector z(n), Az(m), w(m, 0.0), ATw(n, 0.0);
    prob.initial_point(z);
    A.multiply(z, Az);

    DenseVector z_new(n), Az_new(m), w_new(m), ATw_new(n), tmp_n(n), tmp_m(m);
    DenseVector zsum(n, 0.0), Azsum(m, 0.0), wsum(m, 0.0), ATwsum(n, 0.0);
    DenseVector z_avg(n), Az_avg(m), w_avg(m), ATw_avg(n);
    DenseVector z_anchor = z, w_anchor = w;
    std::size_t avg_count = 0;
    std::size_t last_restart = 0;

    PdhgOutcome out;
    out.snapshot_w = w;

    auto consider = [&](ConstVec zc, ConstVec Azc) {
        const IterateQuality q = prob.quality(zc, Azc);
        if (q.feasible && q.objective < out.best_objective) {
            out.best_objective = q.objective;
            out.best_infeasibility = q.infeasibility;
            out.best_z.assign(zc.begin(), zc.end());
            out.have_best = true;
        }
    };
    consider(z, Az);

    double kkt_anchor = prob.kkt(z, Az, w, ATw).norm();
    double kkt_prev_candidate = kInf;
    double window_start_best = out.best_objective;
    KktMeasures last_kkt;

    std::size_t k = 0;
    for (k = 1; k <= opt.max_iters; ++k) {
        for (std::size_t j = 0; j < n; ++j) tmp_n[j] = z[j] - tau * ATw[j];
        prob.prox_primal(tmp_n, tau, z_new);
        A.multiply(z_new, Az_new);
        for (std::size_t i = 0; i < m; ++i) tmp_m[i] = w[i] + sigma * (2.0 * Az_new[i] - Az[i]);
        prob.prox_dual_conj(tmp_m, sigma, w_new);
        A.multiply_transpose(w_new, ATw_new);

        z.swap(z_new);
        Az.swap(Az_new);
        w.swap(w_new);
        ATw.swap(ATw_new);
        for (std::size_t j = 0; j < n; ++j) {
            zsum[j] += z[j];
            ATwsum[j] += ATw[j];
        }
        for (std::size_t i = 0; i < m; ++i) {
            Azsum[i] += Az[i];
            wsum[i] += w[i];
        }
        ++avg_count;
        consider(z, Az);
        if (k == opt.half_snapshot) out.snapshot_w = w;

        const bool at_window = k % opt.window == 0;
        const bool at_restart_check = !fixed && k % opt.restart_check == 0;
        if (!at_window && !at_restart_check) continue;

        const double inv = 1.0 / static_cast<double>(avg_count);
        for (std::size_t j = 0; j < n; ++j) {
            z_avg[j] = zsum[j] * inv;
            ATw_avg[j] = ATwsum[j] * inv;
        }
        for (std::size_t i = 0; i < m; ++i) {
            Az_avg[i] = Azsum[i] * inv;
            w_avg[i] = wsum[i] * inv;
        }
        consider(z_avg, Az_avg);
        const KktMeasures kc = prob.kkt(z, Az, w, ATw);
        const KktMeasures ka = prob.kkt(z_avg, Az_avg, w_avg, ATw_avg);
        out.best_dual_bound = std::max({out.best_dual_bound, kc.dual_bound, ka.dual_bound});
        const bool avg_better = ka.norm() < kc.norm();
        last_kkt = avg_better ? ka : kc;

        if (at_window) {
            out.history.push_back({k, last_kkt.primal, last_kkt.dual, last_kkt.gap, out.best_objective});
            const double scale = std::max(std::abs(out.best_objective), std::numeric_limits<double>::min());
            const bool stalled = out.have_best && std::abs(window_start_best - out.best_objective) <= opt.tol * scale;
            window_start_best = out.best_objective;
            if (out.have_best && stalled &&
                prob.optimality_error(last_kkt, out.best_objective, out.best_dual_bound) <= opt.tol) {
                out.converged = true;
                break;
            }
        }

        if (at_restart_check) {
            const double kkt_candidate = last_kkt.norm();
            const std::size_t since = k - last_restart;
            const bool restart = kkt_candidate <= 0.2 * kkt_anchor ||
                                 (kkt_candidate <= 0.8 * kkt_anchor && kkt_candidate > kkt_prev_candidate) ||
                                 static_cast<double>(since) >= 0.36 * static_cast<double>(k);
            kkt_prev_candidate = kkt_candidate;
            if (restart) {
                if (avg_better) {
                    z = z_avg;
                    Az = Az_avg;
                    w = w_avg;
                    ATw = ATw_avg;
                }
                double dz = 0.0, dw = 0.0;
                for (std::size_t j = 0; j < n; ++j) dz += (z[j] - z_anchor[j]) * (z[j] - z_anchor[j]);
                for (std::size_t i = 0; i < m; ++i) dw += (w[i] - w_anchor[i]) * (w[i] - w_anchor[i]);
                dz = std::sqrt(dz);
                dw = std::sqrt(dw);
                if (dz > 1e-300 && dw > 1e-300 && std::isfinite(dw / dz)) {
                    omega = std::exp(0.5 * std::log(dw / dz) + 0.5 * std::log(omega));
                    tau = kStepFraction / (omega * L);
                    sigma = kStepFraction * omega / L;
                }
                z_anchor = z;
                w_anchor = w;
                kkt_anchor = kkt_candidate;
                kkt_prev_candidate = kInf;
                std::fill(zsum.begin(), zsum.end(), 0.0);
                std::fill(Azsum.begin(), Azsum.end(), 0.0);
                std::fill(wsum.begin(), wsum.end(), 0.0);
                std::fill(ATwsum.begin(), ATwsum.end(), 0.0);
                avg_count = 0;
                last_restart = k;
                ++out.restarts;
            }
        }
    }
    out.iterations = std::min(k, opt.max_iters);
    out.last_z = z;
    out.last_w = w;
    return out;
}

}  // namespace sparserec
