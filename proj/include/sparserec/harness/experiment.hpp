#pragma once

// Seeded trial execution, phase grids and the noise-scaling regression.

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "../core.hpp"
#include "../ensembles.hpp"
#include "../quantize.hpp"
#include "../rng.hpp"
#include "../solvers.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "signal.hpp"

namespace sparserec {

/// Relative success threshold on err_l2.
inline constexpr double kSuccessThreshold = 1e-6;

struct RunOptions {
    unsigned threads = 1;
    bool record_wall_time = false;  ///< timings make CSV output run-dependent
};

/// Per-trial seed; injective in (m_index, trial_index) for indices below 2^32.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t m_index, std::size_t trial_index) {
    require(m_index < (std::size_t{1} << 32) && trial_index < (std::size_t{1} << 32), "trial_seed: index too large");
    return base_seed ^ ((static_cast<std::uint64_t>(m_index) << 32) | static_cast<std::uint64_t>(trial_index));
}

/// Runs `fn(i)` for i in [0, count) on a bounded pool. The first exception
/// is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// One trial: sample A (stream 0), the signal (stream 1) and the noise
/// (stream 2) from the trial seed, build y by the epsilon rule and solve.
inline TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t m_index, std::size_t trial_index,
                             bool record_wall_time = false) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t m = cfg.m_values.at(m_index);
    const std::size_t n = cfg.signal.n;
    const std::uint64_t seed = trial_seed(cfg.base_seed, m_index, trial_index);

    EnsembleSpec es = cfg.ensemble;
    es.m = m;
    es.n = n;
    es.seed = derive_seed(seed, 0);
    const DenseMatrix A = sample_matrix(es);
    RngStream signal_rng(derive_seed(seed, 1));
    const DenseVector x = generate_signal(cfg.signal, signal_rng);
    DenseVector y = A.multiply(x);

    TrialRecord rec;
    rec.trial_id = trial_index;
    rec.m = m;
    rec.n = n;
    rec.s = cfg.signal.s;
    rec.seed = seed;

    SolveResult res;
    switch (cfg.epsilon_rule) {
        case EpsilonRule::fixed:
            rec.eps_used = cfg.epsilon;
            res = solve_bpdn(A, y, cfg.p, cfg.epsilon, cfg.solver);
            break;
        case EpsilonRule::noise_scaled: {
            rec.eps_used = cfg.epsilon;
            if (cfg.epsilon > 0.0) {
                RngStream noise_rng(derive_seed(seed, 2));
                DenseVector v(m);
                for (double& vi : v) vi = noise_rng.normal();
                const double nv = lp_norm(v, cfg.p);
                for (std::size_t i = 0; i < m; ++i) y[i] += cfg.epsilon * v[i] / nv;
            }
            res = solve_bpdn(A, y, cfg.p, cfg.epsilon, cfg.solver);
            break;
        }
        case EpsilonRule::quantizer: {
            rec.eps_used = cfg.theta / 2.0;
            y = quantize(y, cfg.theta);
            QcbpResult q = solve_qcbp(A, y, cfg.theta, cfg.solver);
            rec.consistent = q.consistency.consistent;
            res = std::move(q.solve);
            break;
        }
    }

    DenseVector diff(n);
    for (std::size_t j = 0; j < n; ++j) diff[j] = res.estimate[j] - x[j];
    rec.err_l1 = lp_norm(diff, 1.0);
    rec.err_l2 = lp_norm(diff, 2.0);
    rec.err_lq = lp_norm(diff, cfg.q);
    rec.sigma_s_l1 = best_s_term_error(x, cfg.signal.s);
    rec.objective = res.objective;
    rec.status = res.status;
    rec.success = rec.err_l2 <= kSuccessThreshold * std::max(1.0, lp_norm(x, 2.0));
    if (record_wall_time)
        rec.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

/// Records ordered by (m index, trial index) regardless of thread count.
/// Solver non-convergence is recorded in `status`, never raised.
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
    cfg.validate();
    const std::size_t total = cfg.m_values.size() * cfg.trials;
    std::vector<TrialRecord> out(total);
    parallel_for(total, opts.threads, [&](std::size_t k) {
        out[k] = run_trial(cfg, k / cfg.trials, k % cfg.trials, opts.record_wall_time);
    });
    return out;
}

struct PhaseCell {
    std::size_t m = 0, s = 0;
    std::size_t successes = 0, trials = 0;
    double rate = 0.0;
    double std_error = 0.0;
};

struct PhaseGrid {
    std::vector<std::size_t> m_list, s_list;
    std::vector<PhaseCell> cells;  ///< row-major over (s, m)

    const PhaseCell& at(std::size_t s_index, std::size_t m_index) const { return cells.at(s_index * m_list.size() + m_index); }
};

/// Success fraction per (m, s) cell, cfg.m_values and cfg.signal.s being
/// overridden. Each s row uses its own derived base seed.
inline PhaseGrid phase_grid(const ExperimentConfig& cfg, const std::vector<std::size_t>& m_list,
                            const std::vector<std::size_t>& s_list, const RunOptions& opts = {}) {
    require(!m_list.empty() && !s_list.empty(), "phase_grid: lists must be nonempty");
    PhaseGrid grid;
    grid.m_list = m_list;
    grid.s_list = s_list;
    for (std::size_t si = 0; si < s_list.size(); ++si) {
        ExperimentConfig c = cfg;
        c.signal.s = s_list[si];
        c.m_values = m_list;
        c.base_seed = derive_seed(cfg.base_seed, si);
        const std::vector<TrialRecord> recs = run_experiment(c, opts);
        for (std::size_t mi = 0; mi < m_list.size(); ++mi) {
            PhaseCell cell;
            cell.m = m_list[mi];
            cell.s = s_list[si];
            cell.trials = c.trials;
            for (std::size_t t = 0; t < c.trials; ++t) cell.successes += recs[mi * c.trials + t].success ? 1 : 0;
            cell.rate = static_cast<double>(cell.successes) / static_cast<double>(cell.trials);
            cell.std_error = std::sqrt(cell.rate * (1.0 - cell.rate) / static_cast<double>(cell.trials));
            grid.cells.push_back(cell);
        }
    }
    return grid;
}

inline double median(DenseVector v) {
    require(!v.empty(), "median: empty input");
    const std::size_t h = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
    const double upper = v[h];
    if (v.size() % 2) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h));
    return 0.5 * (lower + upper);
}

struct LinearFit {
    double slope = 0.0, intercept = 0.0;
    double slope_std_error = 0.0;
    double ci_low = 0.0, ci_high = 0.0;  ///< 95% Student-t interval on the slope
};

inline LinearFit least_squares_fit(ConstVec x, ConstVec y) {
    require(x.size() == y.size() && x.size() >= 2, "least_squares_fit: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    const double mx = pairwise_sum(x) / n, my = pairwise_sum(y) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0.0, "least_squares_fit: x values must not all coincide");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double sse = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            sse += r * r;
        }
        f.slope_std_error = std::sqrt(sse / (n - 2.0) / sxx);
        const boost::math::students_t dist(n - 2.0);
        const double tq = boost::math::quantile(dist, 0.975);
        f.ci_low = f.slope - tq * f.slope_std_error;
        f.ci_high = f.slope + tq * f.slope_std_error;
    } else {
        f.ci_low = f.ci_high = f.slope;
    }
    return f;
}

struct NoiseSlopeReport {
    double p = 2.0;
    std::vector<std::size_t> m_values;
    DenseVector median_err_l2;
    LinearFit fit;           ///< log(median err_l2) against log m
    bool skipped = false;    ///< epsilon = 0: errors sit at the solver floor
    std::string reason;
    std::vector<TrialRecord> records;
};

/// Median err_l2 against m on a log-log scale with a least-squares slope.
inline NoiseSlopeReport noise_scaling_sweep(const ExperimentConfig& cfg, const RunOptions& opts = {}) {
    require(cfg.epsilon_rule == EpsilonRule::noise_scaled, "noise_scaling_sweep: epsilon rule must be noise_scaled");
    require(cfg.p == 1.0 || cfg.p == 2.0, "noise_scaling_sweep: p must be 1 or 2");
    require(cfg.m_values.size() >= 2, "noise_scaling_sweep: need at least two m values");
    NoiseSlopeReport rep;
    rep.p = cfg.p;
    rep.m_values = cfg.m_values;
    rep.records = run_experiment(cfg, opts);
    DenseVector logm, logerr;
    for (std::size_t mi = 0; mi < cfg.m_values.size(); ++mi) {
        DenseVector errs(cfg.trials);
        for (std::size_t t = 0; t < cfg.trials; ++t) errs[t] = rep.records[mi * cfg.trials + t].err_l2;
        rep.median_err_l2.push_back(median(errs));
        logm.push_back(std::log(static_cast<double>(cfg.m_values[mi])));
        logerr.push_back(std::log(std::max(rep.median_err_l2.back(), std::numeric_limits<double>::min())));
    }
    if (cfg.epsilon == 0.0) {
        rep.skipped = true;
        rep.reason = "epsilon = 0: errors at solver tolerance floor, slope not meaningful";
        return rep;
    }
    rep.fit = least_squares_fit(logm, logerr);
    return rep;
}

}  // namespace sparserec
