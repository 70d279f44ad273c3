// Acceptance criteria 1-11. One PASS/FAIL line per criterion; exit status is
// the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <sparserec/sparserec.hpp>

#include "support/lp_oracle.hpp"

using namespace sparserec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

unsigned threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? std::min(hw, 8u) : 4u;
}

ExperimentConfig base_config(double p) {
    ExperimentConfig cfg;
    cfg.signal = {64, 2, SignalKind::flat_signs, 1.0, SignalNormalization::none};
    cfg.ensemble.n = 64;
    cfg.p = p;
    cfg.m_values = {optimal_regime_m(64, 2)};
    cfg.trials = 100;
    cfg.base_seed = 20240101;
    return cfg;
}

// Criterion 1 ---------------------------------------------------------------
Outcome solver_vs_lp() {
    const auto t0 = Clock::now();
    RngStream rng(101);
    double worst = 0.0;
    int instances = 0, failures = 0;
    for (int k = 0; k < 50; ++k) {
        const double p = k % 2 ? kInf : 1.0;
        const std::size_t m = 3 + rng.below(6);          // 3..8
        const std::size_t n = m + 1 + rng.below(12 - m);  // m+1..12
        const auto A = sample_matrix({EnsembleKind::gaussian, 6.0, m, n, derive_seed(101, k)});
        DenseVector x(n, 0.0);
        for (std::size_t j = 0; j < std::min<std::size_t>(2, n); ++j) x[rng.below(n)] = rng.normal();
        DenseVector y = A.multiply(x);
        for (double& v : y) v += 0.1 * rng.normal();
        const double eps = 0.05 + 0.3 * rng.uniform();
        const auto lp = lp_oracle::bpdn_lp(A, y, p, eps);
        const auto res = solve_bpdn(A, y, p, eps);
        ++instances;
        if (lp.status != lp_oracle::LpStatus::optimal || res.status != SolveStatus::converged) {
            ++failures;
            continue;
        }
        const double diff = std::abs(res.objective - lp.objective);
        worst = std::max(worst, diff);
        if (diff > 1e-4) ++failures;
    }
    const double secs = seconds_since(t0);
    return {failures == 0 && secs < 60.0,
            fmt("%d instances, max |objective - LP| = %.2e (tol 1e-4), %d failures, %.1f s (limit 60)", instances, worst,
                failures, secs)};
}

// Criterion 2 ---------------------------------------------------------------
Outcome recovery_optimal_regime() {
    const auto t0 = Clock::now();
    std::string detail;
    bool ok = true;
    for (double p : {1.0, 2.0, kInf}) {
        const auto recs = run_experiment(base_config(p), {threads(), false});
        std::size_t succ = 0;
        for (const auto& r : recs) succ += r.success ? 1 : 0;
        const double rate = static_cast<double>(succ) / static_cast<double>(recs.size());
        ok = ok && rate >= 0.95;
        detail += fmt("p=%g: %.2f  ", p, rate);
    }
    const double secs = seconds_since(t0);
    ok = ok && secs < 300.0;
    return {ok, detail + fmt("(m=%zu, threshold 0.95, %.1f s, limit 300)", optimal_regime_m(64, 2), secs)};
}

// Criterion 3 ---------------------------------------------------------------
struct ChainCount {
    int certified = 0;
    int patterns = 0;
    int counterexamples = 0;
};

ChainCount nsp_chain(double rho) {
    const std::size_t m = 8, n = 10, s = 2;
    ChainCount cc;
    for (std::uint64_t draw = 0; draw < 20; ++draw) {
        const auto A = sample_matrix({EnsembleKind::gaussian, 6.0, m, n, derive_seed(303, draw)});
        bool certified = false;
        for (double tau : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0, 256.0, 1024.0}) {
            if (certify_nsp_q1(A, s, rho, tau, 1.0, 1e-6).verdict == NspVerdict::certified) {
                certified = true;
                break;
            }
        }
        if (!certified) continue;
        ++cc.certified;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                for (int sg = 0; sg < 4; ++sg) {
                    DenseVector x(n, 0.0);
                    x[i] = sg & 1 ? -1.0 : 1.0;
                    x[j] = sg & 2 ? -1.0 : 1.0;
                    const auto res = solve_bpdn(A, A.multiply(x), 1.0, 0.0);
                    DenseVector d(n);
                    for (std::size_t k = 0; k < n; ++k) d[k] = res.estimate[k] - x[k];
                    ++cc.patterns;
                    if (lp_norm(d, 2.0) > 1e-6 * std::max(1.0, lp_norm(x, 2.0))) ++cc.counterexamples;
                }
    }
    return cc;
}

Outcome nsp_implies_recovery() {
    std::string detail;
    int counterexamples = 0;
    for (double rho : {0.5, 0.75, 0.9}) {
        const auto cc = nsp_chain(rho);
        counterexamples += cc.counterexamples;
        detail += fmt("rho=%g: %d/20 certified, %d patterns, %d counterexamples; ", rho, cc.certified, cc.patterns,
                      cc.counterexamples);
    }
    return {counterexamples == 0, detail + "(rho=0.5 is the stated setting; 0.75 and 0.9 are supplementary)"};
}

// Criterion 4 ---------------------------------------------------------------
Outcome cone_inclusion() {
    RngStream rng(404);
    int members = 0, violations = 0;
    double worst = 0.0;
    const double rhos[] = {0.1, 0.3, 0.5, 0.75, 0.95};
    const double qs[] = {1.0, 1.5, 2.0, 3.0, 8.0};
    while (members < 10000) {
        const double rho = rhos[rng.below(5)];
        const double q = qs[rng.below(5)];
        const std::size_t n = 4 + rng.below(60);
        const std::size_t s = 1 + rng.below(std::min<std::size_t>(n - 1, 8));
        const ConeParams cp{rho, s, q};
        // Head on s entries, tail scaled to a random fraction of the cone's allowance.
        DenseVector x(n, 0.0);
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = n; i-- > 1;) std::swap(idx[i], idx[rng.below(i + 1)]);
        DenseVector head(s);
        for (double& v : head) v = rng.normal();
        const double hmin = *std::min_element(head.begin(), head.end(), [](double a, double b) {
            return std::abs(a) < std::abs(b);
        });
        DenseVector tail(n - s);
        const int profile = static_cast<int>(rng.below(3));
        for (std::size_t k = 0; k < tail.size(); ++k)
            tail[k] = profile == 0 ? rng.normal() : profile == 1 ? rng.exponential() * rng.sign()
                                                                 : std::pow(k + 1.0, -1.5) * rng.sign();
        const double allowance = lp_norm(head, q) * std::pow(static_cast<double>(s), 1.0 - 1.0 / q) / rho;
        const double tl1 = lp_norm(tail, 1.0);
        double scale = tl1 > 0.0 ? rng.uniform() * allowance / tl1 : 0.0;
        // keep the head the top-s block so the construction is a member
        const double tmax = tail.empty() ? 0.0 : lp_norm(tail, kInf);
        if (tmax * scale > std::abs(hmin)) scale = std::abs(hmin) / tmax;
        for (std::size_t k = 0; k < s; ++k) x[idx[k]] = head[k];
        for (std::size_t k = 0; k < tail.size(); ++k) x[idx[s + k]] = scale * tail[k];
        if (!cone_membership(x, cp).member) continue;
        const double r = rng.uniform() / lp_norm(x, q);  // ||x||_q <= 1
        for (double& v : x) v *= r;
        if (lp_norm(x, 2.0) == 0.0) continue;
        ++members;
        const double d = dsq_norm(x, s, q);
        worst = std::max(worst, d - (2.0 + 1.0 / rho));
        if (d > 2.0 + 1.0 / rho + 1e-9) ++violations;
    }
    return {violations == 0,
            fmt("%d members, %d violations, max (dsq - (2 + 1/rho)) = %.3g", members, violations, worst)};
}

// Criterion 5 ---------------------------------------------------------------
Outcome gap_demo() {
    std::string detail;
    bool ok = true;
    for (std::size_t s : {4u, 16u, 64u}) {
        const auto g = rip11_gap_demo(400, s, 200, derive_seed(505, s));
        const double rel = std::abs(g.mean_ratio.value - g.expected) / g.expected;
        ok = ok && rel <= 0.10;
        detail += fmt("s=%zu: %.4f vs %.4f (rel %.3f)  ", s, g.mean_ratio.value, g.expected, rel);
    }
    return {ok, detail + "(tol 10%; criterion 2 on the same ensemble reported above)"};
}

// Criterion 6 ---------------------------------------------------------------
Outcome noise_scaling() {
    std::string detail;
    bool ok = true;
    for (double p : {1.0, 2.0}) {
        auto cfg = base_config(p);
        cfg.epsilon_rule = EpsilonRule::noise_scaled;
        cfg.epsilon = 0.1;
        cfg.m_values = {32, 64, 128, 256};
        cfg.trials = 100;
        cfg.base_seed = 606;
        const auto rep = noise_scaling_sweep(cfg, {threads(), false});
        const double target = -1.0 / p;
        ok = ok && !rep.skipped && std::abs(rep.fit.slope - target) <= 0.3;
        detail += fmt("p=%g: slope %.3f [%.3f, %.3f] target %.2f  ", p, rep.fit.slope, rep.fit.ci_low, rep.fit.ci_high,
                      target);
    }
    return {ok, detail + "(tol 0.3)"};
}

// Criterion 7 ---------------------------------------------------------------
Outcome quantization() {
    const std::size_t n = 64, s = 2, m = optimal_regime_m(n, s), trials = 50;
    std::vector<double> medians;
    std::size_t converged = 0, feasible = 0, consistent = 0;
    std::string detail;
    for (double theta : {0.05, 0.2, 0.8}) {
        DenseVector ratios(trials);
        std::vector<QcbpResult> results(trials);
        parallel_for(trials, threads(), [&](std::size_t t) {
            const std::uint64_t seed = derive_seed(707, t);
            const auto A = sample_matrix({EnsembleKind::gaussian, 6.0, m, n, derive_seed(seed, 0)});
            RngStream srng(derive_seed(seed, 1));
            const auto x = generate_signal({n, s, SignalKind::flat_signs, 1.0, SignalNormalization::none}, srng);
            const auto y = quantize(A.multiply(x), theta);
            results[t] = solve_qcbp(A, y, theta);
            DenseVector d(n);
            for (std::size_t j = 0; j < n; ++j) d[j] = results[t].solve.estimate[j] - x[j];
            ratios[t] = lp_norm(d, 2.0) / theta;
        });
        for (const auto& r : results) {
            if (r.solve.status != SolveStatus::converged) continue;
            ++converged;
            feasible += r.consistency.max_abs_residual <= theta / 2.0 + 1e-8 ? 1 : 0;
            consistent += r.consistency.consistent ? 1 : 0;
        }
        medians.push_back(median(ratios));
        detail += fmt("theta=%g: median err/theta %.4f  ", theta, medians.back());
    }
    const double spread = *std::max_element(medians.begin(), medians.end()) /
                          *std::min_element(medians.begin(), medians.end());
    const bool ok = spread <= 3.0 && feasible == converged && converged > 0;
    return {ok, detail + fmt("spread %.3f (limit 3); closed-box feasible %zu/%zu converged; half-open consistent %zu",
                             spread, feasible, converged, consistent)};
}

// Criterion 8 ---------------------------------------------------------------
Outcome ensembles() {
    std::string detail;
    bool ok = true;

    double worst_rel = 0.0;
    int pairs = 0;
    for (double gamma : {3.5, 4.0, 6.0, 8.0, 12.0})
        for (double p : {0.5, 1.0, 1.5, 2.0}) {
            auto density = [gamma](double x) {
                return (gamma - 1.0) / (2.0 * gamma) * std::min(1.0, std::pow(std::abs(x), -gamma));
            };
            const double exact = heavy_tail_moment(gamma, p);
            worst_rel = std::max(worst_rel, std::abs(abs_moment_quadrature(density, p) - exact) / exact);
            ++pairs;
        }
    ok = ok && worst_rel <= 1e-6;
    detail += fmt("quadrature %d pairs max rel err %.2e; ", pairs, worst_rel);

    {
        const std::size_t N = 1000000;
        RngStream rng(808);
        DenseVector x2(N), x4(N);
        for (std::size_t i = 0; i < N; ++i) {
            const double v = sample_heavy_tail(rng, 6.0);
            x2[i] = v * v;
            x4[i] = x2[i] * x2[i];
        }
        const auto e2 = summarize_samples(x2), e4 = summarize_samples(x4);
        const double z2 = (e2.value - heavy_tail_moment(6.0, 2.0)) / e2.std_error;
        const double z4 = (e4.value - heavy_tail_moment(6.0, 4.0)) / e4.std_error;
        ok = ok && std::abs(z2) <= 3.0 && std::abs(z4) <= 3.0;
        detail += fmt("gamma=6 moments: m2 %.4f (z %.2f), m4 %.4f (z %.2f); ", e2.value, z2, e4.value, z4);
    }

    const double gamma = std::max(std::ceil(std::log(64.0)) + 2.0, 6.0);
    for (auto kind : {EnsembleKind::gaussian, EnsembleKind::rademacher, EnsembleKind::sym_exponential,
                      EnsembleKind::heavy_tail, EnsembleKind::logconcave_l1ball}) {
        auto cfg = base_config(2.0);
        cfg.ensemble.kind = kind;
        cfg.ensemble.gamma = gamma;
        cfg.base_seed = 888;
        const auto recs = run_experiment(cfg, {threads(), false});
        std::size_t succ = 0;
        for (const auto& r : recs) succ += r.success ? 1 : 0;
        const double rate = static_cast<double>(succ) / static_cast<double>(recs.size());
        ok = ok && rate >= 0.90;
        detail += fmt("%s %.2f ", to_string(kind), rate);
    }
    return {ok, detail + fmt("(heavy_tail gamma=%g, threshold 0.90)", gamma)};
}

// Criterion 9 ---------------------------------------------------------------
Outcome width_and_pipeline() {
    std::string detail;
    bool width_ok = true;
    for (auto [n, s] : {std::pair<std::size_t, std::size_t>{64, 2}, {256, 8}}) {
        const EnsembleSpec g{EnsembleKind::gaussian, 6.0, 100, n, 0};
        const auto e = rademacher_sup_estimate(g, 100, s, 200, derive_seed(909, n));
        const double bound = gaussian_width_bound(n, s);
        width_ok = width_ok && e.value <= bound + 3.0 * e.std_error;
        detail += fmt("width(%zu,%zu) %.3f +- %.3f <= %.3f; ", n, s, e.value, e.std_error, bound);
    }

    PipelineOptions opts;
    opts.width_trials = 10;
    bool monotone = true, seen_positive = false, positive_at_1e4 = false;
    std::string bounds;
    for (std::size_t m : {1u, 10u, 100u, 1000u, 10000u, 30000u, 300000u}) {
        const auto r = pipeline_check_theorem3(64, 2, 2.0, 0.5, m, 990, opts);
        if (seen_positive && !r.positive) monotone = false;
        seen_positive = seen_positive || r.positive;
        if (m == 10000) positive_at_1e4 = r.positive;
        bounds += fmt("m=%zu:%.4g ", m, r.bound.value);
    }
    detail += "pipeline bound " + bounds;
    detail += fmt("monotone %s, positive at m=1e4 %s", monotone ? "yes" : "no", positive_at_1e4 ? "yes" : "no");
    return {width_ok && monotone && positive_at_1e4, detail};
}

// Criterion 10 --------------------------------------------------------------
Outcome projection_properties() {
    RngStream rng(1010);
    std::string detail;
    int violations = 0;
    auto dist2 = [](ConstVec a, ConstVec b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
        return std::sqrt(acc);
    };
    for (double p : {1.0, 1.5, 2.0, 4.0, kInf}) {
        int v = 0;
        for (int t = 0; t < 10000; ++t) {
            const std::size_t n = 1 + rng.below(12);
            DenseVector c(n), x(n), y(n), d(n), u(n);
            for (double& e : c) e = rng.normal();
            for (double& e : x) e = 3.0 * rng.normal();
            for (double& e : y) e = 3.0 * rng.normal();
            for (double& e : d) e = rng.normal();
            const double r = 2.0 * rng.uniform();
            const BallSpec ball{p, r, c};
            const DenseVector px = project_ball(x, ball), py = project_ball(y, ball);
            DenseVector off(n);
            for (std::size_t i = 0; i < n; ++i) off[i] = px[i] - c[i];
            const double nd = lp_norm(d, p);
            const double sc = nd > 0.0 ? r * rng.uniform() / nd : 0.0;
            for (std::size_t i = 0; i < n; ++i) u[i] = c[i] + sc * d[i];
            const bool feasible = lp_norm(off, p) <= r * (1.0 + 1e-10) + 1e-300;
            const bool idempotent = dist2(project_ball(px, ball), px) <= 1e-12 * std::max(1.0, lp_norm(px, 2.0));
            const bool nonexpansive = dist2(px, py) <= dist2(x, y) * (1.0 + 1e-10) + 1e-12;
            const bool optimal = dist2(x, px) <= dist2(x, u) * (1.0 + 1e-10) + 1e-12;
            if (!(feasible && idempotent && nonexpansive && optimal)) ++v;
        }
        violations += v;
        detail += fmt("p=%g: %d violations  ", p, v);
    }
    return {violations == 0, detail + "(10^4 cases per p)"};
}

// Criterion 11 --------------------------------------------------------------
Outcome determinism() {
    std::string detail;
    bool ok = true;
    auto cfgs = std::vector<ExperimentConfig>{};
    auto a = base_config(2.0);
    a.trials = 20;
    a.m_values = {24, 36};
    cfgs.push_back(a);
    auto b = a;
    b.epsilon_rule = EpsilonRule::noise_scaled;
    b.epsilon = 0.1;
    b.p = 1.0;
    b.signal.kind = SignalKind::compressible;
    cfgs.push_back(b);
    auto c = a;
    c.epsilon_rule = EpsilonRule::quantizer;
    c.theta = 0.2;
    c.p = kInf;
    c.ensemble.kind = EnsembleKind::heavy_tail;
    c.ensemble.gamma = 7.0;
    cfgs.push_back(c);
    for (const auto& cfg : cfgs) {
        const std::string one = format_csv(run_experiment(cfg, {1, false}));
        const std::string again = format_csv(run_experiment(cfg, {1, false}));
        const std::string eight = format_csv(run_experiment(cfg, {8, false}));
        const bool same = one == again && one == eight;
        ok = ok && same;
        detail += fmt("%s/%s: %s  ", to_string(cfg.epsilon_rule), to_string(cfg.ensemble.kind),
                      same ? "identical" : "DIFFERENT");
    }
    return {ok, detail + "(1 thread twice, 8 threads)"};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"solver matches LP oracle", solver_vs_lp},
        {"exact recovery in the optimal regime", recovery_optimal_regime},
        {"certified NSP implies recovery", nsp_implies_recovery},
        {"cone inclusion", cone_inclusion},
        {"RIP_{1,1} gap", gap_demo},
        {"noise scaling slopes", noise_scaling},
        {"quantized recovery", quantization},
        {"ensemble validation", ensembles},
        {"width bound and pipeline", width_and_pipeline},
        {"projection property suite", projection_properties},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::printf("%s criterion %zu (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed;
}
