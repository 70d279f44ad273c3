// sparserec command-line front end. Exit status: 0 success, 1 invalid
// input, 2 internal error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <sparserec/sparserec.hpp>

namespace sr = sparserec;
namespace fs = std::filesystem;

namespace {

struct Globals {
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out_dir = ".";
};

struct MatrixSource {
    std::string path;
    std::string ensemble = "gaussian";
    std::size_t m = 0, n = 0;
    double gamma = 6.0;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--matrix", path, "Matrix file (text format); otherwise one is sampled");
        cmd->add_option("--ensemble", ensemble, "Ensemble for a sampled matrix")->capture_default_str();
        cmd->add_option("--m", m, "Rows of a sampled matrix");
        cmd->add_option("--n", n, "Columns of a sampled matrix");
        cmd->add_option("--gamma", gamma, "Tail exponent (heavy_tail)")->capture_default_str();
    }

    sr::DenseMatrix load(std::uint64_t seed) const {
        if (!path.empty()) return sr::io::load_matrix(path);
        sr::require(m >= 1 && n >= 1, "either --matrix or both --m and --n are required");
        return sr::sample_matrix({sr::parse_ensemble_kind(ensemble), gamma, m, n, seed});
    }
};

std::string out_path(const Globals& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / name).string();
}

double parse_p(const std::string& s) {
    if (s == "inf" || s == "infinity") return sr::kInf;
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    sr::require(pos == s.size() && pos > 0, "invalid exponent '" + s + "'");
    return v;
}

std::vector<std::size_t> parse_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        sr::require(pos == item.size() && pos > 0, "invalid list entry '" + item + "'");
        out.push_back(static_cast<std::size_t>(v));
    }
    sr::require(!out.empty(), "empty list");
    return out;
}

unsigned default_threads() {
    if (const char* env = std::getenv("SPARSEREC_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse recovery with lp-constrained basis pursuit"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    g.threads = default_threads();
    app.add_option("--seed", g.seed, "Base seed")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads (default: SPARSEREC_THREADS or 1)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();

    // gen-matrix
    auto* gen = app.add_subcommand("gen-matrix", "Sample a measurement matrix");
    std::string gen_ensemble = "gaussian", gen_out = "matrix.txt";
    std::size_t gen_m = 0, gen_n = 0;
    double gen_gamma = 6.0;
    gen->add_option("--ensemble", gen_ensemble)->capture_default_str();
    gen->add_option("--m", gen_m)->required();
    gen->add_option("--n", gen_n)->required();
    gen->add_option("--gamma", gen_gamma)->capture_default_str();
    gen->add_option("--out", gen_out, "File name inside --out-dir")->capture_default_str();

    // solve
    auto* solve = app.add_subcommand("solve", "Solve min ||z||_1 s.t. ||Az - y||_p <= eps");
    std::string solve_matrix, solve_y, solve_p = "2", solve_out;
    double solve_eps = 0.0;
    sr::SolverConfig solve_cfg;
    solve->add_option("--matrix", solve_matrix)->required();
    solve->add_option("--y", solve_y, "Measurement vector file")->required();
    solve->add_option("--p", solve_p, "Constraint exponent (number or inf)")->capture_default_str();
    solve->add_option("--eps", solve_eps)->capture_default_str();
    solve->add_option("--max-iters", solve_cfg.max_iters)->capture_default_str();
    solve->add_option("--tol-feas", solve_cfg.tol_feas)->capture_default_str();
    solve->add_option("--tol-obj", solve_cfg.tol_obj)->capture_default_str();
    solve->add_option("--out", solve_out, "Write the estimate to this file inside --out-dir");

    // certify-nsp
    auto* nsp = app.add_subcommand("certify-nsp", "Certify the robust null space property (q = 1)");
    MatrixSource nsp_src;
    nsp_src.add_to(nsp);
    std::size_t nsp_s = 1;
    double nsp_rho = 0.5, nsp_tau = 1.0, nsp_tol = 1e-6;
    std::string nsp_p = "2";
    bool nsp_raw = false;
    nsp->add_option("--s", nsp_s)->capture_default_str();
    nsp->add_option("--rho", nsp_rho)->capture_default_str();
    nsp->add_option("--tau", nsp_tau)->capture_default_str();
    nsp->add_option("--p", nsp_p)->capture_default_str();
    nsp->add_option("--tol", nsp_tol)->capture_default_str();
    nsp->add_flag("--raw-norm", nsp_raw, "Use tau ||Ax||_p instead of tau m^{-1/p} ||Ax||_p");

    // estimate-rip
    auto* rip = app.add_subcommand("estimate-rip", "Inner estimates of RIP_{p,q} constants");
    MatrixSource rip_src;
    rip_src.add_to(rip);
    std::size_t rip_s = 1, rip_samples = 1000;
    std::string rip_p = "2", rip_q = "2";
    rip->add_option("--s", rip_s)->capture_default_str();
    rip->add_option("--p", rip_p)->capture_default_str();
    rip->add_option("--q", rip_q)->capture_default_str();
    rip->add_option("--samples", rip_samples)->capture_default_str();

    // gap-demo
    auto* gap = app.add_subcommand("gap-demo", "||A e_1||_1 versus ||A x~||_1 for Gaussian A");
    std::size_t gap_m = 400, gap_s = 16, gap_trials = 200;
    gap->add_option("--m", gap_m)->capture_default_str();
    gap->add_option("--s", gap_s)->capture_default_str();
    gap->add_option("--trials", gap_trials)->capture_default_str();

    // pipeline-check
    auto* pipe = app.add_subcommand("pipeline-check", "Evaluate the small-ball lower bound chain");
    std::size_t pipe_n = 64, pipe_s = 2, pipe_m = 10000;
    double pipe_q = 2.0, pipe_rho = 0.5;
    sr::PipelineOptions pipe_opts;
    pipe->add_option("--n", pipe_n)->capture_default_str();
    pipe->add_option("--s", pipe_s)->capture_default_str();
    pipe->add_option("--m", pipe_m)->capture_default_str();
    pipe->add_option("--q", pipe_q)->capture_default_str();
    pipe->add_option("--rho", pipe_rho)->capture_default_str();
    pipe->add_option("--width-trials", pipe_opts.width_trials)->capture_default_str();
    pipe->add_option("--eta", pipe_opts.eta, "Failure probability")->capture_default_str();

    // quantize-demo
    auto* qd = app.add_subcommand("quantize-demo", "Quantization-consistent recovery trials");
    double qd_theta = 0.5;
    std::size_t qd_m = 0, qd_n = 64, qd_s = 2, qd_trials = 20;
    qd->add_option("--theta", qd_theta)->capture_default_str();
    qd->add_option("--m", qd_m, "Rows (default 4 ceil(s log(en/s)))");
    qd->add_option("--n", qd_n)->capture_default_str();
    qd->add_option("--s", qd_s)->capture_default_str();
    qd->add_option("--trials", qd_trials)->capture_default_str();

    // experiment / phase-grid / noise-sweep
    auto* exp = app.add_subcommand("experiment", "Run a configured experiment and write its CSV");
    std::string exp_config;
    bool exp_timing = false;
    exp->add_option("--config", exp_config)->required()->check(CLI::ExistingFile);
    exp->add_flag("--timing", exp_timing, "Fill wall_time_ms (output no longer reproducible)");

    auto* pg = app.add_subcommand("phase-grid", "Success rates over an (m, s) grid");
    std::string pg_config, pg_m, pg_s;
    pg->add_option("--config", pg_config)->required()->check(CLI::ExistingFile);
    pg->add_option("--m-list", pg_m, "Comma-separated m values")->required();
    pg->add_option("--s-list", pg_s, "Comma-separated s values")->required();

    auto* ns = app.add_subcommand("noise-sweep", "Log-log slope of median error against m");
    std::string ns_config;
    ns->add_option("--config", ns_config)->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        const sr::RunOptions run{g.threads, false};
        if (*gen) {
            const auto A = sr::sample_matrix({sr::parse_ensemble_kind(gen_ensemble), gen_gamma, gen_m, gen_n, g.seed});
            const std::string path = out_path(g, gen_out);
            sr::io::save_matrix(path, A);
            std::printf("%s\n", path.c_str());
        } else if (*solve) {
            const auto A = sr::io::load_matrix(solve_matrix);
            const auto y = sr::io::load_vector(solve_y);
            const auto res = sr::solve_bpdn(A, y, parse_p(solve_p), solve_eps, solve_cfg);
            std::printf("%s %zu %.17g %.17g\n", sr::to_string(res.status), res.iterations, res.objective,
                        res.feasibility_residual);
            if (!solve_out.empty()) sr::io::save_vector(out_path(g, solve_out), res.estimate);
        } else if (*nsp) {
            const auto A = nsp_src.load(g.seed);
            sr::NspOptions o;
            o.normalize_by_m = !nsp_raw;
            const auto cert = sr::certify_nsp_q1(A, nsp_s, nsp_rho, nsp_tau, parse_p(nsp_p), nsp_tol, o);
            std::ostringstream csv;
            csv << "support_id,sign_id,margin\n";
            for (const auto& mg : cert.margins)
                csv << mg.support_id << ',' << mg.sign_id << ',' << sr::io::format_double(mg.margin) << '\n';
            sr::write_file_atomic(out_path(g, "nsp_margins.csv"), csv.str());
            std::printf("%s %.17g%s%s\n", sr::to_string(cert.verdict), cert.worst_margin,
                        cert.reason.empty() ? "" : " ", cert.reason.c_str());
        } else if (*rip) {
            const auto A = rip_src.load(g.seed);
            const auto est = sr::rip_pq_estimate(A, rip_s, parse_p(rip_p), parse_p(rip_q), rip_samples,
                                                 sr::derive_seed(g.seed, 1));
            std::printf("%.17g %.17g %zu\n", est.c_lower_est, est.C_upper_est, est.samples);
        } else if (*gap) {
            const auto d = sr::rip11_gap_demo(gap_m, gap_s, gap_trials, g.seed);
            std::printf("%.17g %.17g %.17g %.17g\n", d.ratio_of_means, d.mean_ratio.value, d.mean_ratio.half_width,
                        d.expected);
        } else if (*pipe) {
            const auto r = sr::pipeline_check_theorem3(pipe_n, pipe_s, pipe_q, pipe_rho, pipe_m, g.seed, pipe_opts);
            std::printf("%s %.17g %.17g %.17g %.17g %.17g\n", r.positive ? "positive" : "vacuous", r.bound.value,
                        r.bound.failure_probability, r.rademacher_bound, r.small_ball.value, r.u_star);
        } else if (*qd) {
            sr::ExperimentConfig cfg;
            cfg.signal = {qd_n, qd_s, sr::SignalKind::flat_signs, 1.0, sr::SignalNormalization::none};
            cfg.ensemble.n = qd_n;
            cfg.p = sr::kInf;
            cfg.epsilon_rule = sr::EpsilonRule::quantizer;
            cfg.theta = qd_theta;
            cfg.m_values = {qd_m ? qd_m : sr::optimal_regime_m(qd_n, qd_s)};
            cfg.trials = qd_trials;
            cfg.base_seed = g.seed;
            const auto recs = sr::run_experiment(cfg, run);
            std::ostringstream csv;
            csv << "trial,theta,err_l2,err_l1,consistent\n";
            std::size_t consistent = 0;
            for (const auto& r : recs) {
                csv << r.trial_id << ',' << sr::io::format_double(qd_theta) << ',' << sr::io::format_double(r.err_l2)
                    << ',' << sr::io::format_double(r.err_l1) << ',' << (*r.consistent ? "true" : "false") << '\n';
                consistent += *r.consistent ? 1 : 0;
            }
            const std::string path = out_path(g, "quantize_demo.csv");
            sr::write_file_atomic(path, csv.str());
            std::printf("%s %zu/%zu consistent\n", path.c_str(), consistent, recs.size());
        } else if (*exp) {
            const auto cfg = sr::parse_config(exp_config);
            const auto recs = sr::run_experiment(cfg, {g.threads, exp_timing});
            const std::string path = out_path(g, "experiment.csv");
            sr::write_csv(recs, path);
            std::size_t ok = 0;
            for (const auto& r : recs) ok += r.success ? 1 : 0;
            std::printf("%s %zu/%zu success\n", path.c_str(), ok, recs.size());
        } else if (*pg) {
            const auto cfg = sr::parse_config(pg_config);
            const auto grid = sr::phase_grid(cfg, parse_list(pg_m), parse_list(pg_s), run);
            std::ostringstream csv;
            csv << "m,s,successes,trials,rate\n";
            for (const auto& c : grid.cells)
                csv << c.m << ',' << c.s << ',' << c.successes << ',' << c.trials << ','
                    << sr::io::format_double(c.rate) << '\n';
            const std::string path = out_path(g, "phase_grid.csv");
            sr::write_file_atomic(path, csv.str());
            std::printf("%s\n", path.c_str());
        } else if (*ns) {
            const auto cfg = sr::parse_config(ns_config);
            const auto rep = sr::noise_scaling_sweep(cfg, run);
            std::ostringstream csv;
            csv << "m,median_err_l2\n";
            for (std::size_t i = 0; i < rep.m_values.size(); ++i)
                csv << rep.m_values[i] << ',' << sr::io::format_double(rep.median_err_l2[i]) << '\n';
            const std::string path = out_path(g, "noise_sweep.csv");
            sr::write_file_atomic(path, csv.str());
            if (rep.skipped)
                std::printf("skipped %s\n", rep.reason.c_str());
            else
                std::printf("slope %.17g %.17g %.17g\n", rep.fit.slope, rep.fit.ci_low, rep.fit.ci_high);
        }
    } catch (const sr::InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    }
    return 0;
}
