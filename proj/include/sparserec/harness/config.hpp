#pragma once

// Experiment configuration and its plain-text format:
//
//   [experiment]            [ensemble]          [signal]
//   trials = 100            kind = gaussian     n = 64
//   base_seed = 1           gamma = 6           s = 2
//   m_values = 36, 72                           kind = flat_signs
//   p = 2                   [noise]             alpha = 1
//   q = 2                   rule = fixed        normalize = none
//                           epsilon = 0
//   [solver]                theta = 0.5
//   max_iters = 100000
//   tol_feas = 1e-8, tol_obj = 1e-7, primal_step = 0, dual_step = 0,
//   operator_norm_iters = 200   (one key per line)
//
// '#' and ';' start comments. Unknown sections or keys are errors.

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../core.hpp"
#include "../ensembles.hpp"
#include "../io.hpp"
#include "../solvers.hpp"
#include "signal.hpp"

namespace sparserec {

class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

enum class EpsilonRule { fixed, noise_scaled, quantizer };

inline const char* to_string(EpsilonRule r) {
    switch (r) {
        case EpsilonRule::fixed: return "fixed";
        case EpsilonRule::noise_scaled: return "noise_scaled";
        case EpsilonRule::quantizer: return "quantizer";
    }
    return "?";
}

inline EpsilonRule parse_epsilon_rule(const std::string& s) {
    if (s == "fixed") return EpsilonRule::fixed;
    if (s == "noise_scaled") return EpsilonRule::noise_scaled;
    if (s == "quantizer") return EpsilonRule::quantizer;
    throw ConfigError("unknown epsilon rule '" + s + "'");
}

struct ExperimentConfig {
    EnsembleSpec ensemble;  ///< m, n and seed are set per trial
    SignalSpec signal;
    double p = 2.0;
    double q = 2.0;  ///< exponent of the err_lq column
    EpsilonRule epsilon_rule = EpsilonRule::fixed;
    double epsilon = 0.0;  ///< fixed and noise_scaled
    double theta = 1.0;    ///< quantizer bin width
    std::vector<std::size_t> m_values;
    std::size_t trials = 1;
    std::uint64_t base_seed = 0;
    SolverConfig solver;

    void validate() const {
        signal.validate();
        require(!m_values.empty(), "ExperimentConfig: m_values must be nonempty");
        for (std::size_t m : m_values) require(m >= 1, "ExperimentConfig: every m must be >= 1");
        require(trials >= 1, "ExperimentConfig: trials must be >= 1");
        require(p >= 1.0 && (std::isinf(p) || p <= kMaxFiniteBallExponent), "ExperimentConfig: p out of range");
        require(q >= 1.0, "ExperimentConfig: q must be >= 1");
        require(epsilon >= 0.0 && std::isfinite(epsilon), "ExperimentConfig: epsilon must be finite and >= 0");
        require(theta > 0.0 && std::isfinite(theta), "ExperimentConfig: theta must be > 0");
        if (ensemble.kind == EnsembleKind::heavy_tail) require(ensemble.gamma > 1.0, "ExperimentConfig: gamma must be > 1");
        solver.validate();
    }

    bool operator==(const ExperimentConfig&) const = default;
};

/// Smallest m in the optimal regime: prefactor * ceil(s log(e n / s)).
inline std::size_t optimal_regime_m(std::size_t n, std::size_t s, double prefactor = 4.0) {
    const double ss = static_cast<double>(s);
    return static_cast<std::size_t>(prefactor * std::ceil(ss * std::log(std::numbers::e * static_cast<double>(n) / ss)));
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct ConfigEntry {
    std::string value;
    int line = 0;
};

inline double parse_real(const ConfigEntry& e, const std::string& key) {
    if (e.value == "inf") return kInf;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(e.value.c_str(), &end);
    if (e.value.empty() || *end != '\0' || errno == ERANGE)
        throw ConfigError("line " + std::to_string(e.line) + ": '" + key + "' expects a number, got '" + e.value + "'");
    return v;
}

inline std::uint64_t parse_uint(const ConfigEntry& e, const std::string& key) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(e.value.c_str(), &end, 10);
    if (e.value.empty() || e.value[0] == '-' || *end != '\0' || errno == ERANGE)
        throw ConfigError("line " + std::to_string(e.line) + ": '" + key + "' expects a nonnegative integer, got '" +
                          e.value + "'");
    return v;
}

}  // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text) {
    static const std::map<std::string, std::set<std::string>> kSchema = {
        {"experiment", {"trials", "base_seed", "m_values", "p", "q"}},
        {"ensemble", {"kind", "gamma"}},
        {"signal", {"n", "s", "kind", "alpha", "normalize"}},
        {"noise", {"rule", "epsilon", "theta"}},
        {"solver", {"max_iters", "primal_step", "dual_step", "tol_feas", "tol_obj", "operator_norm_iters"}},
    };
    std::map<std::string, detail::ConfigEntry> entries;
    std::istringstream in(text);
    std::string raw, section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find_first_of("#;");
        const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (!kSchema.count(section)) throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        if (section.empty()) throw ConfigError(where + "key outside of any section");
        const std::string key = detail::trim(line.substr(0, eq));
        if (!kSchema.at(section).count(key)) throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
        const std::string full = section + "." + key;
        if (entries.count(full)) throw ConfigError(where + "duplicate key '" + full + "'");
        entries[full] = {detail::trim(line.substr(eq + 1)), line_no};
    }

    auto get = [&](const std::string& k) -> const detail::ConfigEntry& {
        auto it = entries.find(k);
        if (it == entries.end()) throw ConfigError("missing required key '" + k + "'");
        return it->second;
    };
    auto has = [&](const std::string& k) { return entries.count(k) > 0; };
    auto wrap = [&](const std::string& k, auto fn) {
        try {
            return fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const InvalidArgument& e) {
            throw ConfigError("line " + std::to_string(get(k).line) + ": " + e.what());
        }
    };

    ExperimentConfig cfg;
    cfg.trials = detail::parse_uint(get("experiment.trials"), "trials");
    cfg.base_seed = detail::parse_uint(get("experiment.base_seed"), "base_seed");
    cfg.p = detail::parse_real(get("experiment.p"), "p");
    if (has("experiment.q")) cfg.q = detail::parse_real(get("experiment.q"), "q");
    {
        const auto& e = get("experiment.m_values");
        std::stringstream ss(e.value);
        std::string item;
        while (std::getline(ss, item, ','))
            cfg.m_values.push_back(detail::parse_uint({detail::trim(item), e.line}, "m_values"));
    }

    cfg.ensemble.kind = wrap("ensemble.kind", [&] { return parse_ensemble_kind(get("ensemble.kind").value); });
    if (has("ensemble.gamma")) cfg.ensemble.gamma = detail::parse_real(get("ensemble.gamma"), "gamma");

    cfg.signal.n = detail::parse_uint(get("signal.n"), "n");
    cfg.signal.s = detail::parse_uint(get("signal.s"), "s");
    cfg.signal.kind = wrap("signal.kind", [&] { return parse_signal_kind(get("signal.kind").value); });
    if (has("signal.alpha")) cfg.signal.alpha = detail::parse_real(get("signal.alpha"), "alpha");
    if (has("signal.normalize"))
        cfg.signal.normalize =
            wrap("signal.normalize", [&] { return parse_signal_normalization(get("signal.normalize").value); });

    cfg.epsilon_rule = wrap("noise.rule", [&] { return parse_epsilon_rule(get("noise.rule").value); });
    if (has("noise.epsilon")) cfg.epsilon = detail::parse_real(get("noise.epsilon"), "epsilon");
    if (has("noise.theta")) cfg.theta = detail::parse_real(get("noise.theta"), "theta");

    auto& sv = cfg.solver;
    if (has("solver.max_iters")) sv.max_iters = static_cast<int>(detail::parse_uint(get("solver.max_iters"), "max_iters"));
    if (has("solver.primal_step")) sv.primal_step = detail::parse_real(get("solver.primal_step"), "primal_step");
    if (has("solver.dual_step")) sv.dual_step = detail::parse_real(get("solver.dual_step"), "dual_step");
    if (has("solver.tol_feas")) sv.tol_feas = detail::parse_real(get("solver.tol_feas"), "tol_feas");
    if (has("solver.tol_obj")) sv.tol_obj = detail::parse_real(get("solver.tol_obj"), "tol_obj");
    if (has("solver.operator_norm_iters"))
        sv.operator_norm_iters = static_cast<int>(detail::parse_uint(get("solver.operator_norm_iters"), "operator_norm_iters"));

    cfg.ensemble.n = cfg.signal.n;
    try {
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

inline std::string format_config(const ExperimentConfig& cfg) {
    using io::format_double;
    std::ostringstream os;
    os << "[experiment]\n";
    os << "trials = " << cfg.trials << "\n";
    os << "base_seed = " << cfg.base_seed << "\n";
    os << "m_values = ";
    for (std::size_t i = 0; i < cfg.m_values.size(); ++i) os << (i ? ", " : "") << cfg.m_values[i];
    os << "\n";
    os << "p = " << format_double(cfg.p) << "\n";
    os << "q = " << format_double(cfg.q) << "\n\n";
    os << "[ensemble]\n";
    os << "kind = " << to_string(cfg.ensemble.kind) << "\n";
    os << "gamma = " << format_double(cfg.ensemble.gamma) << "\n\n";
    os << "[signal]\n";
    os << "n = " << cfg.signal.n << "\n";
    os << "s = " << cfg.signal.s << "\n";
    os << "kind = " << to_string(cfg.signal.kind) << "\n";
    os << "alpha = " << format_double(cfg.signal.alpha) << "\n";
    os << "normalize = " << to_string(cfg.signal.normalize) << "\n\n";
    os << "[noise]\n";
    os << "rule = " << to_string(cfg.epsilon_rule) << "\n";
    os << "epsilon = " << format_double(cfg.epsilon) << "\n";
    os << "theta = " << format_double(cfg.theta) << "\n\n";
    os << "[solver]\n";
    os << "max_iters = " << cfg.solver.max_iters << "\n";
    os << "primal_step = " << format_double(cfg.solver.primal_step) << "\n";
    os << "dual_step = " << format_double(cfg.solver.dual_step) << "\n";
    os << "tol_feas = " << format_double(cfg.solver.tol_feas) << "\n";
    os << "tol_obj = " << format_double(cfg.solver.tol_obj) << "\n";
    os << "operator_norm_iters = " << cfg.solver.operator_norm_iters << "\n";
    return os.str();
}

inline void write_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write config '" + path + "'");
    out << format_config(cfg);
}

}  // namespace sparserec
