#pragma once

// Seeded samplers for the measurement ensembles and the closed-form moments
// used to validate them.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstdint>
#include <string>

#include "core.hpp"
#include "rng.hpp"

namespace sparserec {

enum class EnsembleKind { gaussian, rademacher, sym_exponential, heavy_tail, logconcave_l1ball };

inline const char* to_string(EnsembleKind k) {
    switch (k) {
        case EnsembleKind::gaussian: return "gaussian";
        case EnsembleKind::rademacher: return "rademacher";
        case EnsembleKind::sym_exponential: return "sym_exponential";
        case EnsembleKind::heavy_tail: return "heavy_tail";
        case EnsembleKind::logconcave_l1ball: return "logconcave_l1ball";
    }
    return "?";
}

inline EnsembleKind parse_ensemble_kind(const std::string& s) {
    for (auto k : {EnsembleKind::gaussian, EnsembleKind::rademacher, EnsembleKind::sym_exponential,
                   EnsembleKind::heavy_tail, EnsembleKind::logconcave_l1ball})
        if (s == to_string(k)) return k;
    throw InvalidArgument("unknown ensemble kind '" + s + "'");
}

/// True when entries of the ensemble are i.i.d. scalars.
inline bool has_iid_entries(EnsembleKind k) { return k != EnsembleKind::logconcave_l1ball; }

/// Sufficient condition gamma >= max{log n + 2, 6} for heavy-tailed entries.
inline bool heavy_tail_condition_met(double gamma, std::size_t n) {
    return gamma >= std::max(std::log(static_cast<double>(n)) + 2.0, 6.0);
}

struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::gaussian;
    double gamma = 6.0;  ///< tail exponent, heavy_tail only
    std::size_t m = 1;
    std::size_t n = 1;
    std::uint64_t seed = 0;

    void validate() const {
        require(m >= 1 && n >= 1, "EnsembleSpec: m and n must be >= 1");
        if (kind == EnsembleKind::heavy_tail) require(gamma > 1.0, "EnsembleSpec: heavy_tail needs gamma > 1");
    }

    /// Whether the recovery guarantee's tail condition holds (heavy_tail only;
    /// other kinds always report true). Sampling does not depend on it.
    bool tail_condition_met() const {
        return kind != EnsembleKind::heavy_tail || heavy_tail_condition_met(gamma, n);
    }

    bool operator==(const EnsembleSpec&) const = default;
};

/// Radius making the uniform distribution on r * B_{l1^n} isotropic:
/// a coordinate of the uniform law on B_{l1^n} has variance 2/((n+1)(n+2)).
inline double l1ball_isotropic_radius(std::size_t n) {
    const double nn = static_cast<double>(n);
    return std::sqrt((nn + 1.0) * (nn + 2.0) / 2.0);
}

/// One heavy-tailed scalar with density (g-1)/(2g) min{1, |x|^-g}.
inline double sample_heavy_tail(RngStream& rng, double gamma) {
    // P(|xi| <= 1) = (g-1)/g, uniform there; P(|xi| > t) = t^{-(g-1)}/g beyond.
    const double sgn = rng.sign();
    if (rng.uniform() * gamma < gamma - 1.0) return sgn * rng.uniform();
    return sgn * std::pow(rng.uniform_open(), -1.0 / (gamma - 1.0));
}

/// Fills one row of the ensemble.
inline void sample_row(const EnsembleSpec& spec, RngStream& rng, MutVec out) {
    switch (spec.kind) {
        case EnsembleKind::gaussian:
            for (double& v : out) v = rng.normal();
            break;
        case EnsembleKind::rademacher:
            for (double& v : out) v = rng.sign();
            break;
        case EnsembleKind::sym_exponential:
            for (double& v : out) v = rng.sign() * rng.exponential();
            break;
        case EnsembleKind::heavy_tail:
            for (double& v : out) v = sample_heavy_tail(rng, spec.gamma);
            break;
        case EnsembleKind::logconcave_l1ball: {
            // (s_i E_i / sum_{j<=n+1} E_j) is uniform on B_{l1^n}.
            double total = 0.0;
            for (double& v : out) {
                v = rng.exponential();
                total += v;
            }
            total += rng.exponential();
            const double scale = l1ball_isotropic_radius(out.size()) / total;
            for (double& v : out) v *= rng.sign() * scale;
            break;
        }
    }
}

inline DenseMatrix sample_matrix(const EnsembleSpec& spec) {
    spec.validate();
    RngStream rng(spec.seed);
    DenseMatrix A(spec.m, spec.n);
    for (std::size_t i = 0; i < spec.m; ++i) sample_row(spec, rng, A.row(i));
    return A;
}

/// Matrix with i.i.d. entries from an arbitrary scalar sampler
/// `double(RngStream&)`; the extension point for further subgaussian laws.
template <class EntrySampler>
DenseMatrix sample_iid_matrix(std::size_t m, std::size_t n, RngStream& rng, EntrySampler&& entry) {
    DenseMatrix A(m, n);
    for (double& v : A.data()) v = entry(rng);
    return A;
}

/// Monte Carlo estimate of the radius that makes the l1-ball law isotropic.
inline double calibrate_l1ball_radius(std::size_t n, std::size_t samples, std::uint64_t seed) {
    RngStream rng(seed);
    DenseVector e(n + 1);
    DenseVector sq;
    sq.reserve(samples * n);
    for (std::size_t k = 0; k < samples; ++k) {
        double total = 0.0;
        for (double& v : e) {
            v = rng.exponential();
            total += v;
        }
        for (std::size_t i = 0; i < n; ++i) sq.push_back((e[i] / total) * (e[i] / total));
    }
    const double var = pairwise_sum(sq) / static_cast<double>(sq.size());
    return 1.0 / std::sqrt(var);
}

/// E|xi|^p for the heavy-tailed law; +infinity once p >= gamma - 1.
inline double heavy_tail_moment(double gamma, double p) {
    require(gamma > 1.0, "heavy_tail_moment: gamma must exceed 1");
    require(p >= 0.0, "heavy_tail_moment: p must be >= 0");
    if (p >= gamma - 1.0) return kInf;
    return (gamma - 1.0) / gamma * (1.0 / (gamma - p - 1.0) + 1.0 / (p + 1.0));
}

/// E|xi|^r for the i.i.d.-entry ensembles, in closed form.
inline double entry_abs_moment(const EnsembleSpec& spec, double r) {
    switch (spec.kind) {
        case EnsembleKind::gaussian:
            return std::pow(2.0, r / 2.0) * boost::math::tgamma((r + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
        case EnsembleKind::rademacher: return 1.0;
        case EnsembleKind::sym_exponential: return boost::math::tgamma(r + 1.0);
        case EnsembleKind::heavy_tail: return heavy_tail_moment(spec.gamma, r);
        case EnsembleKind::logconcave_l1ball: break;
    }
    throw InvalidArgument("entry_abs_moment: ensemble does not have i.i.d. entries");
}

/// E|xi|^r = 2 * int_0^inf x^r p(x) dx for a symmetric density, by adaptive
/// Gauss-Kronrod on [0,1] and [1,inf).
template <class Density>
double abs_moment_quadrature(Density&& density, double r) {
    using boost::math::quadrature::gauss_kronrod;
    auto f = [&](double x) { return std::pow(x, r) * density(x); };
    // x = e^u on the tail turns power-law decay into exponential decay.
    auto g = [&](double u) {
        const double x = std::exp(u);
        const double v = f(x) * x;
        return std::isfinite(v) ? v : 0.0;  // inf * 0 far out in the tail
    };
    const double head = gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-14);
    const double tail = gauss_kronrod<double, 61>::integrate(g, 0.0, kInf, 15, 1e-14);
    return 2.0 * (head + tail);
}

/// Smallest lambda with (E|xi|^r)^{1/r} <= lambda r^alpha for 2 <= r <= log n,
/// for alpha = 1/2 and alpha = 1.
struct MomentReport {
    int r_max = 2;
    double lambda_half = 0.0;
    double lambda_one = 0.0;
};

template <class MomentFn>
MomentReport moment_condition_from(MomentFn&& moment, std::size_t n) {
    MomentReport rep;
    rep.r_max = std::max(2, static_cast<int>(std::floor(std::log(static_cast<double>(n)))));
    for (int r = 2; r <= rep.r_max; ++r) {
        const double rr = r;
        const double norm = std::pow(moment(rr), 1.0 / rr);
        rep.lambda_half = std::max(rep.lambda_half, norm / std::sqrt(rr));
        rep.lambda_one = std::max(rep.lambda_one, norm / rr);
    }
    return rep;
}

inline MomentReport moment_condition_check(const EnsembleSpec& spec, std::size_t n) {
    require(has_iid_entries(spec.kind), "moment_condition_check: ensemble does not have i.i.d. entries");
    if (spec.kind == EnsembleKind::heavy_tail) require(spec.gamma > 1.0, "moment_condition_check: gamma must exceed 1");
    return moment_condition_from([&](double r) { return entry_abs_moment(spec, r); }, n);
}

/// Variant for a user-supplied symmetric density, moments by quadrature.
template <class Density>
MomentReport moment_condition_check_density(Density&& density, std::size_t n) {
    return moment_condition_from([&](double r) { return abs_moment_quadrature(density, r); }, n);
}

}  // namespace sparserec
