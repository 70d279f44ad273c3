#pragma once

// Test signals: exactly sparse (flat or Gaussian coefficients) and
// compressible with power-law decay.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "../core.hpp"
#include "../rng.hpp"

namespace sparserec {

enum class SignalKind { flat_signs, gaussian_coeffs, compressible };
enum class SignalNormalization { none, unit_l2 };

inline const char* to_string(SignalKind k) {
    switch (k) {
        case SignalKind::flat_signs: return "flat_signs";
        case SignalKind::gaussian_coeffs: return "gaussian_coeffs";
        case SignalKind::compressible: return "compressible";
    }
    return "?";
}

inline const char* to_string(SignalNormalization k) { return k == SignalNormalization::none ? "none" : "unit_l2"; }

inline SignalKind parse_signal_kind(const std::string& s) {
    if (s == "flat_signs") return SignalKind::flat_signs;
    if (s == "gaussian_coeffs") return SignalKind::gaussian_coeffs;
    if (s == "compressible") return SignalKind::compressible;
    throw InvalidArgument("unknown signal kind '" + s + "'");
}

inline SignalNormalization parse_signal_normalization(const std::string& s) {
    if (s == "none") return SignalNormalization::none;
    if (s == "unit_l2") return SignalNormalization::unit_l2;
    throw InvalidArgument("unknown signal normalization '" + s + "'");
}

struct SignalSpec {
    std::size_t n = 64;
    std::size_t s = 2;
    SignalKind kind = SignalKind::flat_signs;
    double alpha = 1.0;  ///< decay exponent, compressible only
    SignalNormalization normalize = SignalNormalization::none;

    void validate() const {
        require(n >= 1, "SignalSpec: n must be >= 1");
        require(s >= 1 && s <= n, "SignalSpec: need 1 <= s <= n");
        if (kind == SignalKind::compressible) require(alpha > 0.0, "SignalSpec: alpha must be > 0");
    }

    bool operator==(const SignalSpec&) const = default;
};

/// s distinct indices drawn uniformly from [0, n), returned sorted.
inline std::vector<std::size_t> random_support(RngStream& rng, std::size_t n, std::size_t s) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < s; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(s);
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Compressible signals carry magnitudes i^{-alpha}, i = 1..n, on a random
/// permutation with random signs, so every entry is nonzero.
inline DenseVector generate_signal(const SignalSpec& spec, RngStream& rng) {
    spec.validate();
    DenseVector x(spec.n, 0.0);
    if (spec.kind == SignalKind::compressible) {
        std::vector<std::size_t> order(spec.n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = spec.n; i-- > 1;) std::swap(order[i], order[rng.below(i + 1)]);
        for (std::size_t i = 0; i < spec.n; ++i)
            x[order[i]] = rng.sign() * std::pow(static_cast<double>(i + 1), -spec.alpha);
    } else {
        for (std::size_t j : random_support(rng, spec.n, spec.s))
            x[j] = spec.kind == SignalKind::flat_signs ? rng.sign() : rng.normal();
    }
    if (spec.normalize == SignalNormalization::unit_l2) {
        const double nx = lp_norm(x, 2.0);
        if (nx > 0.0)
            for (double& v : x) v /= nx;
    }
    return x;
}

}  // namespace sparserec
