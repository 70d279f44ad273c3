#pragma once

// Proximal maps and Euclidean projections onto lp balls.

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "core.hpp"

namespace sparserec {

/// Largest finite p accepted by project_ball; p = infinity is also accepted.
inline constexpr double kMaxFiniteBallExponent = 128.0;

/// {u : ||u - center||_p <= radius}
struct BallSpec {
    double p = 2.0;
    double radius = 0.0;
    DenseVector center;

    void validate() const {
        require(p >= 1.0, "BallSpec: p must be >= 1");
        require(std::isinf(p) || p <= kMaxFiniteBallExponent, "BallSpec: finite p above 128 is not supported");
        require(radius >= 0.0, "BallSpec: radius must be >= 0");
        require_finite(center, "BallSpec center");
    }
};

inline void soft_threshold(ConstVec x, double lambda, MutVec out) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = std::abs(x[i]) - lambda;
        out[i] = a > 0.0 ? std::copysign(a, x[i]) : 0.0;
    }
}

/// sign(x_i) max(|x_i| - lambda, 0)
inline DenseVector soft_threshold(ConstVec x, double lambda) {
    require(lambda >= 0.0, "soft_threshold: lambda must be >= 0");
    DenseVector out(x.size());
    soft_threshold(x, lambda, out);
    return out;
}

namespace detail {

/// Projection of d (in place) onto the centered l1 ball; sort-and-threshold.
inline void project_l1_centered(MutVec d, double radius, DenseVector& scratch) {
    double l1 = 0.0;
    for (double v : d) l1 += std::abs(v);
    if (l1 <= radius) return;
    if (radius == 0.0) {
        std::fill(d.begin(), d.end(), 0.0);
        return;
    }
    scratch.resize(d.size());
    std::transform(d.begin(), d.end(), scratch.begin(), [](double v) { return std::abs(v); });
    std::sort(scratch.begin(), scratch.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < scratch.size(); ++j) {
        cumsum += scratch[j];
        const double t = (cumsum - radius) / static_cast<double>(j + 1);
        if (scratch[j] - t > 0.0)
            theta = t;
        else
            break;
    }
    for (double& v : d) {
        const double a = std::abs(v) - theta;
        v = a > 0.0 ? std::copysign(a, v) : 0.0;
    }
}

/// Root v in (0, a) of v + mu v^{p-1} = a, with the power evaluated in logs.
inline double solve_coordinate(double a, double log_mu, double p) {
    if (a == 0.0) return 0.0;
    double lo = 0.0, hi = a;
    double v = a / 2.0;
    // Newton crawls from the right when p is large; bisect whenever the
    // bracket failed to halve over two steps.
    double width_prev = a, width_prev2 = a;
    for (int it = 0; it < 400; ++it) {
        const double pw = std::exp(log_mu + (p - 1.0) * std::log(v));
        const double h = v + pw - a;
        if (h > 0.0)
            hi = v;
        else
            lo = v;
        if (hi - lo <= 4e-16 * a) break;
        const double dh = 1.0 + (p - 1.0) * pw / v;
        double next = v - h / dh;
        if (!(next > lo && next < hi) || hi - lo > 0.5 * width_prev2) next = 0.5 * (lo + hi);
        width_prev2 = width_prev;
        width_prev = hi - lo;
        if (next == v) break;
        v = next;
    }
    return v;
}

/// Projection of d (in place) onto the centered lp ball, 1 < p < inf.
/// The multiplier mu of the KKT system u_i + mu u_i^{p-1} = |d_i| is found by
/// bracketing and TOMS 748 on t = log mu.
inline void project_lp_centered(MutVec d, double p, double radius, DenseVector& mag) {
    double amax = 0.0;
    for (double v : d) amax = std::max(amax, std::abs(v));
    if (amax == 0.0) return;
    if (lp_norm(d, p) <= radius) return;
    if (radius == 0.0) {
        std::fill(d.begin(), d.end(), 0.0);
        return;
    }
    // Work on |d| / max|d| so every power stays in [0, 1].
    const double r = radius / amax;
    mag.resize(d.size());
    DenseVector v(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) mag[i] = std::abs(d[i]) / amax;

    auto solve_all = [&](double t) {
        for (std::size_t i = 0; i < mag.size(); ++i) v[i] = solve_coordinate(mag[i], t, p);
    };
    auto phi = [&](double t) {
        solve_all(t);
        return lp_norm(v, p) - r;
    };

    double t_hi = 0.0;
    double f_hi = phi(t_hi);
    double t_lo = t_hi, f_lo = f_hi;
    if (f_hi > 0.0) {
        while (f_hi > 0.0 && t_hi < 745.0) {
            t_lo = t_hi;
            f_lo = f_hi;
            t_hi += 4.0;
            f_hi = phi(t_hi);
        }
    } else {
        while (f_lo <= 0.0 && t_lo > -745.0) {
            t_hi = t_lo;
            f_hi = f_lo;
            t_lo -= 4.0;
            f_lo = phi(t_lo);
        }
    }
    if (f_hi < 0.0 && f_lo > 0.0) {
        std::uintmax_t max_iter = 200;
        auto tol = [&](double a, double b) { return std::abs(b - a) <= 1e-15 * std::max(1.0, std::abs(a)); };
        const auto bracket = boost::math::tools::toms748_solve(phi, t_lo, t_hi, f_lo, f_hi, tol, max_iter);
        t_hi = bracket.second;
    }
    solve_all(t_hi);
    // Pull back onto the sphere if the root landed a hair outside.
    const double nv = lp_norm(v, p);
    const double shrink = nv > r ? r / nv : 1.0;
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::copysign(v[i] * shrink * amax, d[i]);
}

}  // namespace detail

/// Euclidean projection onto a ball, writing into `out` (may alias `x`).
/// `scratch` is reused between calls to avoid allocation in solver loops.
inline void project_ball(ConstVec x, double p, double radius, ConstVec center, MutVec out, DenseVector& scratch) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - center[i];
    if (std::isinf(p)) {
        for (double& v : out) v = std::clamp(v, -radius, radius);
    } else if (p == 2.0) {
        const double nrm = lp_norm(out, 2.0);
        if (nrm > radius) {
            const double f = radius / nrm;
            for (double& v : out) v *= f;
        }
    } else if (p == 1.0) {
        detail::project_l1_centered(out, radius, scratch);
    } else {
        detail::project_lp_centered(out, p, radius, scratch);
    }
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += center[i];
}

inline DenseVector project_ball(ConstVec x, const BallSpec& ball) {
    ball.validate();
    require(ball.center.size() == x.size(), "project_ball: center dimension mismatch");
    require_finite(x, "project_ball");
    DenseVector out(x.size());
    DenseVector scratch;
    project_ball(x, ball.p, ball.radius, ball.center, out, scratch);
    return out;
}

}  // namespace sparserec
