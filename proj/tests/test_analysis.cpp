#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <sparserec/analysis.hpp>
#include <sparserec/ensembles.hpp>

#include "support/lp_oracle.hpp"
#include "support/nsp_oracle.hpp"

using namespace sparserec;

namespace {

DenseMatrix gaussian(std::size_t m, std::size_t n, std::uint64_t seed) {
    return sample_matrix({EnsembleKind::gaussian, 6.0, m, n, seed});
}

NspOptions raw_norm() {
    NspOptions o;
    o.normalize_by_m = false;
    return o;
}

// E||g||_2 for g ~ N(0, I_n).
double chi_mean(std::size_t n) {
    const double k = static_cast<double>(n);
    return std::sqrt(2.0) * std::exp(std::lgamma((k + 1.0) / 2.0) - std::lgamma(k / 2.0));
}

}  // namespace

// ---------------------------------------------------------------------------
// certify_nsp_q1

TEST(CertifyNsp, IdentityAtTauOneSitsOnTheBoundary) {
    // ||x_S||_1 <= rho ||x_{S^c}||_1 + ||x||_2 holds with equality at e_S.
    const auto cert = certify_nsp_q1(DenseMatrix::identity(4), 1, 0.5, 1.0, 2.0, 1e-6, raw_norm());
    EXPECT_NEAR(cert.worst_margin, 0.0, 1e-4);
    EXPECT_EQ(cert.verdict, NspVerdict::inconclusive);
}

TEST(CertifyNsp, IdentityCertifiedAboveTauOne) {
    const auto cert = certify_nsp_q1(DenseMatrix::identity(4), 1, 0.5, 1.1, 2.0, 1e-6, raw_norm());
    EXPECT_EQ(cert.verdict, NspVerdict::certified);
    EXPECT_LE(cert.worst_margin, -cert.tolerance);
    EXPECT_NEAR(cert.worst_margin, -0.1, 1e-4);
    EXPECT_FALSE(cert.witness.has_value());
}

TEST(CertifyNsp, ZeroMatrixRefutedWithUnitWitness) {
    const DenseMatrix Z(3, 5, 0.0);
    const auto cert = certify_nsp_q1(Z, 1, 0.5, 1.0, 2.0, 1e-6);
    ASSERT_EQ(cert.verdict, NspVerdict::refuted);
    EXPECT_NEAR(cert.worst_margin, 1.0, 1e-6);
    ASSERT_TRUE(cert.witness.has_value());
    const DenseVector& w = *cert.witness;
    EXPECT_NEAR(std::abs(w[0]), 1.0, 1e-6);
    for (std::size_t j = 1; j < w.size(); ++j) EXPECT_NEAR(w[j], 0.0, 1e-6);
}

TEST(CertifyNsp, RefutedWitnessViolatesByMoreThanTolerance) {
    const auto A = gaussian(4, 8, 11);
    const double tol = 1e-6;
    const auto cert = certify_nsp_q1(A, 2, 0.5, 0.5, 2.0, tol);
    ASSERT_EQ(cert.verdict, NspVerdict::refuted);
    ASSERT_TRUE(cert.witness.has_value());
    const auto S = top_s_indices(*cert.witness, 2);
    const double c = 0.5 / std::sqrt(4.0);
    EXPECT_GT(nsp_violation(A, *cert.witness, S, 0.5, c, 2.0), tol);
}

TEST(CertifyNsp, MarginsEnumerateEverySupportAndSign) {
    const auto cert = certify_nsp_q1(gaussian(6, 7, 3), 2, 0.5, 1.0, 2.0, 1e-6);
    ASSERT_EQ(cert.margins.size(), 21u * 4u);
    for (std::size_t k = 0; k < cert.margins.size(); ++k) {
        EXPECT_EQ(cert.margins[k].support_id, k / 4);
        EXPECT_EQ(cert.margins[k].sign_id, k % 4);
    }
    double worst = -kInf;
    for (const auto& mg : cert.margins) worst = std::max(worst, mg.margin);
    EXPECT_EQ(worst, cert.worst_margin);
}

TEST(CertifyNsp, MatchesLpOracleForPOne) {
    const std::size_t m = 8, n = 10, s = 2;
    const double rho = 0.5, tau = 2.0;
    const auto A = gaussian(m, n, 21);
    const auto cert = certify_nsp_q1(A, s, rho, tau, 1.0, 1e-6);
    const double c = tau / static_cast<double>(m);
    std::size_t support_id = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j, ++support_id)
            for (std::size_t sign_id = 0; sign_id < 4; ++sign_id) {
                const std::vector<double> signs = {sign_id & 1 ? -1.0 : 1.0, sign_id & 2 ? -1.0 : 1.0};
                const auto lp = lp_oracle::nsp_subproblem_lp(A, {i, j}, signs, rho, c);
                ASSERT_EQ(lp.status, lp_oracle::LpStatus::optimal);
                const auto& mg = cert.margins[support_id * 4 + sign_id];
                EXPECT_NEAR(mg.margin, 1.0 - lp.objective, 1e-3) << "support (" << i << "," << j << ") sign " << sign_id;
            }
}

TEST(CertifyNsp, Gaussian20x10AgreesWithSearchOracle) {
    const auto A = gaussian(20, 10, 7);
    for (double tau : {0.5, 2.0, 6.0}) {
        const auto cert = certify_nsp_q1(A, 2, 0.5, tau, 2.0, 1e-6);
        const double oracle = nsp_oracle::worst_margin(A, 2, 0.5, tau / std::sqrt(20.0), 2.0, 99);
        EXPECT_NEAR(cert.worst_margin, oracle, 1e-3) << "tau " << tau;
        if (oracle > 1e-3)
            EXPECT_EQ(cert.verdict, NspVerdict::refuted) << "tau " << tau;
        else if (oracle < -1e-3)
            EXPECT_EQ(cert.verdict, NspVerdict::certified) << "tau " << tau;
    }
}

TEST(CertifyNsp, GuardGivesInconclusive) {
    const DenseMatrix A(5, 30, 1.0);
    const auto cert = certify_nsp_q1(A, 6, 0.5, 1.0, 2.0, 1e-6);
    EXPECT_EQ(cert.verdict, NspVerdict::inconclusive);
    EXPECT_NE(cert.reason.find("guard"), std::string::npos);
    EXPECT_TRUE(cert.margins.empty());
}

TEST(CertifyNsp, RejectsBadArguments) {
    const auto I = DenseMatrix::identity(3);
    EXPECT_THROW(certify_nsp_q1(I, 0, 0.5, 1.0, 2.0, 1e-6), InvalidArgument);
    EXPECT_THROW(certify_nsp_q1(I, 4, 0.5, 1.0, 2.0, 1e-6), InvalidArgument);
    EXPECT_THROW(certify_nsp_q1(I, 1, 1.0, 1.0, 2.0, 1e-6), InvalidArgument);
    EXPECT_THROW(certify_nsp_q1(I, 1, 0.5, 0.0, 2.0, 1e-6), InvalidArgument);
    EXPECT_THROW(certify_nsp_q1(I, 1, 0.5, 1.0, 0.5, 1e-6), InvalidArgument);
}

TEST(NspViolation, HandExample) {
    const DenseMatrix A(1, 3, std::vector<double>{1.0, 1.0, 0.0});
    // head 2, tail 1, Ax = 1: 2 - 0.5 - 0.25 = 1.25
    EXPECT_DOUBLE_EQ(nsp_violation(A, DenseVector{2.0, -1.0, 0.0}, {0}, 0.5, 0.25, 2.0), 1.25);
}

// ---------------------------------------------------------------------------
// cone_infimum_estimate

TEST(ConeInfimum, IdentityIsIsometry) {
    const auto est = cone_infimum_estimate(DenseMatrix::identity(6), {0.5, 1, 2.0}, 2.0, 5, 1);
    EXPECT_LE(est.value, 1.0 + 1e-12);
    EXPECT_GE(est.value, 1.0 - 1e-6);
}

TEST(ConeInfimum, WitnessIsAUnitConeMember) {
    const ConeParams cp{0.5, 2, 2.0};
    const auto est = cone_infimum_estimate(gaussian(20, 40, 2), cp, 2.0, 4, 9);
    EXPECT_TRUE(cone_membership(est.witness, cp).member);
    EXPECT_NEAR(lp_norm(est.witness, 2.0), 1.0, 1e-9);
    EXPECT_NEAR(lp_norm(gaussian(20, 40, 2).multiply(est.witness), 2.0), est.value, 1e-9);
}

TEST(ConeInfimum, FullConeNeverAboveSparseOnly) {
    const ConeParams cp{0.5, 2, 2.0};
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto A = gaussian(16, 40, 100 + seed);
        ConeSearchOptions sparse;
        sparse.sparse_only = true;
        const auto a = cone_infimum_estimate(A, cp, 2.0, 4, seed, sparse);
        const auto b = cone_infimum_estimate(A, cp, 2.0, 4, seed);
        EXPECT_LE(b.value, a.value);
        EXPECT_LE(b.value, b.best_start_value);
        EXPECT_LE(a.value, a.best_start_value);
    }
}

TEST(ConeInfimum, GaussianBoundedAwayFromZero) {
    const std::size_t n = 64, s = 2;
    const std::size_t m = static_cast<std::size_t>(4.0 * std::ceil(2.0 * std::log(std::numbers::e * 64.0 / 2.0)));
    double lowest = kInf;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto est = cone_infimum_estimate(gaussian(m, n, 500 + seed), {0.5, s, 2.0}, 2.0, 3, seed);
        lowest = std::min(lowest, est.value / std::sqrt(static_cast<double>(m)));
    }
    EXPECT_GT(lowest, 0.05);
}

// ---------------------------------------------------------------------------
// rip_pq_estimate

TEST(RipEstimate, IdentityHasUnitConstants) {
    for (double p : {1.0, 2.0, 3.0})
        for (std::size_t s : {1u, 3u}) {
            const auto est = rip_pq_estimate(DenseMatrix::identity(8), s, p, p, 50, 4);
            EXPECT_NEAR(est.c_lower_est, 1.0, 1e-12);
            EXPECT_NEAR(est.C_upper_est, 1.0, 1e-12);
        }
}

TEST(RipEstimate, BracketsEveryTestedVector) {
    const auto A = gaussian(30, 50, 8);
    const auto est = rip_pq_estimate(A, 3, 1.0, 2.0, 200, 5);
    EXPECT_LE(est.c_lower_est, est.C_upper_est);
    EXPECT_EQ(est.method, RipMethod::local_search);
    for (std::size_t i = 0; i < 50; ++i) {
        DenseVector e(50, 0.0);
        e[i] = -1.0;
        const double r = rip_ratio(A, e, 1.0, 2.0);
        EXPECT_GE(r, est.c_lower_est);
        EXPECT_LE(r, est.C_upper_est);
    }
    EXPECT_DOUBLE_EQ(rip_ratio(A, est.argmin, 1.0, 2.0), est.c_lower_est);
    EXPECT_DOUBLE_EQ(rip_ratio(A, est.argmax, 1.0, 2.0), est.C_upper_est);
}

TEST(RipEstimate, NormalizedGaussianNearIsometry) {
    const std::size_t m = 400, n = 64;
    const auto A = gaussian(m, n, 12).scaled(1.0 / std::sqrt(static_cast<double>(m)));
    const auto est = rip_pq_estimate(A, 2, 2.0, 2.0, 500, 6);
    const double delta = 0.3;
    EXPECT_GE(est.c_lower_est, 1.0 - delta);
    EXPECT_LE(est.C_upper_est, 1.0 + delta);
}

TEST(RipEstimate, L1L1FailsForSpreadVectors) {
    const auto est = rip_pq_estimate(gaussian(200, 64, 13), 16, 1.0, 1.0, 300, 7);
    EXPECT_GE(est.C_upper_est / est.c_lower_est, 2.0);
}

// ---------------------------------------------------------------------------
// rip11_gap_demo

TEST(GapDemo, SingleColumnIsExactlyOne) {
    const auto g = rip11_gap_demo(50, 1, 20, 1);
    EXPECT_DOUBLE_EQ(g.mean_ratio.value, 1.0);
    EXPECT_DOUBLE_EQ(g.ratio_of_means, 1.0);
    EXPECT_DOUBLE_EQ(g.expected, 1.0);
}

TEST(GapDemo, MatchesClosedFormMeans) {
    const auto a = rip11_gap_demo(200, 16, 100, 2);
    EXPECT_NEAR(a.mean_ratio.value, 4.0, 0.4);
    const auto b = rip11_gap_demo(400, 64, 100, 3);
    EXPECT_NEAR(b.mean_ratio.value, 8.0, 0.8);
}

// ---------------------------------------------------------------------------
// small_ball_estimate

TEST(SmallBall, ZeroThresholdIsCertain) {
    const EnsembleSpec g{EnsembleKind::gaussian, 6.0, 1, 5, 0};
    EXPECT_EQ(small_ball_estimate(g, DenseVector(5, 1.0), 0.0, 500, 1).value, 1.0);
}

TEST(SmallBall, GaussianMedianOfAbsoluteValue) {
    const EnsembleSpec g{EnsembleKind::gaussian, 6.0, 1, 8, 0};
    const DenseVector x = {1, -2, 0, 3, 0.5, 0, 0, 1};
    const auto e = small_ball_estimate(g, x, 0.6745, 20000, 2);
    EXPECT_NEAR(e.value, 0.5, 3.0 * e.std_error);
    EXPECT_NEAR(e.half_width, 1.96 * e.std_error, 1e-15);
}

TEST(SmallBall, HeavyTailPaleyZygmund) {
    const EnsembleSpec h{EnsembleKind::heavy_tail, 6.0, 1, 4, 0};
    const double m2 = entry_abs_moment(h, 2.0), m4 = entry_abs_moment(h, 4.0);
    DenseVector e1(4, 0.0);
    e1[0] = 1.0;
    for (double u : {0.0, 0.1, 0.2, 0.3}) {
        const auto e = small_ball_estimate(h, e1, u, 20000, 3);
        const double pz = (m2 - u * u) * (m2 - u * u) / m4;
        EXPECT_GE(e.value, pz - 3.0 * e.std_error) << "u " << u;
    }
}

TEST(SmallBall, NonincreasingInThreshold) {
    const EnsembleSpec r{EnsembleKind::rademacher, 6.0, 1, 6, 0};
    const DenseVector x = {1, 1, 0, -1, 0, 2};
    double prev = 1.0;
    for (double u = 0.0; u <= 2.0; u += 0.1) {
        const double v = small_ball_estimate(r, x, u, 3000, 4).value;
        EXPECT_LE(v, prev);
        prev = v;
    }
}

// ---------------------------------------------------------------------------
// Rademacher supremum and width

TEST(RademacherSup, TopSStatisticByHand) {
    EXPECT_DOUBLE_EQ(top_s_l2(DenseVector{3, -4, 1}, 2), 5.0);
    EXPECT_DOUBLE_EQ(top_s_l2(DenseVector{3, -4, 1}, 3), std::sqrt(26.0));
}

TEST(RademacherSup, FullSupportIsChiMean) {
    const EnsembleSpec g{EnsembleKind::gaussian, 6.0, 5, 64, 0};
    const auto e = rademacher_sup_estimate(g, 5, 64, 400, 5);
    EXPECT_NEAR(e.value, std::sqrt(64.0), 0.05 * 8.0);
    EXPECT_NEAR(e.value, chi_mean(64), 4.0 * e.std_error);
}

TEST(RademacherSup, MonotoneInSparsity) {
    const EnsembleSpec r{EnsembleKind::rademacher, 6.0, 10, 32, 0};
    double prev = 0.0;
    for (std::size_t s = 1; s <= 32; s *= 2) {
        const double v = rademacher_sup_estimate(r, 10, s, 50, 6).value;
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(RademacherSup, BelowGaussianWidthBound) {
    for (auto [n, s] : {std::pair<std::size_t, std::size_t>{64, 2}, {256, 8}}) {
        const EnsembleSpec g{EnsembleKind::gaussian, 6.0, 20, n, 0};
        const auto e = rademacher_sup_estimate(g, 20, s, 100, 7);
        EXPECT_LE(e.value, gaussian_width_bound(n, s) * (1.0 + 3.0 * e.std_error));
    }
}

TEST(GaussianWidth, Examples) {
    EXPECT_DOUBLE_EQ(gaussian_width_bound(1, 1), std::sqrt(2.0) + 1.0);
    EXPECT_NEAR(gaussian_width_bound(64, 4), std::sqrt(8.0 * std::log(16.0 * std::numbers::e)) + 2.0, 1e-12);
    double prev = 0.0;
    for (std::size_t n = 3; n < 2000; n = n * 3 / 2) {
        const double w = gaussian_width_bound(n, 3);
        EXPECT_GE(w, prev);
        prev = w;
    }
    EXPECT_THROW(gaussian_width_bound(3, 4), InvalidArgument);
}

// ---------------------------------------------------------------------------
// kom13 and the pipeline

TEST(Kom13, Examples) {
    EXPECT_NEAR(kom13_lower_bound(1.0, 2.0, 0.5, 0.01, 1.0, 100).value, 0.36, 1e-12);
    EXPECT_DOUBLE_EQ(kom13_lower_bound(0.7, 3.0, 0.4, 0.0, 0.0, 9).value, std::pow(0.7, 3.0) * 0.4);
    EXPECT_DOUBLE_EQ(kom13_lower_bound(1.0, 1.0, 0.5, 0.0, 1.5, 10).failure_probability, 2.0 * std::exp(-4.5));
    EXPECT_LT(kom13_lower_bound(1.0, 2.0, 0.1, 0.5, 1.0, 4).value, 0.0);
    EXPECT_THROW(kom13_lower_bound(0.0, 2.0, 0.5, 0.0, 0.0, 1), InvalidArgument);
    EXPECT_THROW(kom13_lower_bound(1.0, 2.0, 1.5, 0.0, 0.0, 1), InvalidArgument);
}

TEST(Pipeline, SingleMeasurementIsVacuous) {
    PipelineOptions o;
    o.width_trials = 10;
    const auto r = pipeline_check_theorem3(64, 2, 2.0, 0.5, 1, 1, o);
    EXPECT_FALSE(r.positive);
    EXPECT_LE(r.bound.value, 0.0);
    EXPECT_NEAR(r.bound.failure_probability, 0.05, 1e-12);
    // P(|g| >= 2 u_*) = 0.55
    EXPECT_NEAR(std::erfc(2.0 * r.u_star / std::sqrt(2.0)), 0.55, 1e-12);
}

TEST(Pipeline, BoundImprovesWithM) {
    PipelineOptions o;
    o.width_trials = 10;
    double prev = -kInf;
    bool seen_positive = false;
    for (std::size_t m : {1u, 10u, 100u, 1000u, 10000u, 300000u}) {
        const auto r = pipeline_check_theorem3(64, 2, 2.0, 0.5, m, 2, o);
        EXPECT_GT(r.bound.value, prev) << "m " << m;
        if (seen_positive) EXPECT_TRUE(r.positive) << "m " << m;
        seen_positive = seen_positive || r.positive;
        prev = r.bound.value;
    }
    EXPECT_TRUE(seen_positive);
}
