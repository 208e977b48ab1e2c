#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "bistrip/config.hpp"
#include "bistrip/zero_order.hpp"
#include "fixtures.hpp"
#include "mode_checks.hpp"

using namespace bistrip;

namespace {

StripConfig equal_speed_bimaterial() {
    // Same wavespeed as iron, half the modulus.
    return fixtures::strip(fixtures::iron, Material{41e9, 3930}, 2.0, 2.0, 4.0);
}

} // namespace

TEST(DispersionMatrix, LowFrequencyLimitOfFirstRow) {
    const auto k = derive_constants(fixtures::fe_al());
    const auto M = assemble_M(1e-12, 0.0, k);
    const double expect[8] = {0, 0, 0, 1, 0, 0, 0, -1};
    for (int q = 0; q < 8; ++q) EXPECT_NEAR(std::abs(M.m(0, q) - expect[q]), 0.0, 1e-11) << q;
}

TEST(DispersionMatrix, BlochEntries) {
    const auto k = derive_constants(fixtures::fe_al());
    const double w = 0.7, K = 0.3;
    const auto M = assemble_M(w, K, k);
    const double Sa = std::sin(w * 3.0), Ca = std::cos(w * 3.0);
    const cd Z = std::polar(1.0, -K * 6.0);
    EXPECT_NEAR(std::abs(M.m(6, 0) + Sa), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(M.m(6, 1) - Ca), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(M.m(6, 6) + Z * Sa), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(M.m(7, 7) - Z * Sa), 0.0, 1e-15);
}

TEST(DispersionMatrix, JunctionRowsIndependentOfK) {
    const auto k = derive_constants(fixtures::fe_al_asymmetric());
    const auto M0 = assemble_M(1.3, 0.0, k), M1 = assemble_M(1.3, 0.4, k);
    EXPECT_EQ((M0.m.topRows(6) - M1.m.topRows(6)).norm(), 0.0);
    EXPECT_GT((M0.m.bottomRows(2) - M1.m.bottomRows(2)).norm(), 0.1);
}

TEST(DispersionMatrix, RejectsNonPositiveFrequency) {
    const auto k = derive_constants(fixtures::fe_al());
    EXPECT_THROW(assemble_M(0.0, 0.0, k), std::invalid_argument);
}

TEST(Determinant, PhasedDeterminantIsReal) {
    std::mt19937_64 rng(11);
    for (auto c : {fixtures::fe_al(), fixtures::mg_al(0.6), fixtures::fe_al_asymmetric(5.4)}) {
        const auto k = derive_constants(c);
        std::uniform_real_distribution<double> w(1e-3, 6.0), K(-pi / 6.0, pi / 6.0);
        for (int i = 0; i < 1000; ++i) {
            const double wi = w(rng), Ki = K(rng);
            const cd d = assemble_M(wi, Ki, k).m.determinant();
            const cd p = std::polar(1.0, Ki * 6.0) * d;
            ASSERT_LE(std::abs(p.imag()), 1e-10 * (1.0 + std::abs(d))) << wi << " " << Ki;
        }
    }
}

TEST(Determinant, CosineReconstruction) {
    // A and B from K = 0 and K = pi/a, independent of the library's sampling points.
    std::mt19937_64 rng(5);
    const auto k = derive_constants(fixtures::fe_al_asymmetric());
    std::uniform_real_distribution<double> w(0.05, 5.0), K(0.0, pi / 6.0);
    for (int i = 0; i < 20; ++i) {
        const double wi = w(rng);
        const double f0 = reduced_determinant(wi, 0.0, k), fpi = reduced_determinant(wi, pi / 6.0, k);
        const double A = (f0 - fpi) / 4.0, B = (f0 + fpi) / 2.0;
        const auto lib = determinant_coefficients(wi, k);
        EXPECT_NEAR(lib.A, A, 1e-9 * (std::abs(A) + std::abs(B)));
        EXPECT_NEAR(lib.B, B, 1e-9 * (std::abs(A) + std::abs(B)));
        const double Ki = K(rng);
        const double direct = reduced_determinant(wi, Ki, k);
        EXPECT_NEAR(2 * A * std::cos(Ki * 6.0) + B, direct, 1e-9 * (std::abs(direct) + std::abs(A) + std::abs(B)));
    }
}

TEST(Determinant, HomogeneousStandingZeros) {
    const auto k = derive_constants(fixtures::iron_symmetric());
    for (int n = 1; n <= 3; ++n) {
        const double w = n * pi / (2.0 * k.xB);
        const auto c = determinant_coefficients(w, k);
        const auto off = determinant_coefficients(w * 1.01, k);
        EXPECT_LT(std::abs(c.A), 1e-10 * std::abs(off.A)) << n;
        EXPECT_LT(std::abs(c.B), 1e-10 * (std::abs(off.A) + std::abs(off.B))) << n;
    }
}

TEST(Roots, StandingWaveOfHomogeneousStrip) {
    const auto k = derive_constants(fixtures::iron_symmetric());
    const double expected = pi * k.d1 / 2.0;
    for (double K : {0.0, 0.2, pi / 6.0}) {
        const auto roots = find_branches(K, 1.2 * expected, k);
        bool seen = false;
        for (const auto &p : roots) {
            if (std::abs(p.omega0 - expected) < 1e-9 * expected) {
                seen = true;
                EXPECT_EQ(p.classification, BranchClass::Standing);
            }
        }
        EXPECT_TRUE(seen) << "K=" << K;
    }
}

TEST(Roots, PropagatingBranchesOfHomogeneousStrip) {
    // Away from the standing frequencies the homogeneous strip carries
    // omega = d |K + 2 pi n / a|.
    const auto k = derive_constants(fixtures::iron_symmetric());
    const double K = 0.37 * pi / 6.0;
    const auto roots = find_branches(K, 3000.0, k);
    ASSERT_FALSE(roots.empty());
    EXPECT_NEAR(roots.front().omega0, k.d1 * K, 1e-8 * k.d1 * K);
    EXPECT_EQ(roots.front().classification, BranchClass::Propagating);
}

TEST(Roots, EqualSpeedStandingBranchIsFlat) {
    for (auto c : {fixtures::iron_symmetric(), equal_speed_bimaterial()}) {
        const auto k = derive_constants(c);
        const DispersionScan scan(k, default_omega_max(k));
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i <= 20; ++i) {
            for (const auto &p : scan.roots(pi / 6.0 * i / 20.0)) {
                if (p.classification != BranchClass::Standing || p.omega0 > 1.5 * pi * k.d1 / c.l) continue;
                lo = std::min(lo, p.omega0);
                hi = std::max(hi, p.omega0);
            }
        }
        ASSERT_LT(lo, 1e300);
        EXPECT_LT((hi - lo) / lo, 1e-6);
    }
}

TEST(Roots, AgreeWithDenseSignChangeScan) {
    const auto k = derive_constants(fixtures::fe_al());
    const double K = 0.41 * pi / 6.0, omega_max = 12000.0;
    const auto roots = find_branches(K, omega_max, k);
    const int n = 100000;
    const double h = omega_max / n / k.d1;
    std::vector<double> brackets;
    double prev = reduced_determinant(h, K, k);
    for (int i = 2; i <= n; ++i) {
        const double f = reduced_determinant(i * h, K, k);
        if (f * prev < 0.0) brackets.push_back((i - 1) * h);
        prev = f;
    }
    ASSERT_EQ(roots.size(), brackets.size());
    for (std::size_t i = 0; i < roots.size(); ++i) {
        EXPECT_GE(roots[i].varpi0, brackets[i]);
        EXPECT_LE(roots[i].varpi0, brackets[i] + h);
        EXPECT_EQ(roots[i].branch_index, static_cast<int>(i));
        EXPECT_LE(roots[i].residual, 1e-8);
    }
}

TEST(Roots, ScanStepHalvingKeepsRoots) {
    const auto k = derive_constants(fixtures::fe_al_asymmetric(0.6));
    RootSettings fine;
    fine.points_per_spacing *= 2;
    const double K = 0.29, omega_max = default_omega_max(k);
    const auto a = find_branches(K, omega_max, k), b = find_branches(K, omega_max, k, fine);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i].varpi0, b[i].varpi0, 1e-11 * a[i].varpi0);
}

TEST(Roots, PeriodicAndEvenInK) {
    const auto k = derive_constants(fixtures::mg_al());
    const DispersionScan scan(k, 8000.0);
    const double K = 0.13;
    const auto a = scan.roots(K), b = scan.roots(-K), c = scan.roots(K + 2 * pi / 6.0);
    ASSERT_EQ(a.size(), b.size());
    ASSERT_EQ(a.size(), c.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_NEAR(a[i].omega0, b[i].omega0, 1e-9 * a[i].omega0);
        EXPECT_NEAR(a[i].omega0, c[i].omega0, 1e-9 * a[i].omega0);
    }
}

TEST(Roots, EmptyWindowBelowFirstBranch) {
    const auto k = derive_constants(fixtures::fe_al());
    EXPECT_TRUE(find_branches(pi / 6.0, 100.0, k).empty());
    EXPECT_THROW(find_branches(0.0, -1.0, k), std::invalid_argument);
}

TEST(NullVector, SatisfiesJunctionAndBlochConditions) {
    for (auto c : {fixtures::fe_al(), fixtures::mg_al(0.6), fixtures::fe_al_asymmetric(5.4),
                   fixtures::with_kappa_star(fixtures::fe_al(), 2.88)}) {
        const auto k = derive_constants(c);
        const DispersionScan scan(k, default_omega_max(k));
        for (double K : {0.0, 0.21, pi / 6.0}) {
            for (const auto &p : scan.roots(K)) {
                if (p.degenerate) continue;
                const auto A0 = null_vector(p, k);
                EXPECT_NEAR(A0.entries.cwiseAbs().maxCoeff(), 1.0, 1e-15);
                const auto M = assemble_M(p.varpi0, K, k);
                EXPECT_LE((M.m * A0.entries).norm(), 1e-8 * A0.entries.norm());
                EXPECT_LE(checks::zero_order_residual(A0, k, K), 1e-8) << "omega0=" << p.omega0;
            }
        }
    }
}

TEST(NullVector, RejectsNonRoot) {
    const auto k = derive_constants(fixtures::fe_al());
    BranchPoint p;
    p.K = 0.1;
    p.varpi0 = 0.77;
    p.omega0 = p.varpi0 * k.d1;
    EXPECT_THROW(null_vector(p, k), NullVectorError);
}

TEST(ModeEvaluation, SegmentBoundsChecked) {
    const auto k = derive_constants(fixtures::fe_al());
    ModeCoefficients c;
    c.omega0 = 1000.0;
    EXPECT_NO_THROW(eval_mode0(c, k, 2, 0.0));
    EXPECT_THROW(eval_mode0(c, k, 1, 0.0), std::out_of_range);
    EXPECT_THROW(eval_mode0(c, k, 5, 0.0), std::out_of_range);
}

TEST(ModeEvaluation, DerivativeMatchesFiniteDifference) {
    const auto k = derive_constants(fixtures::fe_al_asymmetric());
    const auto roots = find_branches(0.3, default_omega_max(k), k);
    ASSERT_FALSE(roots.empty());
    const auto A0 = null_vector(roots.back(), k);
    const double h = 1e-5;
    for (int m = 1; m <= 4; ++m) {
        const double x = m == 1 ? -2.0 : m == 4 ? 2.0 : 0.3;
        const cd fd = (eval_mode0(A0, k, m, x + h) - eval_mode0(A0, k, m, x - h)) / (2 * h);
        EXPECT_NEAR(std::abs(fd - eval_mode0_derivative(A0, k, m, x)), 0.0, 1e-6 * std::abs(fd) + 1e-9);
    }
}

TEST(ModeScore, SeparatesStandingFromPropagating) {
    const auto k = derive_constants(fixtures::fe_al());
    const auto roots = find_branches(pi / 18.0, default_omega_max(k), k);
    for (const auto &p : roots) {
        if (p.classification == BranchClass::Standing) {
            EXPECT_GT(p.mode_score, 0.5);
        }
        if (p.classification == BranchClass::Propagating) {
            EXPECT_LT(p.mode_score, 0.1);
        }
    }
}

TEST(Classification, Thresholds) {
    RootSettings s;
    EXPECT_EQ(classify(1e-6, 0.9, 1.0, s), BranchClass::Standing);
    EXPECT_EQ(classify(0.9, 0.01, 1.0, s), BranchClass::Propagating);
    EXPECT_EQ(classify(0.9, 0.3, 1.0, s), BranchClass::Unclassified);
    EXPECT_EQ(classify(0.1, 0.01, 1.0, s), BranchClass::Unclassified);
    EXPECT_EQ(classify(std::nan(""), 0.0, 1.0, s), BranchClass::Unclassified);
    EXPECT_EQ(branch_class_from_string("standing"), BranchClass::Standing);
    EXPECT_THROW(branch_class_from_string("flat"), std::invalid_argument);
}
