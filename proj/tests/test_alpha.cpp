#include <cmath>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "bistrip/interface_constants.hpp"
#include "bistrip/quadrature.hpp"
#include "fixtures.hpp"

using namespace bistrip;

namespace {

// Reference values from double-exponential quadrature of the integrands as
// written, in long double, away from t = 0. Near the origin a midpoint value
// covers (0, delta].
long double perfect_integrand_naive(long double t, long double mu, long double H) {
    const long double num = H - std::tanh(t * H) / std::tanh(t);
    return num / ((std::sinh(t) + mu * std::sinh(t * H)) * t);
}

double alpha_perfect_reference(const DerivedConstants &k) {
    const long double mu = k.mu_star, H = k.H_star;
    const long double delta = 1e-4L;
    boost::math::quadrature::tanh_sinh<long double> ts;
    auto f = [&](long double t) { return perfect_integrand_naive(t, mu, H); };
    long double integral = ts.integrate(f, delta, 40.0L, 1e-16L);
    integral += delta * f(delta / 2);
    const long double p = (1 + H) / 2, q = (1 - H) / 2;
    const long double log_term = p * std::log(p) + q * std::log(q);
    return static_cast<double>((k.H_total() / M_PIl) * (mu * integral - log_term));
}

double alpha_imperfect_reference(const DerivedConstants &k) {
    const long double ks = k.kappa_star, mu = k.mu_star, H = k.H_star;
    const long double b1 = 2 / (ks * (1 + mu)), g1 = (1 + H) / 2, b2 = 2 / (ks * (1 - mu)), g2 = (1 - H) / 2;
    const long double lam = k.lambda_star;
    auto g = [&](long double t) {
        return t / (lam * lam + t * t) * (t + b1 / std::tanh(t * g1) + b2 / std::tanh(t * g2));
    };
    auto f = [&](long double t) { return std::log(g(t)) / (t * t); };
    const long double delta = 1e-4L;
    boost::math::quadrature::exp_sinh<long double> es;
    long double integral = es.integrate([&](long double t) { return f(t + delta); }, 1e-16L);
    integral += delta * f(delta / 2);
    return static_cast<double>(k.H_total() * (integral / M_PIl + 1 / lam));
}

} // namespace

TEST(Quadrature, SmoothAndEndpointSingularIntegrals) {
    const auto r = integrate_adaptive([](double x) { return std::exp(x); }, 0.0, 1.0, 1e-15, 1e-13, 1000);
    EXPECT_NEAR(r.value, std::exp(1.0) - 1.0, 1e-13);
    const auto s = integrate_adaptive([](double x) { return std::sqrt(x); }, 0.0, 1.0, 1e-14, 1e-12, 100000);
    EXPECT_NEAR(s.value, 2.0 / 3.0, 1e-12);
    EXPECT_LE(std::abs(s.value - 2.0 / 3.0), s.error + 1e-15);
}

TEST(Quadrature, SubdivisionLimitCarriesPartialResult) {
    try {
        integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-16, 1e-15, 8);
        FAIL() << "expected QuadratureError";
    } catch (const QuadratureError &e) {
        EXPECT_GT(e.partial().value, 1.0);
        EXPECT_GT(e.partial().error, 0.0);
    }
}

TEST(AlphaPerfect, ZeroContrastClosedForm) {
    const auto k = derive_constants(fixtures::iron_symmetric());
    const auto a = alpha_perfect(k);
    EXPECT_NEAR(a.value, 6.0 * std::log(2.0) / pi, 1e-10);
    EXPECT_GE(a.estimated_error, 0.0);
}

TEST(AlphaPerfect, ZeroModulusContrastLeavesLogTermOnly) {
    // mu* = 0 with unequal thicknesses: alpha_P = -(H/pi) ln[p^p q^q].
    const auto k = derive_constants(fixtures::strip(fixtures::iron, fixtures::iron, 2.0, 1.0, 5.0));
    const double p = (1 + k.H_star) / 2, q = (1 - k.H_star) / 2;
    EXPECT_NEAR(alpha_perfect(k).value, -(6.0 / pi) * (p * std::log(p) + q * std::log(q)), 1e-12);
}

TEST(AlphaPerfect, LogTermSymmetricInThicknessContrast) {
    const auto a = alpha_perfect(derive_constants(fixtures::strip(fixtures::iron, fixtures::iron, 2.0, 1.0, 5.0)));
    const auto b = alpha_perfect(derive_constants(fixtures::strip(fixtures::iron, fixtures::iron, 2.0, 5.0, 1.0)));
    EXPECT_NEAR(a.value, b.value, 1e-13);
}

TEST(AlphaPerfect, AgreesWithDoubleExponentialReference) {
    for (auto c : {fixtures::fe_al(), fixtures::mg_al(), fixtures::fe_al_asymmetric(),
                   fixtures::strip(fixtures::aluminium, fixtures::iron, 2.0, 0.4, 5.6)}) {
        const auto k = derive_constants(c);
        const auto a = alpha_perfect(k);
        EXPECT_NEAR(a.value, alpha_perfect_reference(k), 1e-9);
        EXPECT_LT(a.estimated_error, 1e-9);
    }
}

TEST(AlphaPerfect, RejectsImperfectInterface) {
    EXPECT_THROW(alpha_perfect(derive_constants(fixtures::with_kappa_star(fixtures::fe_al(), 2.88))),
                 std::invalid_argument);
}

TEST(AlphaImperfect, AgreesWithDoubleExponentialReference) {
    for (double ks : {2.88, 28.8, 0.3}) {
        for (auto c : {fixtures::fe_al(), fixtures::mg_al(), fixtures::fe_al_asymmetric()}) {
            const auto k = derive_constants(fixtures::with_kappa_star(c, ks));
            const auto a = alpha_imperfect(k);
            EXPECT_NEAR(a.value, alpha_imperfect_reference(k), 1e-9 * std::max(1.0, std::abs(a.value)))
                << "kappa*=" << ks;
        }
    }
}

TEST(AlphaImperfect, IntegrandLimitIsOne) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.95, 0.95), lk(-1.0, 2.0);
    for (int i = 0; i < 100; ++i) {
        auto c = fixtures::fe_al();
        const double mu = u(rng), H = u(rng);
        c.upper.shear_modulus = 1e10 * (1 + mu);
        c.lower.shear_modulus = 1e10 * (1 - mu);
        c.H1 = 3 * (1 + H);
        c.H2 = 3 * (1 - H);
        c = fixtures::with_kappa_star(c, std::pow(10.0, lk(rng)));
        const auto p = integrand::imperfect_params(derive_constants(c));
        EXPECT_NEAR(integrand::g_direct(1e-7, p), 1.0, 1e-10);
        EXPECT_NEAR(integrand::g_minus_one(1e-7, p, 0.02), 0.0, 1e-10);
        EXPECT_TRUE(std::isfinite(integrand::imperfect(0.0, p, 0.02)));
        EXPECT_NEAR(integrand::imperfect(0.0, p, 0.02), integrand::imperfect_at_zero(p),
                    1e-12 * integrand::imperfect_at_zero(p));
    }
}

TEST(AlphaImperfect, SensitiveToKappa) {
    const auto c = fixtures::with_kappa_star(fixtures::fe_al(), 2.88);
    auto c2 = c;
    c2.kappa *= 2.0;
    const double a1 = alpha_imperfect(derive_constants(c)).value, a2 = alpha_imperfect(derive_constants(c2)).value;
    EXPECT_GT(std::abs(a1 - a2), 1e-3 * std::abs(a1));
}

TEST(AlphaImperfect, RejectsPerfectInterface) {
    EXPECT_THROW(alpha_imperfect(derive_constants(fixtures::fe_al())), std::invalid_argument);
}

TEST(Alpha, TruncationRobustness) {
    for (auto c : {fixtures::fe_al(), fixtures::with_kappa_star(fixtures::fe_al_asymmetric(), 2.88)}) {
        const auto k = derive_constants(c);
        QuadratureSettings q;
        const auto a = alpha_for(k, q);
        q.t_min /= 2.0;
        q.t_max *= 2.0;
        const auto b = alpha_for(k, q);
        EXPECT_LE(std::abs(a.value - b.value), 10.0 * a.estimated_error + 1e-14);
    }
}

TEST(Alpha, SettingsValidated) {
    QuadratureSettings q;
    q.t_min = 0.0;
    EXPECT_THROW(alpha_for(derive_constants(fixtures::fe_al()), q), ConfigError);
}
