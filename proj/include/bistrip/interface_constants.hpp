// Junction-condition constants alpha_P (perfect bond) and alpha_I (imperfect
// bond), both defined by improper integrals over (0, inf).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "bistrip/model.hpp"
#include "bistrip/quadrature.hpp"

namespace bistrip {

struct QuadratureSettings {
    double abs_tol = 1e-14;
    double rel_tol = 1e-10;
    double t_max = 200.0;          // nominal end of the finite integration range
    double t_min = 0.02;           // below this the integrands switch to their Taylor forms
    std::size_t max_subdivisions = 1000000;
};

inline void check(const QuadratureSettings &q) {
    if (!(q.t_min > 0.0 && q.t_min < 1.0 && q.t_max > 1.0))
        throw ConfigError("quadrature: require 0 < t_min < 1 < t_max");
    if (!(q.abs_tol > 0.0 && q.rel_tol > 0.0)) throw ConfigError("quadrature: tolerances must be > 0");
}

struct AlphaResult {
    double value = 0.0;           // m (unscaled length)
    double estimated_error = 0.0; // m
    InterfaceKind kind = InterfaceKind::Perfect;
};

namespace integrand {

/// f(t) = (H* - tanh(t H*) coth t) / ((sinh t + mu* sinh(t H*)) t).
/// Finite at t -> 0+; evaluated from the Taylor expansion of the
/// numerator below t_series and in exponentially scaled form above t = 20.
inline double perfect(double t, double mu, double H, double t_series) {
    if (H == 0.0) return 0.0;
    if (t < t_series) {
        // H tanh t - tanh(H t) = sum_k c_k (H - H^(2k+1)) t^(2k+1)
        static constexpr std::array<double, 6> c = {1.0, -1.0 / 3.0, 2.0 / 15.0, -17.0 / 315.0,
                                                    62.0 / 2835.0, -1382.0 / 155925.0};
        double num = 0.0, tp = t, Hp = H;
        for (std::size_t k = 1; k < c.size(); ++k) {
            tp *= t * t;
            Hp *= H * H;
            num += c[k] * (H - Hp) * tp;
        }
        return num / (std::tanh(t) * (std::sinh(t) + mu * std::sinh(H * t)) * t);
    }
    const double num = H - std::tanh(H * t) / std::tanh(t);
    if (t <= 20.0) return num / ((std::sinh(t) + mu * std::sinh(H * t)) * t);
    const double scaled = 1.0 - std::exp(-2.0 * t) + mu * (std::exp((H - 1.0) * t) - std::exp(-(H + 1.0) * t));
    return 2.0 * num * std::exp(-t) / (t * scaled);
}

struct ImperfectParams {
    double beta1, gamma1, beta2, gamma2, lambda;
};

inline ImperfectParams imperfect_params(const DerivedConstants &k) {
    return {2.0 / (k.kappa_star * (1.0 + k.mu_star)), 0.5 * (1.0 + k.H_star),
            2.0 / (k.kappa_star * (1.0 - k.mu_star)), 0.5 * (1.0 - k.H_star), k.lambda_star};
}

// (z coth z - 1) / z^2, smooth through z = 0.
inline double zcoth_minus_one_over_z2(double z, double z_series) {
    if (z < z_series) {
        const double z2 = z * z;
        return 1.0 / 3.0 + z2 * (-1.0 / 45.0 + z2 * (2.0 / 945.0 + z2 * (-1.0 / 4725.0 + z2 * (2.0 / 93555.0))));
    }
    return (z / std::tanh(z) - 1.0) / (z * z);
}

/// g(t) - 1, written so that the poles of the two coth terms cancel
/// analytically against lambda*^2.
inline double g_minus_one(double t, const ImperfectParams &p, double z_series) {
    const double s = p.beta1 * p.gamma1 * zcoth_minus_one_over_z2(p.gamma1 * t, z_series) +
                     p.beta2 * p.gamma2 * zcoth_minus_one_over_z2(p.gamma2 * t, z_series);
    return s * t * t / (p.lambda * p.lambda + t * t);
}

/// g(t) exactly as written, for checks; ill-conditioned near t = 0.
inline double g_direct(double t, const ImperfectParams &p) {
    return t / (p.lambda * p.lambda + t * t) *
           (t + p.beta1 / std::tanh(t * p.gamma1) + p.beta2 / std::tanh(t * p.gamma2));
}

/// ln g(t) / t^2, finite at t -> 0+.
inline double imperfect(double t, const ImperfectParams &p, double z_series) {
    const double s = p.beta1 * p.gamma1 * zcoth_minus_one_over_z2(p.gamma1 * t, z_series) +
                     p.beta2 * p.gamma2 * zcoth_minus_one_over_z2(p.gamma2 * t, z_series);
    const double x_over_t2 = s / (p.lambda * p.lambda + t * t);
    const double x = x_over_t2 * t * t;
    const double log1p_ratio = std::abs(x) < 1e-8 ? 1.0 - 0.5 * x : std::log1p(x) / x;
    return x_over_t2 * log1p_ratio;
}

/// Limit of ln g(t)/t^2 as t -> 0+.
inline double imperfect_at_zero(const ImperfectParams &p) {
    return (p.beta1 * p.gamma1 + p.beta2 * p.gamma2) / (3.0 * p.lambda * p.lambda);
}

/// Closed-form integral of ln g(t)/t^2 over (T, inf) with coth replaced by 1.
inline double imperfect_tail(double T, const ImperfectParams &p) {
    const double u0 = 1.0 / T;
    const double beta = p.beta1 + p.beta2;
    const double x = beta * u0;
    const double i1 = ((1.0 + x) * std::log1p(x) - x) / beta;
    const double z = p.lambda * u0;
    double i2;
    if (z < 0.5) {
        // sum_n (-1)^(n+1) z^(2n) u0 / (n (2n + 1))
        i2 = 0.0;
        double zp = 1.0;
        for (int n = 1; n <= 40; ++n) {
            zp *= z * z;
            i2 += (n % 2 ? 1.0 : -1.0) * zp / (n * (2.0 * n + 1.0));
        }
        i2 *= u0;
    } else {
        i2 = u0 * std::log1p(z * z) - 2.0 * u0 + 2.0 / p.lambda * std::atan(z);
    }
    return i1 - i2;
}

} // namespace integrand

inline AlphaResult alpha_perfect(const DerivedConstants &k, const QuadratureSettings &q = {}) {
    check(q);
    if (k.kind != InterfaceKind::Perfect)
        throw std::invalid_argument("alpha_perfect requires a perfect interface (kappa = 0)");
    const double mu = k.mu_star, H = k.H_star;
    double integral = 0.0, err = 0.0;
    if (mu != 0.0 && H != 0.0) {
        auto f = [&](double t) { return integrand::perfect(t, mu, H, q.t_min); };
        const double T = q.t_max;
        const auto r = integrate_adaptive(f, 0.0, T, q.abs_tol, q.rel_tol, q.max_subdivisions);
        // |f| <= 4 e^-t / ((1 - |mu*|) t) beyond T.
        const double tail = 4.04 * std::exp(-T) / ((1.0 - std::abs(mu)) * T);
        integral = r.value;
        err = r.error + tail;
    }
    const double log_term = 0.5 * (1.0 + H) * std::log(0.5 * (1.0 + H)) + 0.5 * (1.0 - H) * std::log(0.5 * (1.0 - H));
    const double scale = k.H_total() / pi;
    AlphaResult out;
    out.value = scale * (mu * integral - log_term);
    out.estimated_error = scale * (std::abs(mu) * err + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(log_term));
    out.kind = InterfaceKind::Perfect;
    return out;
}

inline AlphaResult alpha_imperfect(const DerivedConstants &k, const QuadratureSettings &q = {}) {
    check(q);
    if (k.kind != InterfaceKind::Imperfect || !(k.cfg.kappa > 0.0))
        throw std::invalid_argument("alpha_imperfect requires an imperfect interface (kappa > 0)");
    const auto p = integrand::imperfect_params(k);
    // Extend the range until both coth terms equal 1 to working precision.
    const double T = std::max(q.t_max, 25.0 / std::min(p.gamma1, p.gamma2));
    auto f = [&](double t) { return integrand::imperfect(t, p, q.t_min); };
    const auto r = integrate_adaptive(f, 0.0, T, q.abs_tol, q.rel_tol, q.max_subdivisions);
    const double tail = integrand::imperfect_tail(T, p);
    // coth z - 1 <= 2.0001 e^-2z for z >= 25
    const double coth_bound = 2.0001 * (p.beta1 * std::exp(-2.0 * p.gamma1 * T) / p.gamma1 +
                                        p.beta2 * std::exp(-2.0 * p.gamma2 * T) / p.gamma2) / (T * T);
    const double integral = r.value + tail;
    AlphaResult out;
    out.value = k.H_total() * (integral / pi + 1.0 / p.lambda);
    out.estimated_error = k.H_total() * ((r.error + coth_bound) / pi +
                                         8.0 * std::numeric_limits<double>::epsilon() * std::abs(integral / pi));
    out.kind = InterfaceKind::Imperfect;
    return out;
}

/// alpha_P or alpha_I according to the interface kind.
inline AlphaResult alpha_for(const DerivedConstants &k, const QuadratureSettings &q = {}) {
    return k.kind == InterfaceKind::Perfect ? alpha_perfect(k, q) : alpha_imperfect(k, q);
}

} // namespace bistrip
