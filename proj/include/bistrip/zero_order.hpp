// Zero-order low-dimensional model: the 8x8 dispersion matrix, its reduced
// determinant, dispersion roots, mode coefficients and mode evaluation.
#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "bistrip/model.hpp"

namespace bistrip {

using cd = std::complex<double>;
using Matrix8cd = Eigen::Matrix<cd, 8, 8>;
using Vector8cd = Eigen::Matrix<cd, 8, 1>;

enum class BranchClass { Standing, Propagating, Unclassified };

inline const char *to_string(BranchClass c) {
    switch (c) {
    case BranchClass::Standing: return "standing";
    case BranchClass::Propagating: return "propagating";
    default: return "unclassified";
    }
}

inline BranchClass branch_class_from_string(const std::string &s) {
    if (s == "standing") return BranchClass::Standing;
    if (s == "propagating") return BranchClass::Propagating;
    if (s == "unclassified") return BranchClass::Unclassified;
    throw std::invalid_argument("unknown branch class '" + s + "'");
}

/// Coefficients [A1 B1 A2 B2 A3 B3 A4 B4] of order 0 or 1, together with the
/// zero-order frequency they belong to.
struct ModeCoefficients {
    int order = 0;
    double omega0 = 0.0;
    Vector8cd entries = Vector8cd::Zero();
    bool degenerate = false; // second-smallest singular value close to the smallest
};

struct BranchPoint {
    double K = 0.0;
    double omega0 = 0.0;
    double varpi0 = 0.0; // omega0 / d1
    BranchClass classification = BranchClass::Unclassified;
    double residual = 0.0;
    /// d1 * a * |d varpi0 / d cos(Ka)|: bounds the group speed and, unlike
    /// it, stays nonzero for propagating branches at the zone edges.
    double speed_scale = 0.0;
    bool degenerate = false;
    int branch_index = 0;
    /// 1 - (energy of the flux-weighted thickness average) / (total energy):
    /// 0 when both layers move together, 1 for zero net flux.
    double mode_score = std::numeric_limits<double>::quiet_NaN();
};

struct DispersionMatrix {
    Matrix8cd m;
    double K = 0.0;
    double varpi0 = 0.0;
};

namespace detail {

struct Trig {
    double S[5], C[5]; // index 1..4
    double psi1, psi2, Sa, Ca;
};

inline Trig trig(double varpi0, const DerivedConstants &k) {
    Trig t{};
    for (int m = 1; m <= 4; ++m) {
        const double arg = k.d1 / k.d(m) * varpi0 * k.xB;
        t.S[m] = std::sin(arg);
        t.C[m] = std::cos(arg);
    }
    t.psi1 = k.mu1H1 / k.flux_sum * k.d1 / k.d2;
    t.psi2 = k.mu2H2 / k.flux_sum * k.d1 / k.d3;
    t.Sa = std::sin(varpi0 * k.cfg.a / 2.0);
    t.Ca = std::cos(varpi0 * k.cfg.a / 2.0);
    return t;
}

} // namespace detail

/// Rows: 1-2 displacement continuity at xB (segments 2, 3 against 4), 3 flux
/// balance at xB, 4-5 displacement continuity at xA (segments 2, 3 against 1),
/// 6 flux balance at xA, 7-8 Bloch-Floquet conditions. Flux and Bloch
/// derivative rows are divided by omega0/d1.
inline DispersionMatrix assemble_M(double varpi0, double K, const DerivedConstants &k) {
    if (!(varpi0 > 0.0)) throw std::invalid_argument("assemble_M: varpi0 must be > 0");
    const auto t = detail::trig(varpi0, k);
    const cd Z = std::polar(1.0, -K * k.cfg.a);
    const auto &S = t.S;
    const auto &C = t.C;
    DispersionMatrix out;
    out.K = K;
    out.varpi0 = varpi0;
    // clang-format off
    out.m <<
        0,      0,     S[2],          C[2],          0,             0,             -S[4],     -C[4],
        0,      0,     0,             0,             S[3],          C[3],          -S[4],     -C[4],
        0,      0,     t.psi1 * C[2], -t.psi1 * S[2], t.psi2 * C[3], -t.psi2 * S[3], -C[4],     S[4],
        S[1],   -C[1], -S[2],         C[2],          0,             0,             0,         0,
        S[1],   -C[1], 0,             0,             -S[3],         C[3],          0,         0,
        -C[1],  -S[1], t.psi1 * C[2], t.psi1 * S[2], t.psi2 * C[3], t.psi2 * S[3], 0,         0,
        -t.Sa,  t.Ca,  0,             0,             0,             0,             -Z * t.Sa, -Z * t.Ca,
        t.Ca,   t.Sa,  0,             0,             0,             0,             -Z * t.Ca, Z * t.Sa;
    // clang-format on
    return out;
}

/// e^{iKa} det M, which should be real: 2 A(varpi0) cos(Ka) + B(varpi0).
inline cd phased_determinant(double varpi0, double K, const DerivedConstants &k) {
    const auto M = assemble_M(varpi0, K, k);
    return std::polar(1.0, K * k.cfg.a) * M.m.determinant();
}

inline double reduced_determinant(double varpi0, double K, const DerivedConstants &k) {
    const cd v = phased_determinant(varpi0, K, k);
    assert(std::abs(v.imag()) <= 1e-10 * (1.0 + std::abs(v)) && "imaginary residual: M assembled incorrectly");
    return v.real();
}

/// A(varpi0) and B(varpi0) in 2A cos(Ka) + B.
struct DeterminantCoefficients {
    double A = 0.0, B = 0.0;
};

inline DeterminantCoefficients determinant_coefficients(double varpi0, const DerivedConstants &k) {
    const double at0 = reduced_determinant(varpi0, 0.0, k);
    const double atq = reduced_determinant(varpi0, pi / (2.0 * k.cfg.a), k);
    return {0.5 * (at0 - atq), atq};
}

struct RootSettings {
    double root_tol = 1e-8;           // |reduced determinant| accepted at a root
    double rel_bracket = 1e-12;       // final bracket width relative to varpi0
    int points_per_spacing = 2000;    // scan density per pi d_min / a in omega
    double standing_speed = 1e-3;     // speed_scale below this * d1 -> Standing
    double propagating_speed = 0.5;   // speed_scale above this * d1 -> Propagating
    double hybrid_score = 0.1;        // propagating only while the mode score stays below this
};

/// Classifies a root from its speed scale and mode score. Roots near an
/// avoided crossing mix both kinds of motion and stay unclassified.
inline BranchClass classify(double speed_scale, double mode_score, double d1, const RootSettings &s) {
    if (!std::isfinite(speed_scale)) return BranchClass::Unclassified;
    if (speed_scale < s.standing_speed * d1) return BranchClass::Standing;
    if (speed_scale > s.propagating_speed * d1 && mode_score < s.hybrid_score) return BranchClass::Propagating;
    return BranchClass::Unclassified;
}

/// Raised when the dispersion matrix has no numerical null direction.
class NullVectorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Null vector of M at a dispersion root; normalised so that the entry of
/// largest magnitude equals 1.
inline ModeCoefficients null_vector(const BranchPoint &p, const DerivedConstants &k, double null_tol = 1e-8) {
    const auto M = assemble_M(p.varpi0, p.K, k);
    Eigen::JacobiSVD<Matrix8cd> svd(M.m, Eigen::ComputeFullV);
    const auto &sv = svd.singularValues();
    if (sv(7) > null_tol * sv(0))
        throw NullVectorError("no null direction: smallest singular value " + std::to_string(sv(7)) +
                              " exceeds null_tol * |M|");
    Vector8cd v = svd.matrixV().col(7);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v /= v(imax);
    ModeCoefficients out;
    out.order = 0;
    out.omega0 = p.omega0;
    out.entries = v;
    out.degenerate = sv(6) < 1e3 * sv(7);
    return out;
}

namespace detail {

inline void check_segment(const DerivedConstants &k, int m, double x) {
    const double tol = 1e-9 * k.cfg.a;
    double lo = 0, hi = 0;
    switch (m) {
    case 1: lo = -k.cfg.a / 2; hi = k.xA; break;
    case 2:
    case 3: lo = k.xA; hi = k.xB; break;
    case 4: lo = k.xB; hi = k.cfg.a / 2; break;
    default: throw std::out_of_range("segment index must be 1..4");
    }
    if (x < lo - tol || x > hi + tol)
        throw std::out_of_range("x = " + std::to_string(x) + " lies outside segment " + std::to_string(m));
}

} // namespace detail

/// v_m(x) = A_m sin(omega0 x / d_m) + B_m cos(omega0 x / d_m).
inline cd eval_mode0(const ModeCoefficients &c, const DerivedConstants &k, int m, double x) {
    detail::check_segment(k, m, x);
    const double q = c.omega0 / k.d(m);
    return c.entries(2 * (m - 1)) * std::sin(q * x) + c.entries(2 * m - 1) * std::cos(q * x);
}

inline cd eval_mode0_derivative(const ModeCoefficients &c, const DerivedConstants &k, int m, double x) {
    detail::check_segment(k, m, x);
    const double q = c.omega0 / k.d(m);
    return q * (c.entries(2 * (m - 1)) * std::cos(q * x) - c.entries(2 * m - 1) * std::sin(q * x));
}

/// (v_2)'(x) - (v_3)'(x) at a crack tip.
inline cd derivative_jump(const ModeCoefficients &c, const DerivedConstants &k, double x) {
    return eval_mode0_derivative(c, k, 2, x) - eval_mode0_derivative(c, k, 3, x);
}

/// Mode score of a zero-order mode, the beam analogue of the oracle's
/// standing score: along the bonded segments the section moves as a whole,
/// above and below the crack the flux-weighted average is compared with the
/// flux-weighted mean square.
inline double mode_score(const ModeCoefficients &c, const DerivedConstants &k, int n = 400) {
    double e_avg = 0.0, e_tot = 0.0;
    auto trapezoid = [n](double x0, double x1, auto &&f) {
        const double h = (x1 - x0) / n;
        for (int i = 0; i <= n; ++i) f(x0 + i * h, (i == 0 || i == n) ? 0.5 * h : h);
    };
    const double a = k.cfg.a;
    trapezoid(-a / 2.0, k.xA, [&](double x, double w) { e_tot += w * std::norm(eval_mode0(c, k, 1, x)); });
    trapezoid(k.xB, a / 2.0, [&](double x, double w) { e_tot += w * std::norm(eval_mode0(c, k, 4, x)); });
    e_avg = e_tot;
    trapezoid(k.xA, k.xB, [&](double x, double w) {
        const cd v2 = eval_mode0(c, k, 2, x), v3 = eval_mode0(c, k, 3, x);
        e_avg += w * std::norm((k.mu1H1 * v2 + k.mu2H2 * v3) / k.flux_sum);
        e_tot += w * (k.mu1H1 * std::norm(v2) + k.mu2H2 * std::norm(v3)) / k.flux_sum;
    });
    return e_tot > 0.0 ? std::clamp(1.0 - e_avg / e_tot, 0.0, 1.0) : 0.0;
}

/// Tabulates A and B on a uniform varpi grid once, so that the roots for any
/// number of K values come from sign changes of 2A cos(Ka) + B.
class DispersionScan {
public:
    DispersionScan(const DerivedConstants &k, double omega_max, RootSettings s = {})
        : k_(k), s_(s), varpi_max_(omega_max / k.d1) {
        if (!(omega_max > 0.0)) throw std::invalid_argument("omega_max must be > 0");
        const double dmin = std::min({k.d1, k.d2, k.d3});
        const double spacing = pi * dmin / k.cfg.a / k.d1;
        step_ = spacing / s.points_per_spacing;
        const auto n = static_cast<std::size_t>(std::ceil(varpi_max_ / step_));
        grid_.reserve(n);
        coef_.reserve(n);
        for (std::size_t i = 1; i <= n; ++i) {
            const double w = std::min(i * step_, varpi_max_);
            grid_.push_back(w);
            coef_.push_back(determinant_coefficients(w, k));
        }
    }

    const DerivedConstants &constants() const { return k_; }
    const RootSettings &settings() const { return s_; }
    double omega_max() const { return varpi_max_ * k_.d1; }

    /// All roots with 0 < omega0 <= omega_max at this K, ascending.
    std::vector<BranchPoint> roots(double K) const {
        const double c = std::cos(K * k_.cfg.a);
        std::vector<double> f(grid_.size());
        for (std::size_t i = 0; i < grid_.size(); ++i) f[i] = 2.0 * coef_[i].A * c + coef_[i].B;

        auto fk = [&](double w) { return reduced_determinant(w, K, k_); };
        std::vector<std::pair<double, bool>> found; // (varpi, degenerate)
        for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
            const double lo = grid_[i], hi = grid_[i + 1];
            if (f[i] == 0.0) {
                found.emplace_back(lo, false);
            } else if (f[i] * f[i + 1] < 0.0) {
                found.emplace_back(refine(fk, lo, hi), false);
            } else if (i > 0 && f[i - 1] * f[i] > 0.0 && std::abs(f[i]) < std::abs(f[i - 1]) &&
                       std::abs(f[i]) <= std::abs(f[i + 1])) {
                // Possible pair of roots (or a double root) between grid points.
                const double sgn = f[i] > 0 ? 1.0 : -1.0;
                auto g = [&](double w) { return sgn * fk(w); };
                const auto [wmin, gmin] =
                    boost::math::tools::brent_find_minima(g, grid_[i - 1], grid_[i + 1], 52);
                if (gmin < 0.0) {
                    found.emplace_back(refine(fk, grid_[i - 1], wmin), false);
                    found.emplace_back(refine(fk, wmin, grid_[i + 1]), false);
                } else if (gmin <= s_.root_tol) {
                    found.emplace_back(wmin, true);
                }
            }
        }
        std::sort(found.begin(), found.end());

        std::vector<BranchPoint> out;
        for (std::size_t i = 0; i < found.size(); ++i) {
            auto [w, degenerate] = found[i];
            const double close = 10.0 * s_.rel_bracket * w;
            if (!out.empty() && std::abs(w - out.back().varpi0) <= close) {
                out.back().degenerate = true;
                continue;
            }
            if (i + 1 < found.size() && std::abs(found[i + 1].first - w) <= close) degenerate = true;
            BranchPoint p;
            p.K = K;
            p.varpi0 = w;
            p.omega0 = w * k_.d1;
            p.residual = std::abs(fk(w));
            p.degenerate = degenerate;
            if (p.residual > s_.root_tol) continue; // a pole-free sign change always meets this
            p.speed_scale = speed_scale(w, K);
            try {
                p.mode_score = mode_score(null_vector(p, k_), k_);
            } catch (const NullVectorError &) {
                degenerate = true;
            }
            p.classification =
                degenerate ? BranchClass::Unclassified : classify(p.speed_scale, p.mode_score, k_.d1, s_);
            p.branch_index = static_cast<int>(out.size());
            out.push_back(p);
        }
        return out;
    }

    double speed_scale(double w, double K) const {
        const auto ab = determinant_coefficients(w, k_);
        const double h = 1e-6 * w;
        const double dfdw = (reduced_determinant(w + h, K, k_) - reduced_determinant(w - h, K, k_)) / (2.0 * h);
        if (dfdw == 0.0) return std::numeric_limits<double>::infinity();
        return k_.d1 * k_.cfg.a * std::abs(2.0 * ab.A / dfdw);
    }

private:
    template <class F> double refine(F &fk, double lo, double hi) const {
        const double flo = fk(lo), fhi = fk(hi);
        if (flo == 0.0) return lo;
        if (fhi == 0.0) return hi;
        if (flo * fhi > 0.0) return 0.5 * (lo + hi);
        std::uintmax_t iters = 200;
        const auto tol = [this](double x, double y) { return std::abs(x - y) <= s_.rel_bracket * std::abs(x); };
        const auto r = boost::math::tools::toms748_solve(fk, lo, hi, flo, fhi, tol, iters);
        return 0.5 * (r.first + r.second);
    }

    DerivedConstants k_;
    RootSettings s_;
    double varpi_max_;
    double step_ = 0.0;
    std::vector<double> grid_;
    std::vector<DeterminantCoefficients> coef_;
};

inline std::vector<BranchPoint> find_branches(double K, double omega_max, const DerivedConstants &k,
                                              RootSettings s = {}) {
    return DispersionScan(k, omega_max, s).roots(K);
}

} // namespace bistrip
