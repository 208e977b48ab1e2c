// First-order correction of the squared eigenfrequency from the solvability
// condition of the singular first-order junction system
//     M A1 = varpi1^2 N A0 + b_A dA + b_B dB,
// where dA, dB are the zero-order derivative jumps at the crack tips.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "bistrip/interface_constants.hpp"
#include "bistrip/model.hpp"
#include "bistrip/zero_order.hpp"

namespace bistrip {

enum class CorrectionMethod { Schur, Eigen, AnalyticSymmetric };

inline const char *to_string(CorrectionMethod m) {
    switch (m) {
    case CorrectionMethod::Schur: return "schur";
    case CorrectionMethod::Eigen: return "eigen";
    default: return "analytic";
    }
}

struct CorrectionResult {
    double omega1_sq = 0.0;  // rad^2 s^-2
    double varpi1_sq = 0.0;  // omega1_sq / d1^2, m^-2
    cd varpi1_sq_complex{0.0, 0.0};
    CorrectionMethod method = CorrectionMethod::Schur;
    double conditioning = std::numeric_limits<double>::infinity();
    double imag_residual = 0.0;
};

class CorrectionError : public std::runtime_error {
public:
    enum class Kind { NearDefective, SmallDenominator, IllConditionedEigenvectors, NotSymmetric };
    CorrectionError(Kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct FirstOrderMatrix {
    Matrix8cd n;
    double K = 0.0;
    double varpi0 = 0.0;
};

struct JunctionVectors {
    Vector8cd b_A = Vector8cd::Zero();
    Vector8cd b_B = Vector8cd::Zero();
};

/// N collects the contribution of the particular solution
/// (omega1^2 / d1^2) * (d1/d_m) x / (2 varpi0) * (A_m cos - B_m sin) to each
/// junction row of M, with the same row scaling as M: flux rows and the Bloch
/// derivative row are divided by varpi0, and the flux rows carry the weights
/// psi_1, psi_2 and -1 of M's row 3 and row 6.
inline FirstOrderMatrix assemble_N(double varpi0, double K, const DerivedConstants &k) {
    if (!(varpi0 > 0.0)) throw std::invalid_argument("assemble_N: varpi0 must be > 0");
    const auto t = detail::trig(varpi0, k);
    const cd Z = std::polar(1.0, -K * k.cfg.a);
    const double xB = k.xB, w = varpi0, a = k.cfg.a;
    const auto &S = t.S;
    const auto &C = t.C;
    double r[5];
    for (int m = 1; m <= 4; ++m) r[m] = k.d1 / k.d(m);

    // Row 3 / row 6 pattern for the pair (A_m, B_m) of segment m.
    auto flux_A = [&](int m) { return r[m] * xB * S[m] - C[m] / w; };
    auto flux_B = [&](int m) { return r[m] * xB * C[m] + S[m] / w; };
    const double h = 1.0 / (2.0 * w);
    const double wt2 = t.psi1 * h, wt3 = t.psi2 * h, wt_out = -h;

    FirstOrderMatrix out;
    out.K = K;
    out.varpi0 = varpi0;
    auto &n = out.n;
    n.setZero();
    // Row 1: v2(xB) - v4(xB); row 2: v3(xB) - v4(xB).
    n(0, 2) = -r[2] * xB * C[2] * h;
    n(0, 3) = r[2] * xB * S[2] * h;
    n(0, 6) = xB * C[4] * h;
    n(0, 7) = -xB * S[4] * h;
    n(1, 4) = -r[3] * xB * C[3] * h;
    n(1, 5) = r[3] * xB * S[3] * h;
    n(1, 6) = xB * C[4] * h;
    n(1, 7) = -xB * S[4] * h;
    // Row 3: flux balance at xB.
    n(2, 2) = wt2 * flux_A(2);
    n(2, 3) = wt2 * flux_B(2);
    n(2, 4) = wt3 * flux_A(3);
    n(2, 5) = wt3 * flux_B(3);
    n(2, 6) = wt_out * flux_A(4);
    n(2, 7) = wt_out * flux_B(4);
    // Row 4: v2(xA) - v1(xA); row 5: v3(xA) - v1(xA).
    n(3, 0) = -xB * C[1] * h;
    n(3, 1) = -xB * S[1] * h;
    n(3, 2) = r[2] * xB * C[2] * h;
    n(3, 3) = r[2] * xB * S[2] * h;
    n(4, 0) = -xB * C[1] * h;
    n(4, 1) = -xB * S[1] * h;
    n(4, 4) = r[3] * xB * C[3] * h;
    n(4, 5) = r[3] * xB * S[3] * h;
    // Row 6: flux balance at xA.
    n(5, 0) = wt_out * flux_A(1);
    n(5, 1) = -wt_out * flux_B(1);
    n(5, 2) = wt2 * flux_A(2);
    n(5, 3) = -wt2 * flux_B(2);
    n(5, 4) = wt3 * flux_A(3);
    n(5, 5) = -wt3 * flux_B(3);
    // Row 7: v1(-a/2) - Z v4(a/2); row 8: the same for derivatives / varpi0.
    n(6, 0) = a * t.Ca / (4.0 * w);
    n(6, 1) = a * t.Sa / (4.0 * w);
    n(6, 6) = Z * a * t.Ca / (4.0 * w);
    n(6, 7) = -Z * a * t.Sa / (4.0 * w);
    n(7, 0) = (a / 4.0 * t.Sa - t.Ca / (2.0 * w)) / w;
    n(7, 1) = (-t.Sa / (2.0 * w) - a / 4.0 * t.Ca) / w;
    n(7, 6) = Z * (t.Ca / (2.0 * w) - a / 4.0 * t.Sa) / w;
    n(7, 7) = -Z * (t.Sa / (2.0 * w) + a / 4.0 * t.Ca) / w;
    return out;
}

/// Right-hand sides of the first-order displacement rows at the two tips:
/// v_m(xB) - v4(xB) = -/+ w_m alpha dB for m = 2, 3 and
/// v_m(xA) - v1(xA) = +/- w_m alpha dA, with w_2 = mu2 H2 / S and
/// w_3 = mu1 H1 / S, S = mu1 H1 + mu2 H2.
inline JunctionVectors junction_vectors(const AlphaResult &alpha, const DerivedConstants &k) {
    const double w2 = k.mu2H2 / k.flux_sum, w3 = k.mu1H1 / k.flux_sum;
    JunctionVectors jv;
    jv.b_B(0) = -alpha.value * w2;
    jv.b_B(1) = alpha.value * w3;
    jv.b_A(3) = alpha.value * w2;
    jv.b_A(4) = -alpha.value * w3;
    return jv;
}

namespace detail {

inline double conditioning_from(const Eigen::Matrix<cd, 8, 1> &eigenvalues, double null_tol, double scale) {
    std::array<double, 8> mags;
    for (int i = 0; i < 8; ++i) mags[i] = std::abs(eigenvalues(i));
    std::sort(mags.begin(), mags.end());
    return mags[1] / (mags[0] + null_tol * scale);
}

inline CorrectionResult finish(cd numer, cd denom, double denom_scale, const DerivedConstants &k,
                               CorrectionMethod method, double conditioning) {
    if (std::abs(denom) < 1e-12 * denom_scale)
        throw CorrectionError(CorrectionError::Kind::SmallDenominator,
                              "solvability denominator vanishes; correction undefined");
    CorrectionResult r;
    r.varpi1_sq_complex = -numer / denom;
    r.varpi1_sq = r.varpi1_sq_complex.real();
    r.omega1_sq = r.varpi1_sq * k.d1 * k.d1;
    const double im = r.varpi1_sq_complex.imag() * k.d1 * k.d1;
    r.imag_residual = std::abs(im) / (1.0 + std::abs(r.omega1_sq));
    r.method = method;
    r.conditioning = conditioning;
    return r;
}

// Moves the diagonal entry at position `from` of the triangular factor to
// position 0 with adjacent unitary swaps, keeping A = Q T Q^H.
inline void move_to_front(Matrix8cd &T, Matrix8cd &Q, int from) {
    for (int j = from; j > 0; --j) {
        const int i = j - 1;
        const cd t11 = T(i, i), t22 = T(j, j), t12 = T(i, j);
        // (t12, t22 - t11) is the eigenvector of the 2x2 block for t22.
        Eigen::Matrix<cd, 2, 1> x(t12, t22 - t11);
        const double nx = x.norm();
        if (nx == 0.0) continue; // equal diagonal entries with zero coupling: already "swapped"
        x /= nx;
        Eigen::Matrix<cd, 2, 2> G;
        G << x(0), -std::conj(x(1)), x(1), std::conj(x(0));
        T.middleRows(i, 2) = G.adjoint() * T.middleRows(i, 2);
        T.middleCols(i, 2) = T.middleCols(i, 2) * G;
        Q.middleCols(i, 2) = Q.middleCols(i, 2) * G;
        T(j, i) = 0.0;
    }
}

inline void check_conditioning(double conditioning) {
    if (conditioning < 10.0)
        throw CorrectionError(CorrectionError::Kind::NearDefective,
                              "near-defective root (eigenvalue ratio " + std::to_string(conditioning) +
                                  " < 10); correction untrusted");
}

} // namespace detail

/// Schur route: M^T = Q U Q^H with the zero eigenvalue moved to U(0,0); the
/// first column q of Q satisfies q^T M = 0, so the first row of the
/// premultiplied system fixes varpi1^2.
inline CorrectionResult omega1_schur(const DispersionMatrix &M, const FirstOrderMatrix &N, const ModeCoefficients &A0,
                                     const JunctionVectors &jv, cd deltaA, cd deltaB, const DerivedConstants &k,
                                     double null_tol = 1e-8) {
    Eigen::ComplexSchur<Matrix8cd> schur(M.m.transpose(), true);
    Matrix8cd T = schur.matrixT();
    Matrix8cd Q = schur.matrixU();
    Eigen::Index imin = 0;
    T.diagonal().cwiseAbs().minCoeff(&imin);
    detail::move_to_front(T, Q, static_cast<int>(imin));
    const double conditioning = detail::conditioning_from(T.diagonal(), null_tol, M.m.norm());
    detail::check_conditioning(conditioning);
    const auto q = Q.col(0);
    const cd numer = q.transpose() * (jv.b_A * deltaA + jv.b_B * deltaB);
    const cd denom = q.transpose() * (N.n * A0.entries);
    return detail::finish(numer, denom, N.n.norm() * A0.entries.norm(), k, CorrectionMethod::Schur, conditioning);
}

/// Eigendecomposition route: M = V D V^{-1}; row l of V^{-1} belonging to the
/// zero eigenvalue annihilates M from the left.
inline CorrectionResult omega1_eigen(const DispersionMatrix &M, const FirstOrderMatrix &N, const ModeCoefficients &A0,
                                     const JunctionVectors &jv, cd deltaA, cd deltaB, const DerivedConstants &k,
                                     double null_tol = 1e-8, double max_condition = 1e12) {
    Eigen::ComplexEigenSolver<Matrix8cd> es(M.m, true);
    const auto &D = es.eigenvalues();
    const Matrix8cd V = es.eigenvectors();
    Eigen::Index l = 0;
    D.cwiseAbs().minCoeff(&l);
    const double conditioning = detail::conditioning_from(D, null_tol, M.m.norm());
    detail::check_conditioning(conditioning);
    Eigen::JacobiSVD<Matrix8cd> svd(V);
    const double condV = svd.singularValues()(0) / svd.singularValues()(7);
    if (!(condV <= max_condition))
        throw CorrectionError(CorrectionError::Kind::IllConditionedEigenvectors,
                              "eigenvector matrix condition number " + std::to_string(condV) + " too large");
    Vector8cd e = Vector8cd::Zero();
    e(l) = 1.0;
    const Vector8cd row = V.transpose().partialPivLu().solve(e); // row l of V^{-1}, as a column
    const cd numer = row.transpose() * (jv.b_A * deltaA + jv.b_B * deltaB);
    const cd denom = row.transpose() * (N.n * A0.entries);
    return detail::finish(numer, denom, N.n.norm() * A0.entries.norm() * row.norm(), k, CorrectionMethod::Eigen,
                          conditioning);
}

/// Closed form for the first standing wave of a homogeneous symmetric strip,
/// varpi1^2 = -4 pi varpi0 alpha / l^2 (equivalently omega1^2 = -4 pi d omega0 alpha / l^2).
inline CorrectionResult omega1_symmetric_analytic(double omega0, const AlphaResult &alpha, const DerivedConstants &k) {
    if (!k.is_homogeneous_symmetric())
        throw CorrectionError(CorrectionError::Kind::NotSymmetric,
                              "analytic correction needs mu1 = mu2, rho1 = rho2 and H1 = H2");
    const double l = k.cfg.l;
    CorrectionResult r;
    r.varpi1_sq = -4.0 * pi * (omega0 / k.d1) * alpha.value / (l * l);
    r.varpi1_sq_complex = r.varpi1_sq;
    r.omega1_sq = r.varpi1_sq * k.d1 * k.d1;
    r.method = CorrectionMethod::AnalyticSymmetric;
    return r;
}

class NegativeRadicandError : public std::domain_error {
public:
    NegativeRadicandError(double omega0_sq, double correction)
        : std::domain_error("omega0^2 + eps*omega1^2 <= 0 (omega0^2 = " + std::to_string(omega0_sq) +
                            ", eps*omega1^2 = " + std::to_string(correction) + ")"),
          omega0_sq_(omega0_sq), correction_(correction) {}
    double omega0_sq() const { return omega0_sq_; }
    double correction() const { return correction_; }

private:
    double omega0_sq_, correction_;
};

/// sqrt(omega0^2 + eps omega1^2).
inline double corrected_omega(double omega0, double omega1_sq, double epsilon) {
    const double w2 = omega0 * omega0, c = epsilon * omega1_sq;
    if (!(w2 + c > 0.0)) throw NegativeRadicandError(w2, c);
    return std::sqrt(w2 + c);
}

/// Minimum-norm solution A1 of the consistent first-order system, with the
/// component along A0 removed.
inline ModeCoefficients first_order_coefficients(const DispersionMatrix &M, const FirstOrderMatrix &N,
                                                 const ModeCoefficients &A0, const JunctionVectors &jv, cd deltaA,
                                                 cd deltaB, double varpi1_sq) {
    const Vector8cd rhs = varpi1_sq * (N.n * A0.entries) + jv.b_A * deltaA + jv.b_B * deltaB;
    Eigen::JacobiSVD<Matrix8cd> svd(M.m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto &s = svd.singularValues();
    Vector8cd x = Vector8cd::Zero();
    for (int i = 0; i < 7; ++i) {
        const cd coef = svd.matrixU().col(i).dot(rhs) / s(i); // dot conjugates the left operand
        x += coef * svd.matrixV().col(i);
    }
    const Vector8cd a0 = A0.entries.normalized();
    x -= a0.dot(x) * a0;
    ModeCoefficients out;
    out.order = 1;
    out.omega0 = A0.omega0;
    out.entries = x;
    return out;
}

/// v_m^(1)(x) = A_m^(1) sin + B_m^(1) cos + omega1^2 F_m(x) with
/// F_m(x) = x / (2 d_m omega0) (A_m^(0) cos - B_m^(0) sin), arguments omega0 x / d_m.
inline cd eval_mode1(const ModeCoefficients &c1, const ModeCoefficients &c0, double omega1_sq,
                     const DerivedConstants &k, int m, double x) {
    detail::check_segment(k, m, x);
    const double dm = k.d(m), w0 = c0.omega0;
    const double q = w0 / dm, s = std::sin(q * x), co = std::cos(q * x);
    const cd A0 = c0.entries(2 * (m - 1)), B0 = c0.entries(2 * m - 1);
    const cd F = x / (2.0 * dm * w0) * (A0 * co - B0 * s);
    return c1.entries(2 * (m - 1)) * s + c1.entries(2 * m - 1) * co + omega1_sq * F;
}

} // namespace bistrip
