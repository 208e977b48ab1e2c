// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace bistrip {

struct QuadratureOutcome {
    double value = 0.0;
    double error = 0.0;
    std::size_t subdivisions = 0;
    std::size_t evaluations = 0;
};

/// Thrown when the subdivision budget runs out before the tolerance is met.
/// Carries the partial value and the error estimate achieved so far.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string &what, QuadratureOutcome partial)
        : std::runtime_error(what), partial_(partial) {}
    const QuadratureOutcome &partial() const { return partial_; }

private:
    QuadratureOutcome partial_;
};

namespace detail {

// Kronrod abscissae (positive half, descending) and weights; Gauss weights
// belong to the odd-indexed abscissae.
inline constexpr std::array<double, 8> gk15_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> gk15_wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk15_wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double lo, hi, value, error;
    bool operator<(const Segment &o) const { return error < o.error; }
};

template <class F> Segment gk15(F &f, double lo, double hi) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    const double fc = f(mid);
    double kron = fc * gk15_wk[7];
    double gauss = fc * gk15_wg[3];
    for (int i = 0; i < 7; ++i) {
        const double dx = half * gk15_x[i];
        const double s = f(mid - dx) + f(mid + dx);
        kron += gk15_wk[i] * s;
        if (i % 2 == 1) gauss += gk15_wg[i / 2] * s;
    }
    kron *= half;
    gauss *= half;
    // Plain |K - G| is pessimistic for smooth integrands but never optimistic.
    const double err = std::abs(kron - gauss) + 50.0 * std::numeric_limits<double>::epsilon() * std::abs(kron);
    return {lo, hi, kron, err};
}

} // namespace detail

/// Integrates f over [lo, hi] until the summed error estimate is at most
/// max(abs_tol, rel_tol * |value|).
template <class F>
QuadratureOutcome integrate_adaptive(F f, double lo, double hi, double abs_tol, double rel_tol,
                                     std::size_t max_subdivisions) {
    std::priority_queue<detail::Segment> heap;
    QuadratureOutcome out;
    auto first = detail::gk15(f, lo, hi);
    out.evaluations = 15;
    heap.push(first);
    double total = first.value, error = first.error;
    while (error > std::max(abs_tol, rel_tol * std::abs(total))) {
        if (out.subdivisions >= max_subdivisions) {
            out.value = total;
            out.error = error;
            throw QuadratureError("adaptive quadrature did not converge within the subdivision budget", out);
        }
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        const auto left = detail::gk15(f, worst.lo, mid);
        const auto right = detail::gk15(f, mid, worst.hi);
        out.evaluations += 30;
        ++out.subdivisions;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift accumulated by incremental updates.
    total = 0.0;
    error = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.error = error;
    return out;
}

} // namespace bistrip
