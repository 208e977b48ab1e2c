// Sweep orchestration: zero-order branches over the K grid, first-order
// corrections per row, oracle spectra, and the plain-text comparison report.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "bistrip/config.hpp"
#include "bistrip/fd_oracle.hpp"
#include "bistrip/first_order.hpp"
#include "bistrip/interface_constants.hpp"
#include "bistrip/table.hpp"
#include "bistrip/zero_order.hpp"

namespace bistrip {

struct PipelineOptions {
    int threads = 1;
    double null_tol = 1e-8;
    RootSettings roots;
    EigenOptions eigen;
};

/// n points uniformly over [0, pi/a]; a single point sits at K = 0.
inline std::vector<double> k_grid(int n, double a) {
    if (n < 1) throw std::invalid_argument("k_points must be >= 1");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = n == 1 ? 0.0 : pi / a * i / (n - 1);
    return out;
}

/// Runs f(i) for i in [0, n) on up to `threads` workers. Each task writes
/// only its own slot, so no locking is needed beyond the work counter.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)> &f) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto &t : pool) t.join();
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);
}

struct SweepFailure {
    double K = 0.0;
    std::string message;
};

struct SweepResult {
    std::vector<DispersionRow> rows;
    std::vector<SweepFailure> failures;
    std::vector<std::string> warnings;
    double omega_max = 0.0;
};

inline DispersionRow zero_order_row(const BranchPoint &p) {
    DispersionRow r;
    r.K = p.K;
    r.branch_index = p.branch_index;
    r.classification = p.classification;
    r.omega0 = p.omega0;
    r.residual = p.residual;
    r.source = "model";
    r.method = "none";
    return r;
}

/// Correction of one root through the Schur route. Rows the route cannot
/// trust keep NaN corrections and a "flagged:<reason>" method.
inline DispersionRow corrected_row(const BranchPoint &p, const DerivedConstants &k, const AlphaResult &alpha,
                                   double null_tol = 1e-8) {
    DispersionRow r = zero_order_row(p);
    if (p.degenerate) {
        r.method = "flagged:degenerate-root";
        return r;
    }
    try {
        const auto A0 = null_vector(p, k, null_tol);
        if (A0.degenerate) {
            r.method = "flagged:degenerate-null-space";
            return r;
        }
        const auto M = assemble_M(p.varpi0, p.K, k);
        const auto N = assemble_N(p.varpi0, p.K, k);
        const auto jv = junction_vectors(alpha, k);
        const auto c = omega1_schur(M, N, A0, jv, derivative_jump(A0, k, k.xA), derivative_jump(A0, k, k.xB), k,
                                    null_tol);
        r.conditioning = c.conditioning;
        if (c.imag_residual > 1e-8) {
            r.method = "flagged:complex-correction";
            return r;
        }
        r.omega1_sq = c.omega1_sq;
        r.omega_corrected = corrected_omega(p.omega0, c.omega1_sq, k.cfg.epsilon);
        r.method = to_string(c.method);
    } catch (const CorrectionError &e) {
        switch (e.kind()) {
        case CorrectionError::Kind::NearDefective: r.method = "flagged:near-defective"; break;
        case CorrectionError::Kind::SmallDenominator: r.method = "flagged:small-denominator"; break;
        default: r.method = "flagged:correction-error"; break;
        }
    } catch (const NegativeRadicandError &) {
        r.method = "flagged:negative-radicand";
    } catch (const NullVectorError &) {
        r.method = "flagged:no-null-vector";
    }
    return r;
}

/// Zero-order sweep, optionally with corrections. Per-K errors are recorded
/// and the sweep continues.
inline SweepResult run_model(const RunConfig &rc, bool with_corrections, const PipelineOptions &opt = {}) {
    const auto k = derive_constants(rc.strip);
    SweepResult res;
    res.omega_max = omega_max_for(rc, k);
    AlphaResult alpha;
    if (with_corrections) alpha = alpha_for(k, rc.quadrature);
    const DispersionScan scan(k, res.omega_max, opt.roots);
    const auto Ks = k_grid(rc.k_points, rc.strip.a);
    std::vector<std::vector<DispersionRow>> per_k(Ks.size());
    std::vector<std::string> errors(Ks.size());
    parallel_for(Ks.size(), opt.threads, [&](std::size_t i) {
        try {
            for (const auto &p : scan.roots(Ks[i]))
                per_k[i].push_back(with_corrections ? corrected_row(p, k, alpha, opt.null_tol) : zero_order_row(p));
        } catch (const std::exception &e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < Ks.size(); ++i) {
        if (!errors[i].empty()) res.failures.push_back({Ks[i], errors[i]});
        res.rows.insert(res.rows.end(), per_k[i].begin(), per_k[i].end());
    }
    if (res.rows.empty() && res.failures.empty())
        res.warnings.push_back("no dispersion branch below omega_max = " + detail::fmt17(res.omega_max));
    sort_rows(res.rows);
    return res;
}

struct OracleSweep {
    std::vector<DiscreteSpectrum> spectra;
    std::vector<DispersionRow> rows;
    std::vector<SweepFailure> failures;
    double omega_max = 0.0;
    GridSpec grid;
};

/// Oracle spectra on the same K grid. Each K asks for max(12, model branch
/// count + 4) eigenvalues so that the window is covered with margin.
inline OracleSweep run_oracle(const RunConfig &rc, const PipelineOptions &opt = {}) {
    const auto k = derive_constants(rc.strip);
    OracleSweep res;
    res.omega_max = omega_max_for(rc, k);
    res.grid = make_grid(rc.strip, rc.grid);
    const DispersionScan scan(k, res.omega_max, opt.roots);
    const auto Ks = k_grid(rc.k_points, rc.strip.a);
    std::vector<DiscreteSpectrum> spectra(Ks.size());
    std::vector<std::string> errors(Ks.size());
    parallel_for(Ks.size(), opt.threads, [&](std::size_t i) {
        try {
            const int n = std::max(12, static_cast<int>(scan.roots(Ks[i]).size()) + 4);
            spectra[i] = eigenfrequencies(rc.strip, Ks[i], n, res.grid, opt.eigen);
        } catch (const std::exception &e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < Ks.size(); ++i) {
        if (!errors[i].empty()) {
            res.failures.push_back({Ks[i], errors[i]});
            continue;
        }
        const auto &sp = spectra[i];
        for (std::size_t j = 0; j < sp.omega.size(); ++j) {
            DispersionRow r;
            r.K = sp.K;
            r.branch_index = static_cast<int>(j);
            r.classification = sp.standing_score[j] >= 0.5 ? BranchClass::Standing : BranchClass::Propagating;
            r.omega0 = sp.omega[j];
            r.residual = sp.residuals[j];
            r.source = "oracle";
            r.method = "fd";
            res.rows.push_back(r);
        }
        res.spectra.push_back(sp);
    }
    sort_rows(res.rows);
    return res;
}

inline std::vector<ModelPoint> model_points(const std::vector<DispersionRow> &rows) {
    std::vector<ModelPoint> out;
    for (const auto &r : rows) {
        if (r.source != "model") continue;
        ModelPoint p;
        p.K = r.K;
        p.branch_index = r.branch_index;
        p.classification = r.classification;
        p.omega0 = r.omega0;
        p.omega_corrected = r.omega_corrected;
        out.push_back(p);
    }
    return out;
}

inline std::string format_report(const DiscrepancyReport &rep, const std::string &title) {
    std::ostringstream os;
    char buf[256];
    os << "Discrepancy report" << (title.empty() ? "" : ": " + title) << "\n\n";
    os << "Relative discrepancy against the oracle, (model - oracle) / oracle, in percent.\n\n";
    os << "class          count   zero-order |d| min / median / max        corrected |d| min / median / max\n";
    for (const auto &s : rep.summaries) {
        std::snprintf(buf, sizeof buf, "%-13s %6d   %9.4f %9.4f %9.4f        %9.4f %9.4f %9.4f\n",
                      to_string(s.classification), s.count, 100 * s.min_zero, 100 * s.median_zero, 100 * s.max_zero,
                      100 * s.min_corr, 100 * s.median_corr, 100 * s.max_corr);
        os << buf;
    }
    os << "\nper point\n";
    os << "        K  branch  class          omega0   corrected      oracle  score   zero(%)   corr(%)\n";
    for (const auto &m : rep.matches) {
        std::snprintf(buf, sizeof buf, "%9.5f  %6d  %-12s %10.3f  %10.3f  %10.3f  %5.3f  %8.4f  %8.4f\n", m.model.K,
                      m.model.branch_index, to_string(m.model.classification), m.model.omega0,
                      m.model.omega_corrected, m.omega_oracle, m.standing_score, 100 * m.rel_zero_order,
                      100 * m.rel_corrected);
        os << buf;
    }
    os << "\nwarnings: " << rep.warnings.size() << "\n";
    for (const auto &w : rep.warnings) os << "  " << w << "\n";
    return os.str();
}

} // namespace bistrip
