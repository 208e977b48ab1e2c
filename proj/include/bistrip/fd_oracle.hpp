// Two-dimensional finite-difference eigen-solver for the anti-plane problem
// on one elementary cell. It is independent of the beam model and serves as
// the reference for discrepancy measurements.
//
// The scheme is the vertex-centred finite-volume form of the 5-point
// Laplacian on a tensor grid: every rectangular cell adds its edge
// conductances and a lumped corner mass. Traction-free faces (top, bottom,
// crack faces) are natural boundaries of this form, and the operator pair is
// Hermitian / Hermitian positive definite by construction.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "bistrip/model.hpp"
#include "bistrip/zero_order.hpp"

namespace bistrip {

class OracleGridError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class OracleConvergenceError : public std::runtime_error {
public:
    OracleConvergenceError(int iterations, double best_residual)
        : std::runtime_error("eigen-solver did not converge after " + std::to_string(iterations) +
                             " iterations (best residual " + std::to_string(best_residual) + ")"),
          iterations_(iterations), best_residual_(best_residual) {}
    int iterations() const { return iterations_; }
    double best_residual() const { return best_residual_; }

private:
    int iterations_;
    double best_residual_;
};

struct GridOptions {
    int nx = 601;                 // base nodes along x, both ends included
    int ny_min = 13;              // nodes across each layer
    double refine_factor = 4.0;   // cell subdivision near the crack tips
    double refine_fraction = 0.1; // refinement window half-width as a fraction of l
    double scale = 1.0;           // multiplies every cell count
    double y_grading = 2.0;       // y_j = t (j / (ny - 1))^y_grading, measured from the interface
};

struct GridSpec {
    std::vector<double> x; // column abscissae, x.front() = -a/2, x.back() = a/2
    int nx_base = 0;
    int ny1 = 0, ny2 = 0;
    double hx = 0.0; // base spacing
    std::vector<double> y1, y2; // distance from the interface in the upper / lower layer
    int iA = -1, iB = -1; // columns of the crack tips

    int columns() const { return static_cast<int>(x.size()) - 1; } // x.back() wraps onto x.front()
    const std::vector<double> &y(int layer) const { return layer == 0 ? y1 : y2; }
    double dual_y(int layer, int j) const {
        const auto &v = y(layer);
        const double lo = j == 0 ? v[0] : 0.5 * (v[j - 1] + v[j]);
        const double hi = j + 1 == static_cast<int>(v.size()) ? v[j] : 0.5 * (v[j] + v[j + 1]);
        return hi - lo;
    }
};

inline GridSpec make_grid(const StripConfig &cfg, const GridOptions &opt = {}) {
    if (auto v = validate_config(cfg); !v.empty()) throw ConfigError(describe(v));
    if (!(opt.scale > 0.0)) throw OracleGridError("grid scale must be > 0");
    GridSpec g;
    const int cells = static_cast<int>(std::lround((opt.nx - 1) * opt.scale));
    g.nx_base = cells + 1;
    const int ny = static_cast<int>(std::lround((opt.ny_min - 1) * opt.scale)) + 1;
    g.ny1 = g.ny2 = ny;
    if (g.nx_base < 64) throw OracleGridError("nx must be >= 64 (got " + std::to_string(g.nx_base) + ")");
    if (ny < 4) throw OracleGridError("ny must be >= 4 (got " + std::to_string(ny) + ")");
    const int factor = static_cast<int>(std::lround(opt.refine_factor));
    if (factor < 1) throw OracleGridError("refine factor must be >= 1");

    const double a = cfg.a, l = cfg.l, xA = -l / 2.0, xB = l / 2.0;
    g.hx = a / cells;
    const double tol = 1e-9 * g.hx;
    auto on_grid = [&](double x) {
        const double s = (x + a / 2.0) / g.hx;
        return std::abs(s - std::round(s)) * g.hx <= tol;
    };
    if (!on_grid(xA) || !on_grid(xB)) {
        std::ostringstream os;
        os << "crack tips are not on grid lines: hx = " << g.hx << " does not divide (a-l)/2 = " << (a - l) / 2.0
           << " and l = " << l;
        throw OracleGridError(os.str());
    }
    const double window = l * opt.refine_fraction;
    g.x.reserve(cells * factor + 1);
    for (int i = 0; i < cells; ++i) {
        const double x0 = -a / 2.0 + i * g.hx, x1 = -a / 2.0 + (i + 1) * g.hx;
        const double mid = 0.5 * (x0 + x1);
        const bool fine = std::min(std::abs(mid - xA), std::abs(mid - xB)) < window + 0.5 * g.hx - tol;
        const int sub = fine ? factor : 1;
        for (int s = 0; s < sub; ++s) g.x.push_back(x0 + (x1 - x0) * s / sub);
    }
    g.x.push_back(a / 2.0);
    for (int i = 0; i < static_cast<int>(g.x.size()); ++i) {
        if (std::abs(g.x[i] - xA) <= tol) g.iA = i;
        if (std::abs(g.x[i] - xB) <= tol) g.iB = i;
    }
    if (!(opt.y_grading >= 1.0)) throw OracleGridError("y grading exponent must be >= 1");
    for (int j = 0; j < ny; ++j) {
        const double s = std::pow(static_cast<double>(j) / (ny - 1), opt.y_grading);
        g.y1.push_back(cfg.thickness_upper() * s);
        g.y2.push_back(cfg.thickness_lower() * s);
    }
    return g;
}

using SparseC = Eigen::SparseMatrix<cd>;

/// Node numbering and the assembled pencil (A, B). A is scaled by 1/mu1 and
/// B by 1/rho1, so its eigenvalues are omega^2 / c1^2.
struct DiscreteOperator {
    SparseC A, B;
    double K = 0.0;
    double c_ref = 0.0;
    // node(i, layer, j) for column i, layer 0 (upper) or 1 (lower), level j
    // counted from the interface.
    std::vector<int> upper_offset, lower_offset;
    std::vector<bool> doubled;
    int ny1 = 0, ny2 = 0;
    int size = 0;

    int node(int i, int layer, int j) const {
        if (layer == 0) return upper_offset[i] + j;
        if (j == 0 && !doubled[i]) return upper_offset[i];
        return lower_offset[i] + (doubled[i] ? j : j - 1);
    }
};

/// Interface nodes are doubled along the open crack; with an imperfect
/// interface they are doubled everywhere and joined outside the crack by a
/// spring of stiffness 1/(epsilon kappa) per unit length. The last column is
/// the first one times e^{iKa}.
inline DiscreteOperator assemble_operator(const StripConfig &cfg, double K, const GridSpec &g) {
    if (auto v = validate_config(cfg); !v.empty()) throw ConfigError(describe(v));
    const int nc = g.columns();
    if (g.iA < 0 || g.iB < 0 || nc < 2) throw OracleGridError("grid is not aligned with the crack tips");
    const double eps = 1e-9 * g.hx;
    if (std::abs(g.x[g.iA] + cfg.l / 2.0) > eps || std::abs(g.x[g.iB] - cfg.l / 2.0) > eps ||
        std::abs(g.x.front() + cfg.a / 2.0) > eps || std::abs(g.x.back() - cfg.a / 2.0) > eps)
        throw OracleGridError("grid does not match the configuration geometry");
    const bool imperfect = cfg.interface_kind() == InterfaceKind::Imperfect;

    DiscreteOperator op;
    op.K = K;
    op.c_ref = cfg.upper.wavespeed();
    op.ny1 = g.ny1;
    op.ny2 = g.ny2;
    op.upper_offset.resize(nc);
    op.lower_offset.resize(nc);
    op.doubled.resize(nc);
    int n = 0;
    for (int i = 0; i < nc; ++i) {
        op.doubled[i] = imperfect || (i > g.iA && i < g.iB);
        op.upper_offset[i] = n;
        n += g.ny1;
        op.lower_offset[i] = n;
        n += op.doubled[i] ? g.ny2 : g.ny2 - 1;
    }
    op.size = n;

    const double mu_ref = cfg.upper.shear_modulus, rho_ref = cfg.upper.density;
    const cd phase = std::polar(1.0, K * cfg.a);
    std::vector<Eigen::Triplet<cd>> ta, tb;
    ta.reserve(static_cast<std::size_t>(n) * 10);
    tb.reserve(n);
    // Column index of the right end of each cell; nc wraps onto 0.
    auto edge = [&](int p, int q, double w, cd ph) {
        ta.emplace_back(p, p, w);
        ta.emplace_back(q, q, w);
        ta.emplace_back(p, q, -w * ph);
        ta.emplace_back(q, p, -w * std::conj(ph));
    };
    for (int i = 0; i < nc; ++i) {
        const int ir = (i + 1 == nc) ? 0 : i + 1;
        const cd ph = (i + 1 == nc) ? phase : cd(1.0);
        const double hx = g.x[i + 1] - g.x[i];
        for (int layer = 0; layer < 2; ++layer) {
            const Material &mat = layer == 0 ? cfg.upper : cfg.lower;
            const double mu = mat.shear_modulus / mu_ref, rho = mat.density / rho_ref;
            const int ny = layer == 0 ? g.ny1 : g.ny2;
            const auto &yl = g.y(layer);
            for (int j = 0; j + 1 < ny; ++j) {
                const double hy = yl[j + 1] - yl[j];
                const int p00 = op.node(i, layer, j), p01 = op.node(i, layer, j + 1);
                const int p10 = op.node(ir, layer, j), p11 = op.node(ir, layer, j + 1);
                const double wh = mu * 0.5 * hy / hx, wv = mu * 0.5 * hx / hy, m = rho * 0.25 * hx * hy;
                edge(p00, p10, wh, ph);
                edge(p01, p11, wh, ph);
                edge(p00, p01, wv, 1.0);
                edge(p10, p11, wv, 1.0);
                for (int p : {p00, p01, p10, p11}) tb.emplace_back(p, p, m);
            }
        }
    }
    if (imperfect) {
        const double stiffness = 1.0 / (cfg.epsilon * cfg.kappa * mu_ref);
        for (int i = 0; i < nc; ++i) {
            const double left = i == 0 ? g.x[nc] - g.x[nc - 1] : g.x[i] - g.x[i - 1];
            const double right = g.x[i + 1] - g.x[i];
            // Cell c spans columns c, c+1 and is bonded unless it lies on the crack.
            auto bonded_cell = [&](int c) { return c + 1 <= g.iA || c >= g.iB; };
            const int cl = i == 0 ? nc - 1 : i - 1;
            const double bonded = (bonded_cell(cl) ? 0.5 * left : 0.0) + (bonded_cell(i) ? 0.5 * right : 0.0);
            if (bonded > 0.0) edge(op.node(i, 0, 0), op.node(i, 1, 0), stiffness * bonded, 1.0);
        }
    }
    op.A.resize(n, n);
    op.B.resize(n, n);
    op.A.setFromTriplets(ta.begin(), ta.end());
    op.B.setFromTriplets(tb.begin(), tb.end());
    return op;
}

struct EigenOptions {
    double residual_tol = 1e-12; // relative; eigenvalue error scales with it, not its square
    int max_iterations = 2000;
    int dense_limit = 400; // dense generalized solve up to this many unknowns; its error grows with the largest eigenvalue
    int extra_vectors = 10;
    std::uint64_t seed = 12345;
};

struct DiscreteSpectrum {
    double K = 0.0;
    GridSpec grid;
    std::vector<double> omega;          // rad s^-1, ascending
    std::vector<double> residuals;      // relative residual per pair
    std::vector<double> standing_score; // 0 for y-uniform modes, 1 for zero net flux
    int iterations = 0;
    bool dense = false;
};

namespace detail {

inline double norm1(const SparseC &m) {
    double best = 0.0;
    for (int k = 0; k < m.outerSize(); ++k) {
        double s = 0.0;
        for (SparseC::InnerIterator it(m, k); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

// 1 - (energy of the flux-weighted y-average) / (total energy), evaluated
// column by column.
inline double standing_score(const DiscreteOperator &op, const GridSpec &g, const StripConfig &cfg,
                             const Eigen::Ref<const Eigen::VectorXcd> &u) {
    const int nc = g.columns();
    const double mu1 = cfg.upper.shear_modulus, mu2 = cfg.lower.shear_modulus;
    double e_avg = 0.0, e_tot = 0.0;
    for (int i = 0; i < nc; ++i) {
        const double left = i == 0 ? g.x[nc] - g.x[nc - 1] : g.x[i] - g.x[i - 1];
        const double dual = 0.5 * (left + g.x[i + 1] - g.x[i]);
        double wsum = 0.0, tot = 0.0;
        cd acc = 0.0;
        auto add = [&](int p, double w) {
            wsum += w;
            acc += w * u(p);
            tot += w * std::norm(u(p));
        };
        for (int j = 0; j < g.ny1; ++j) {
            const double w = mu1 * g.dual_y(0, j);
            add(op.node(i, 0, j), w);
        }
        for (int j = 0; j < g.ny2; ++j) {
            const double w = mu2 * g.dual_y(1, j);
            add(op.node(i, 1, j), w); // j = 0 is the shared node unless doubled
        }
        e_avg += dual * std::norm(acc) / wsum;
        e_tot += dual * tot;
    }
    return e_tot > 0.0 ? std::clamp(1.0 - e_avg / e_tot, 0.0, 1.0) : 0.0;
}

inline double relative_residual(const SparseC &A, const SparseC &B, double nA, double nB, double lambda,
                                const Eigen::Ref<const Eigen::VectorXcd> &u) {
    const Eigen::VectorXcd r = A * u - lambda * (B * u);
    return r.norm() / ((nA + std::abs(lambda) * nB) * u.norm());
}

} // namespace detail

/// The n_lowest smallest eigenfrequencies of the cell at Bloch parameter K.
/// Large grids use shift-invert subspace iteration about a negative shift
/// with Rayleigh-Ritz projection; small ones a dense generalized solve.
inline DiscreteSpectrum eigenfrequencies(const StripConfig &cfg, double K, int n_lowest, const GridSpec &g,
                                         const EigenOptions &opt = {}) {
    if (n_lowest < 1) throw std::invalid_argument("n_lowest must be >= 1");
    const DiscreteOperator op = assemble_operator(cfg, K, g);
    const int n = op.size;
    if (n_lowest > n) throw std::invalid_argument("n_lowest exceeds the number of unknowns");
    const double nA = detail::norm1(op.A), nB = detail::norm1(op.B);

    DiscreteSpectrum out;
    out.K = K;
    out.grid = g;
    Eigen::VectorXd lambdas;
    Eigen::MatrixXcd vectors;

    if (n <= opt.dense_limit) {
        const Eigen::MatrixXcd Ad(op.A), Bd(op.B);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(Ad, Bd);
        if (es.info() != Eigen::Success) throw OracleConvergenceError(0, std::numeric_limits<double>::infinity());
        lambdas = es.eigenvalues().head(n_lowest);
        vectors = es.eigenvectors().leftCols(n_lowest);
        out.dense = true;
    } else {
        const int p = std::min(n, n_lowest + opt.extra_vectors);
        // Shift below the spectrum so that A - sigma B is positive definite.
        const double sigma = -0.05 * (pi / cfg.a) * (pi / cfg.a);
        const SparseC C = op.A - sigma * op.B;
        Eigen::SimplicialLLT<SparseC> llt(C);
        if (llt.info() != Eigen::Success) throw std::runtime_error("factorization of the shifted operator failed");

        std::mt19937_64 rng(opt.seed);
        std::normal_distribution<double> normal;
        Eigen::MatrixXcd X(n, p);
        for (int c = 0; c < p; ++c)
            for (int r = 0; r < n; ++r) X(r, c) = cd(normal(rng), normal(rng));

        double best = std::numeric_limits<double>::infinity();
        int it = 0;
        for (; it < opt.max_iterations; ++it) {
            Eigen::MatrixXcd Y = llt.solve(op.B * X);
            Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Y);
            Y = qr.householderQ() * Eigen::MatrixXcd::Identity(n, p);
            const Eigen::MatrixXcd AY = op.A * Y, BY = op.B * Y;
            Eigen::MatrixXcd Ar = Y.adjoint() * AY, Br = Y.adjoint() * BY;
            Ar = 0.5 * (Ar + Ar.adjoint()).eval();
            Br = 0.5 * (Br + Br.adjoint()).eval();
            Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> es(Ar, Br);
            X = Y * es.eigenvectors();
            lambdas = es.eigenvalues().head(n_lowest);
            double worst = 0.0;
            const Eigen::MatrixXcd R = op.A * X.leftCols(n_lowest) - op.B * X.leftCols(n_lowest) * lambdas.asDiagonal();
            for (int c = 0; c < n_lowest; ++c)
                worst = std::max(worst, R.col(c).norm() /
                                            ((nA + std::abs(lambdas(c)) * nB) * X.col(c).norm()));
            best = std::min(best, worst);
            if (worst <= opt.residual_tol) break;
        }
        if (it == opt.max_iterations) throw OracleConvergenceError(it, best);
        out.iterations = it + 1;
        vectors = X.leftCols(n_lowest);
    }

    for (int c = 0; c < n_lowest; ++c) {
        const double lam = lambdas(c);
        out.omega.push_back(op.c_ref * std::sqrt(std::max(lam, 0.0)));
        out.residuals.push_back(detail::relative_residual(op.A, op.B, nA, nB, lam, vectors.col(c)));
        out.standing_score.push_back(detail::standing_score(op, g, cfg, vectors.col(c)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model / oracle comparison

struct ModelPoint {
    double K = 0.0;
    int branch_index = 0;
    BranchClass classification = BranchClass::Unclassified;
    double omega0 = 0.0;
    double omega_corrected = std::numeric_limits<double>::quiet_NaN(); // NaN when no correction
};

struct MatchedPoint {
    ModelPoint model;
    double omega_oracle = 0.0;
    double standing_score = 0.0;
    double rel_zero_order = 0.0; // (omega0 - oracle) / oracle
    double rel_corrected = std::numeric_limits<double>::quiet_NaN();
};

struct ClassSummary {
    BranchClass classification = BranchClass::Unclassified;
    int count = 0;
    double min_zero = 0, median_zero = 0, max_zero = 0;
    double min_corr = 0, median_corr = 0, max_corr = 0;
    int corrected_count = 0;
};

struct CompareOptions {
    double window = 0.25;           // maximum relative distance for a match
    double standing_threshold = 0.5; // oracle standing score separating the classes
    double unmatched_oracle_fraction = 0.8;
};

struct DiscrepancyReport {
    std::vector<MatchedPoint> matches;
    std::vector<std::string> warnings;
    std::vector<ClassSummary> summaries;
};

inline bool class_compatible(BranchClass c, double score, double threshold) {
    if (c == BranchClass::Standing) return score >= threshold;
    if (c == BranchClass::Propagating) return score < threshold;
    return true;
}

namespace detail {

inline void summarize(const std::vector<double> &v, double &mn, double &md, double &mx) {
    if (v.empty()) {
        mn = md = mx = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    std::vector<double> s(v);
    std::sort(s.begin(), s.end());
    mn = s.front();
    mx = s.back();
    const std::size_t h = s.size() / 2;
    md = s.size() % 2 ? s[h] : 0.5 * (s[h - 1] + s[h]);
}

} // namespace detail

/// Greedy one-to-one matching per K: pairs are taken in order of relative
/// distance, restricted to the window and to class-compatible oracle modes.
inline DiscrepancyReport compare(const std::vector<ModelPoint> &model, const std::vector<DiscreteSpectrum> &oracle,
                                 double omega_max, const CompareOptions &opt = {}) {
    DiscrepancyReport rep;
    auto same_K = [](double x, double y) { return std::abs(x - y) <= 1e-12 * (1.0 + std::abs(x)); };
    for (const auto &spec : oracle) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < model.size(); ++i)
            if (same_K(model[i].K, spec.K)) rows.push_back(i);
        struct Cand {
            double dist;
            std::size_t row;
            std::size_t mode;
        };
        std::vector<Cand> cands;
        for (std::size_t r : rows)
            for (std::size_t j = 0; j < spec.omega.size(); ++j) {
                const double wo = spec.omega[j];
                if (!(wo > 0.0)) continue;
                const double d = std::abs(model[r].omega0 - wo) / wo;
                if (d <= opt.window &&
                    class_compatible(model[r].classification, spec.standing_score[j], opt.standing_threshold))
                    cands.push_back({d, r, j});
            }
        std::stable_sort(cands.begin(), cands.end(), [](const Cand &x, const Cand &y) { return x.dist < y.dist; });
        std::vector<bool> row_used(model.size(), false), mode_used(spec.omega.size(), false);
        for (const auto &c : cands) {
            if (row_used[c.row] || mode_used[c.mode]) continue;
            row_used[c.row] = mode_used[c.mode] = true;
            MatchedPoint mp;
            mp.model = model[c.row];
            mp.omega_oracle = spec.omega[c.mode];
            mp.standing_score = spec.standing_score[c.mode];
            mp.rel_zero_order = (mp.model.omega0 - mp.omega_oracle) / mp.omega_oracle;
            if (std::isfinite(mp.model.omega_corrected))
                mp.rel_corrected = (mp.model.omega_corrected - mp.omega_oracle) / mp.omega_oracle;
            rep.matches.push_back(mp);
        }
        char buf[256];
        for (std::size_t r : rows)
            if (!row_used[r]) {
                std::snprintf(buf, sizeof buf,
                              "unmatched model branch: K=%.6g branch=%d class=%s omega0=%.6g (no oracle mode within %g%%)",
                              model[r].K, model[r].branch_index, to_string(model[r].classification), model[r].omega0,
                              100.0 * opt.window);
                rep.warnings.emplace_back(buf);
            }
        for (std::size_t j = 0; j < spec.omega.size(); ++j)
            if (!mode_used[j] && spec.omega[j] > 0.0 && spec.omega[j] < opt.unmatched_oracle_fraction * omega_max) {
                std::snprintf(buf, sizeof buf,
                              "unmatched oracle mode: K=%.6g omega=%.6g standing_score=%.3f has no model branch", spec.K,
                              spec.omega[j], spec.standing_score[j]);
                rep.warnings.emplace_back(buf);
            }
    }
    std::sort(rep.matches.begin(), rep.matches.end(), [](const MatchedPoint &x, const MatchedPoint &y) {
        return x.model.K != y.model.K ? x.model.K < y.model.K : x.model.omega0 < y.model.omega0;
    });
    for (BranchClass c : {BranchClass::Standing, BranchClass::Propagating, BranchClass::Unclassified}) {
        std::vector<double> z, k;
        for (const auto &m : rep.matches) {
            if (m.model.classification != c) continue;
            z.push_back(std::abs(m.rel_zero_order));
            if (std::isfinite(m.rel_corrected)) k.push_back(std::abs(m.rel_corrected));
        }
        if (z.empty()) continue;
        ClassSummary s;
        s.classification = c;
        s.count = static_cast<int>(z.size());
        s.corrected_count = static_cast<int>(k.size());
        detail::summarize(z, s.min_zero, s.median_zero, s.max_zero);
        detail::summarize(k, s.min_corr, s.median_corr, s.max_corr);
        rep.summaries.push_back(s);
    }
    return rep;
}

} // namespace bistrip
