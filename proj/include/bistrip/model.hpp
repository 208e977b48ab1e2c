// Physical input types for the cracked bi-material strip and the constants
// derived from them.
#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bistrip {

inline constexpr double pi = 3.14159265358979323846;

/// Raised when a configuration violates an invariant. The message names the
/// offending field.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Material {
    double shear_modulus = 0.0; // N m^-2
    double density = 0.0;       // kg m^-3

    double wavespeed() const { return std::sqrt(shear_modulus / density); }
};

enum class InterfaceKind { Perfect, Imperfect };

inline const char *to_string(InterfaceKind k) {
    return k == InterfaceKind::Perfect ? "perfect" : "imperfect";
}

/// Full physical input. H1 and H2 are unscaled; the layers are epsilon*H1
/// and epsilon*H2 thick. The displacement jump across a bonded imperfect
/// interface is epsilon*kappa times the traction.
struct StripConfig {
    Material upper;
    Material lower;
    double H1 = 0.0;
    double H2 = 0.0;
    double epsilon = 0.0;
    double a = 0.0; // cell length
    double l = 0.0; // crack length
    double kappa = 0.0;

    InterfaceKind interface_kind() const {
        return kappa > 0.0 ? InterfaceKind::Imperfect : InterfaceKind::Perfect;
    }
    double thickness_upper() const { return epsilon * H1; }
    double thickness_lower() const { return epsilon * H2; }
};

struct Violation {
    std::string field;
    std::string constraint;
    double value = 0.0;
};

inline std::vector<Violation> validate_config(const StripConfig &cfg) {
    std::vector<Violation> out;
    auto require = [&](bool ok, const char *field, const char *constraint, double v) {
        // NaN fails every comparison, so it is reported here as well.
        if (!ok) out.push_back({field, constraint, v});
    };
    require(cfg.upper.shear_modulus > 0.0, "upper.shear_modulus", "> 0", cfg.upper.shear_modulus);
    require(cfg.upper.density > 0.0, "upper.density", "> 0", cfg.upper.density);
    require(cfg.lower.shear_modulus > 0.0, "lower.shear_modulus", "> 0", cfg.lower.shear_modulus);
    require(cfg.lower.density > 0.0, "lower.density", "> 0", cfg.lower.density);
    require(cfg.H1 > 0.0, "H1", "> 0", cfg.H1);
    require(cfg.H2 > 0.0, "H2", "> 0", cfg.H2);
    require(cfg.epsilon > 0.0, "epsilon", "> 0", cfg.epsilon);
    require(cfg.a > 0.0, "a", "> 0", cfg.a);
    require(cfg.l > 0.0, "l", "> 0", cfg.l);
    require(cfg.l < cfg.a, "l", "< a", cfg.l);
    require(cfg.kappa >= 0.0, "kappa", ">= 0", cfg.kappa);
    return out;
}

inline std::string describe(const std::vector<Violation> &violations) {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) os << "; ";
        os << violations[i].field << " must be " << violations[i].constraint
           << " (got " << violations[i].value << ")";
    }
    return os.str();
}

struct DerivedConstants {
    StripConfig cfg;
    InterfaceKind kind = InterfaceKind::Perfect;

    double c1 = 0, c2 = 0;
    // Effective speeds of the four segments: outside the crack (1, 4), above
    // it (2) and below it (3).
    double d1 = 0, d2 = 0, d3 = 0, d4 = 0;
    double mu_star = 0, H_star = 0;
    double kappa_star = 0;
    double lambda_star = std::numeric_limits<double>::infinity();
    double xA = 0, xB = 0;

    double mu1H1 = 0, mu2H2 = 0; // mu_j H_j
    double flux_sum = 0;         // mu1 H1 + mu2 H2

    double d(int m) const {
        switch (m) {
        case 1: return d1;
        case 2: return d2;
        case 3: return d3;
        case 4: return d4;
        }
        throw std::out_of_range("segment index must be 1..4");
    }
    double H_total() const { return cfg.H1 + cfg.H2; }
    bool is_homogeneous_symmetric(double rel_tol = 1e-12) const {
        auto close = [&](double x, double y) { return std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y)); };
        return close(cfg.upper.shear_modulus, cfg.lower.shear_modulus) &&
               close(cfg.upper.density, cfg.lower.density) && close(cfg.H1, cfg.H2);
    }
};

inline DerivedConstants derive_constants(const StripConfig &cfg) {
    if (auto v = validate_config(cfg); !v.empty()) throw ConfigError(describe(v));

    DerivedConstants k;
    k.cfg = cfg;
    k.kind = cfg.interface_kind();
    const double mu1 = cfg.upper.shear_modulus, mu2 = cfg.lower.shear_modulus;
    k.c1 = cfg.upper.wavespeed();
    k.c2 = cfg.lower.wavespeed();
    k.mu1H1 = mu1 * cfg.H1;
    k.mu2H2 = mu2 * cfg.H2;
    k.flux_sum = k.mu1H1 + k.mu2H2;
    k.d1 = k.c1 * k.c2 * std::sqrt(k.flux_sum / (k.mu1H1 * k.c2 * k.c2 + k.mu2H2 * k.c1 * k.c1));
    k.d2 = k.c1;
    k.d3 = k.c2;
    k.d4 = k.d1;
    k.mu_star = (mu1 - mu2) / (mu1 + mu2);
    k.H_star = (cfg.H1 - cfg.H2) / (cfg.H1 + cfg.H2);
    if (k.kind == InterfaceKind::Imperfect) {
        k.kappa_star = cfg.kappa * (mu1 + mu2) / (cfg.H1 + cfg.H2);
        k.lambda_star = (cfg.H1 + cfg.H2) * std::sqrt(k.flux_sum / (mu1 * mu2 * cfg.H1 * cfg.H2 * cfg.kappa));
    }
    k.xA = -cfg.l / 2.0;
    k.xB = cfg.l / 2.0;
    return k;
}

/// Inverts kappa_star = kappa (mu1 + mu2) / (H1 + H2).
inline double kappa_from_kappa_star(double kappa_star, double mu1, double mu2, double H1, double H2) {
    return kappa_star * (H1 + H2) / (mu1 + mu2);
}

} // namespace bistrip
