// INI-style run configuration: sections [upper], [lower], [geometry],
// [interface], [sweep], [quadrature], [grid], [output].
#pragma once

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bistrip/fd_oracle.hpp"
#include "bistrip/interface_constants.hpp"
#include "bistrip/model.hpp"

namespace bistrip {

struct RunConfig {
    std::string title;
    StripConfig strip;
    std::optional<double> kappa_star; // as given in the file, if kappa was derived from it
    int k_points = 61;                // uniform over [0, pi/a], both ends included
    std::optional<double> omega_max;  // rad/s; default_omega_max() when absent
    QuadratureSettings quadrature;
    GridOptions grid;
    std::string output_dir = "out";
};

/// Window that shows the first few Bloch branches and at least the first
/// standing wave: max(6 pi d1 / a, 1.3 pi c_max / l).
inline double default_omega_max(const DerivedConstants &k) {
    const double cmax = std::max(k.c1, k.c2);
    return std::max(6.0 * pi * k.d1 / k.cfg.a, 1.3 * pi * cmax / k.cfg.l);
}

inline double omega_max_for(const RunConfig &rc, const DerivedConstants &k) {
    return rc.omega_max ? *rc.omega_max : default_omega_max(k);
}

namespace detail {

using boost::property_tree::ptree;

class IniReader {
public:
    explicit IniReader(const ptree &pt) : pt_(pt) {
        static const std::map<std::string, std::set<std::string>> allowed = {
            {"upper", {"name", "shear_modulus", "density"}},
            {"lower", {"name", "shear_modulus", "density"}},
            {"geometry", {"H1", "H2", "epsilon", "a", "l"}},
            {"interface", {"kind", "kappa", "kappa_star"}},
            {"sweep", {"k_points", "omega_max"}},
            {"quadrature", {"abs_tol", "rel_tol", "t_max", "t_min", "max_subdivisions"}},
            {"grid", {"nx", "ny", "refine_factor", "refine_fraction", "y_grading", "scale"}},
            {"output", {"directory"}},
        };
        for (const auto &[name, sec] : pt_) {
            auto it = allowed.find(name);
            if (sec.empty() && (it == allowed.end() || !sec.data().empty())) {
                if (name != "title") throw ConfigError(name + ": unknown top-level key");
                continue;
            }
            if (it == allowed.end()) throw ConfigError(name + ": unknown section");
            for (const auto &[key, value] : sec)
                if (!it->second.count(key)) throw ConfigError(name + "." + key + ": unknown key");
        }
    }

    std::optional<std::string> text(const std::string &path) const {
        auto v = pt_.get_optional<std::string>(ptree::path_type(path, '.'));
        if (!v) return std::nullopt;
        std::string s = *v;
        const auto b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }

    std::optional<double> number(const std::string &path) const {
        auto s = text(path);
        if (!s) return std::nullopt;
        errno = 0;
        char *end = nullptr;
        const double v = std::strtod(s->c_str(), &end);
        if (s->empty() || end != s->c_str() + s->size() || errno == ERANGE || !std::isfinite(v))
            throw ConfigError(path + ": not a finite number ('" + *s + "')");
        return v;
    }

    double required(const std::string &path) const {
        auto v = number(path);
        if (!v) throw ConfigError(path + ": missing required key");
        return *v;
    }

    std::optional<int> integer(const std::string &path) const {
        auto v = number(path);
        if (!v) return std::nullopt;
        if (*v != std::floor(*v) || std::abs(*v) > 1e9) throw ConfigError(path + ": not an integer");
        return static_cast<int>(*v);
    }

private:
    const ptree &pt_;
};

} // namespace detail

/// Parses and validates. Every failure is a ConfigError whose message starts
/// with the offending key.
inline RunConfig parse_run_config(std::istream &is) {
    boost::property_tree::ptree pt;
    try {
        boost::property_tree::read_ini(is, pt);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
    }
    const detail::IniReader in(pt);
    RunConfig rc;
    if (auto t = in.text("title")) rc.title = *t;
    auto &s = rc.strip;
    s.upper.shear_modulus = in.required("upper.shear_modulus");
    s.upper.density = in.required("upper.density");
    s.lower.shear_modulus = in.required("lower.shear_modulus");
    s.lower.density = in.required("lower.density");
    s.H1 = in.required("geometry.H1");
    s.H2 = in.required("geometry.H2");
    s.epsilon = in.required("geometry.epsilon");
    s.a = in.required("geometry.a");
    s.l = in.required("geometry.l");

    const std::string kind = in.text("interface.kind").value_or("perfect");
    const auto kappa = in.number("interface.kappa");
    const auto kappa_star = in.number("interface.kappa_star");
    if (kind == "perfect") {
        if (kappa) throw ConfigError("interface.kappa: not allowed with kind = perfect");
        if (kappa_star) throw ConfigError("interface.kappa_star: not allowed with kind = perfect");
    } else if (kind == "imperfect") {
        if (kappa && kappa_star) throw ConfigError("interface.kappa_star: give either kappa or kappa_star, not both");
        if (!kappa && !kappa_star) throw ConfigError("interface.kappa: imperfect interface needs kappa or kappa_star");
        if (kappa) {
            if (!(*kappa > 0.0)) throw ConfigError("interface.kappa: must be > 0");
            s.kappa = *kappa;
        } else {
            if (!(*kappa_star > 0.0)) throw ConfigError("interface.kappa_star: must be > 0");
            rc.kappa_star = *kappa_star;
            s.kappa = kappa_from_kappa_star(*kappa_star, s.upper.shear_modulus, s.lower.shear_modulus, s.H1, s.H2);
        }
    } else {
        throw ConfigError("interface.kind: expected 'perfect' or 'imperfect', got '" + kind + "'");
    }

    if (auto v = in.integer("sweep.k_points")) rc.k_points = *v;
    if (rc.k_points < 1) throw ConfigError("sweep.k_points: must be >= 1");
    if (auto v = in.number("sweep.omega_max")) {
        if (!(*v > 0.0)) throw ConfigError("sweep.omega_max: must be > 0");
        rc.omega_max = *v;
    }

    auto &q = rc.quadrature;
    if (auto v = in.number("quadrature.abs_tol")) q.abs_tol = *v;
    if (auto v = in.number("quadrature.rel_tol")) q.rel_tol = *v;
    if (auto v = in.number("quadrature.t_max")) q.t_max = *v;
    if (auto v = in.number("quadrature.t_min")) q.t_min = *v;
    if (auto v = in.integer("quadrature.max_subdivisions")) {
        if (*v < 1) throw ConfigError("quadrature.max_subdivisions: must be >= 1");
        q.max_subdivisions = static_cast<std::size_t>(*v);
    }
    check(q);

    auto &g = rc.grid;
    if (auto v = in.integer("grid.nx")) g.nx = *v;
    if (auto v = in.integer("grid.ny")) g.ny_min = *v;
    if (auto v = in.number("grid.refine_factor")) g.refine_factor = *v;
    if (auto v = in.number("grid.refine_fraction")) g.refine_fraction = *v;
    if (auto v = in.number("grid.y_grading")) g.y_grading = *v;
    if (auto v = in.number("grid.scale")) g.scale = *v;
    if (g.nx < 64) throw ConfigError("grid.nx: must be >= 64");
    if (g.ny_min < 4) throw ConfigError("grid.ny: must be >= 4");
    if (!(g.refine_factor >= 1.0)) throw ConfigError("grid.refine_factor: must be >= 1");
    if (!(g.refine_fraction >= 0.0)) throw ConfigError("grid.refine_fraction: must be >= 0");
    if (!(g.y_grading >= 1.0)) throw ConfigError("grid.y_grading: must be >= 1");
    if (!(g.scale > 0.0)) throw ConfigError("grid.scale: must be > 0");

    if (auto d = in.text("output.directory")) rc.output_dir = *d;

    derive_constants(s); // throws ConfigError listing the violated invariants
    return rc;
}

inline RunConfig load_run_config(const std::string &path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path + ": cannot open configuration file");
    return parse_run_config(f);
}

} // namespace bistrip
