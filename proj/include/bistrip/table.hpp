// Dispersion table rows and their CSV / gnuplot serialization.
#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bistrip/zero_order.hpp"

namespace bistrip {

struct DispersionRow {
    double K = 0.0;
    int branch_index = 0;
    BranchClass classification = BranchClass::Unclassified;
    double omega0 = 0.0;
    double omega1_sq = std::numeric_limits<double>::quiet_NaN();
    double omega_corrected = std::numeric_limits<double>::quiet_NaN();
    double residual = 0.0;
    double conditioning = std::numeric_limits<double>::quiet_NaN();
    std::string source = "model"; // model | oracle
    std::string method = "none";  // schur | eigen | analytic | none | flagged:<reason>
};

inline const std::vector<std::string> &table_columns() {
    static const std::vector<std::string> cols = {"K",        "branch_index", "class",        "omega0",
                                                  "omega1_sq", "omega_corrected", "residual", "conditioning",
                                                  "source",   "method"};
    return cols;
}

class TableFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void sort_rows(std::vector<DispersionRow> &rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const DispersionRow &a, const DispersionRow &b) {
        return a.K != b.K ? a.K < b.K : a.omega0 < b.omega0;
    });
}

namespace detail {

inline std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(const std::string &s, int line, const char *col) {
    errno = 0;
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
        throw TableFormatError("line " + std::to_string(line) + ": bad number '" + s + "' in column " + col);
    return v;
}

inline std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace detail

/// Writes comment lines (each prefixed with '#'), the header and the rows.
inline void write_csv(std::ostream &os, const std::vector<DispersionRow> &rows,
                      const std::vector<std::string> &comments = {}) {
    for (const auto &c : comments) os << "# " << c << '\n';
    const auto &cols = table_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto &r : rows) {
        os << detail::fmt17(r.K) << ',' << r.branch_index << ',' << to_string(r.classification) << ','
           << detail::fmt17(r.omega0) << ',' << detail::fmt17(r.omega1_sq) << ','
           << detail::fmt17(r.omega_corrected) << ',' << detail::fmt17(r.residual) << ','
           << detail::fmt17(r.conditioning) << ',' << r.source << ',' << r.method << '\n';
    }
}

inline std::vector<DispersionRow> read_csv(std::istream &is) {
    std::vector<DispersionRow> rows;
    std::string line;
    int lineno = 0;
    bool header = false;
    const auto &cols = table_columns();
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto f = detail::split_csv(line);
        if (!header) {
            if (f != cols) throw TableFormatError("line " + std::to_string(lineno) + ": unexpected header '" + line + "'");
            header = true;
            continue;
        }
        if (f.size() != cols.size())
            throw TableFormatError("line " + std::to_string(lineno) + ": expected " + std::to_string(cols.size()) +
                                   " fields, got " + std::to_string(f.size()));
        DispersionRow r;
        r.K = detail::parse_double(f[0], lineno, "K");
        r.branch_index = static_cast<int>(detail::parse_double(f[1], lineno, "branch_index"));
        try {
            r.classification = branch_class_from_string(f[2]);
        } catch (const std::invalid_argument &e) {
            throw TableFormatError("line " + std::to_string(lineno) + ": " + e.what());
        }
        r.omega0 = detail::parse_double(f[3], lineno, "omega0");
        r.omega1_sq = detail::parse_double(f[4], lineno, "omega1_sq");
        r.omega_corrected = detail::parse_double(f[5], lineno, "omega_corrected");
        r.residual = detail::parse_double(f[6], lineno, "residual");
        r.conditioning = detail::parse_double(f[7], lineno, "conditioning");
        r.source = f[8];
        r.method = f[9];
        rows.push_back(r);
    }
    if (!header) throw TableFormatError("missing header row");
    return rows;
}

/// gnuplot data: one block per (source, branch_index), blocks separated by two
/// blank lines so that `index` selects a branch. Columns K, omega0,
/// omega_corrected.
inline void write_dat(std::ostream &os, const std::vector<DispersionRow> &rows) {
    std::map<std::pair<std::string, int>, std::vector<const DispersionRow *>> blocks;
    for (const auto &r : rows) blocks[{r.source, r.branch_index}].push_back(&r);
    bool first = true;
    for (const auto &[key, pts] : blocks) {
        if (!first) os << "\n\n";
        first = false;
        os << "# source=" << key.first << " branch=" << key.second << "\n# K omega0 omega_corrected\n";
        for (const auto *r : pts)
            os << detail::fmt17(r->K) << ' ' << detail::fmt17(r->omega0) << ' ' << detail::fmt17(r->omega_corrected)
               << '\n';
    }
}

} // namespace bistrip
