// Command-line front end: constants, dispersion, correct, oracle, compare.
// Exit codes: 0 success, 1 numerical failure (or warnings under --strict),
// 2 configuration or usage error.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bistrip/config.hpp"
#include "bistrip/pipeline.hpp"

namespace fs = std::filesystem;
using namespace bistrip;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<int> k_points;
    std::optional<double> omega_max;
    std::optional<double> grid_scale;
    int threads = 1;
    bool strict = false;
};

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RunConfig load(const Options &o) {
    RunConfig rc = load_run_config(o.config);
    if (o.k_points) {
        if (*o.k_points < 1) throw ConfigError("--k-points: must be >= 1");
        rc.k_points = *o.k_points;
    }
    if (o.omega_max) {
        if (!(*o.omega_max > 0.0)) throw ConfigError("--omega-max: must be > 0");
        rc.omega_max = *o.omega_max;
    }
    if (o.grid_scale) {
        if (!(*o.grid_scale > 0.0)) throw ConfigError("--grid-scale: must be > 0");
        rc.grid.scale = *o.grid_scale;
    }
    if (!o.out.empty()) rc.output_dir = o.out;
    return rc;
}

std::vector<std::string> header_comments(const RunConfig &rc, const std::string &command, double omega_max) {
    std::vector<std::string> c;
    if (!rc.title.empty()) c.push_back("title: " + rc.title);
    c.push_back("command: " + command);
    c.push_back("k_points: " + std::to_string(rc.k_points) + " over [0, pi/a]");
    c.push_back("omega_max: " + detail::fmt17(omega_max));
    c.push_back("interface: " + std::string(to_string(rc.strip.interface_kind())) +
                " kappa=" + detail::fmt17(rc.strip.kappa));
    return c;
}

void write_table(const fs::path &dir, const std::string &stem, const std::vector<DispersionRow> &rows,
                 const std::vector<std::string> &comments) {
    fs::create_directories(dir);
    std::ofstream csv(dir / (stem + ".csv"));
    write_csv(csv, rows, comments);
    std::ofstream dat(dir / (stem + ".dat"));
    write_dat(dat, rows);
    if (!csv || !dat) throw std::runtime_error("failed writing " + (dir / stem).string());
}

nlohmann::json failures_json(const std::vector<SweepFailure> &f) {
    auto arr = nlohmann::json::array();
    for (const auto &x : f) arr.push_back({{"K", x.K}, {"error", x.message}});
    return arr;
}

void write_manifest(const fs::path &dir, const std::string &command, const Options &o, const std::string &started,
                    nlohmann::json extra) {
    extra["command"] = command;
    extra["config"] = o.config;
    extra["started"] = started;
    extra["finished"] = utc_now();
    fs::create_directories(dir);
    std::ofstream(dir / (command + ".manifest.json")) << extra.dump(2) << '\n';
}

int cmd_constants(const Options &o) {
    const RunConfig rc = load(o);
    const auto k = derive_constants(rc.strip);
    const auto alpha = alpha_for(k, rc.quadrature);
    std::printf("interface=%s\n", to_string(k.kind));
    std::printf("c1=%.17g\nc2=%.17g\n", k.c1, k.c2);
    std::printf("d1=%.17g\nd2=%.17g\nd3=%.17g\nd4=%.17g\n", k.d1, k.d2, k.d3, k.d4);
    std::printf("mu_star=%.17g\nH_star=%.17g\n", k.mu_star, k.H_star);
    std::printf("xA=%.17g\nxB=%.17g\n", k.xA, k.xB);
    if (k.kind == InterfaceKind::Imperfect) {
        std::printf("kappa=%.17g\nkappa_star=%.17g\nlambda_star=%.17g\n", rc.strip.kappa, k.kappa_star,
                    k.lambda_star);
        std::printf("alpha_I=%.17g\nalpha_I_error=%.3g\n", alpha.value, alpha.estimated_error);
    } else {
        std::printf("alpha_P=%.17g\nalpha_P_error=%.3g\n", alpha.value, alpha.estimated_error);
    }
    std::printf("omega_max=%.17g\n", omega_max_for(rc, k));
    return 0;
}

int cmd_model(const Options &o, bool corrections) {
    const std::string started = utc_now();
    const std::string command = corrections ? "correct" : "dispersion";
    const RunConfig rc = load(o);
    PipelineOptions po;
    po.threads = o.threads;
    const auto res = run_model(rc, corrections, po);
    const fs::path dir = rc.output_dir;
    write_table(dir, command, res.rows, header_comments(rc, command, res.omega_max));
    int flagged = 0;
    for (const auto &r : res.rows)
        if (r.method.rfind("flagged:", 0) == 0) ++flagged;
    write_manifest(dir, command, o, started,
                   {{"rows", res.rows.size()},
                    {"flagged_rows", flagged},
                    {"omega_max", res.omega_max},
                    {"failures", failures_json(res.failures)},
                    {"warnings", res.warnings},
                    {"status", res.failures.empty() ? "ok" : "partial"}});
    for (const auto &w : res.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto &f : res.failures) std::cerr << "error at K=" << f.K << ": " << f.message << '\n';
    std::printf("%s: %zu rows (%d flagged) -> %s\n", command.c_str(), res.rows.size(), flagged,
                (dir / (command + ".csv")).string().c_str());
    return res.failures.empty() ? 0 : 1;
}

int cmd_oracle(const Options &o) {
    const std::string started = utc_now();
    const RunConfig rc = load(o);
    PipelineOptions po;
    po.threads = o.threads;
    const auto res = run_oracle(rc, po);
    const fs::path dir = rc.output_dir;
    auto comments = header_comments(rc, "oracle", res.omega_max);
    comments.push_back("grid: columns=" + std::to_string(res.grid.columns()) + " ny=" + std::to_string(res.grid.ny1) +
                       " scale=" + detail::fmt17(rc.grid.scale));
    write_table(dir, "oracle", res.rows, comments);
    write_manifest(dir, "oracle", o, started,
                   {{"rows", res.rows.size()},
                    {"grid_columns", res.grid.columns()},
                    {"grid_ny", res.grid.ny1},
                    {"failures", failures_json(res.failures)},
                    {"status", res.failures.empty() ? "ok" : "partial"}});
    for (const auto &f : res.failures) std::cerr << "error at K=" << f.K << ": " << f.message << '\n';
    std::printf("oracle: %zu rows -> %s\n", res.rows.size(), (dir / "oracle.csv").string().c_str());
    return res.failures.empty() ? 0 : 1;
}

int cmd_compare(const Options &o) {
    const std::string started = utc_now();
    const RunConfig rc = load(o);
    PipelineOptions po;
    po.threads = o.threads;
    const auto model = run_model(rc, true, po);
    const auto oracle = run_oracle(rc, po);
    const fs::path dir = rc.output_dir;
    write_table(dir, "correct", model.rows, header_comments(rc, "correct", model.omega_max));
    write_table(dir, "oracle", oracle.rows, header_comments(rc, "oracle", oracle.omega_max));
    const auto rep = compare(model_points(model.rows), oracle.spectra, model.omega_max);
    const std::string text = format_report(rep, rc.title);
    std::ofstream(dir / "report.txt") << text;
    std::cout << text;
    auto fails = failures_json(model.failures);
    for (auto &f : failures_json(oracle.failures)) fails.push_back(f);
    write_manifest(dir, "compare", o, started,
                   {{"matches", rep.matches.size()},
                    {"warnings", rep.warnings},
                    {"failures", fails},
                    {"strict", o.strict},
                    {"status", fails.empty() ? "ok" : "partial"}});
    if (!model.failures.empty() || !oracle.failures.empty()) return 1;
    if (o.strict && !rep.warnings.empty()) {
        std::cerr << "strict: " << rep.warnings.size() << " unmatched-branch warning(s)\n";
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Bloch-Floquet dispersion and first-order eigenfrequency correction for a cracked bi-material strip"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App *sub, bool sweep, bool grid) {
        sub->add_option("--config", o.config, "configuration file")->required();
        if (sweep) {
            sub->add_option("--out", o.out, "output directory (overrides [output] directory)");
            sub->add_option("--k-points", o.k_points, "number of K samples over [0, pi/a]");
            sub->add_option("--threads", o.threads, "worker threads for the K sweep")->check(CLI::PositiveNumber);
        }
        sub->add_option("--omega-max", o.omega_max, "upper end of the frequency window (rad/s)");
        if (grid) sub->add_option("--grid-scale", o.grid_scale, "oracle grid refinement factor");
    };
    auto *constants = app.add_subcommand("constants", "print derived constants and the interface constant alpha");
    add_common(constants, false, false);
    auto *dispersion = app.add_subcommand("dispersion", "zero-order dispersion table");
    add_common(dispersion, true, false);
    auto *correct = app.add_subcommand("correct", "dispersion table with first-order corrections");
    add_common(correct, true, false);
    auto *oracle = app.add_subcommand("oracle", "finite-difference reference spectrum");
    add_common(oracle, true, true);
    auto *cmp = app.add_subcommand("compare", "model against oracle with a discrepancy report");
    add_common(cmp, true, true);
    cmp->add_flag("--strict", o.strict, "exit 1 on unmatched-branch warnings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*constants) return cmd_constants(o);
        if (*dispersion) return cmd_model(o, false);
        if (*correct) return cmd_model(o, true);
        if (*oracle) return cmd_oracle(o);
        if (*cmp) return cmd_compare(o);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
