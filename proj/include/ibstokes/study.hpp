#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ibstokes/analysis.hpp"
#include "ibstokes/errors.hpp"
#include "ibstokes/immersed_boundary.hpp"
#include "ibstokes/kernel.hpp"
#include "ibstokes/mesh.hpp"
#include "ibstokes/stokes.hpp"

namespace ibstokes {

/// Full description of one convergence study.  Matches the flat key=value
/// config format (see parse_config); defaults reproduce the built-in
/// circle experiment.
struct StudyConfig {
    AxisBox domain{{-1.0, -1.0}, {1.0, 1.0}};
    std::string boundary = "circle";  // "circle" | "none" | file path
    double kappa = 2.0;               // circle tension; the pressure jump
    Vec2 g{1.0, 0.0};                 // constant outer force
    double nu = 1.0;
    std::string profile = "cosine";
    std::vector<int> levels{10, 20, 40, 80};
    double gamma1 = 1.0;              // kernel width over mesh size
    std::string reference = "fine:auto";  // "analytic" | "fine:N" | "fine:auto"
    std::vector<double> r_list{1.0, 1.5, 2.0};
    int quad_order = 6;               // right-hand-side quadrature
    double solver_tol = 1e-10;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

inline double parse_double(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + value + "' as a number");
    }
}

inline int parse_int(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": cannot parse '" + value + "' as an integer");
    }
}

// Lists accept space and/or comma separators, with optional [ ] around them.
inline std::string normalize_list(const std::string& value) {
    std::string s = value;
    for (char& ch : s)
        if (ch == ',' || ch == '[' || ch == ']') ch = ' ';
    return s;
}

inline std::vector<double> parse_double_list(const std::string& value,
                                             const std::string& key) {
    std::istringstream in(normalize_list(value));
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_double(tok, key));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

}  // namespace detail

/// Parses the flat key=value config text ('#' starts a comment; blank lines
/// ignored).  Unknown keys and violated invariants raise ConfigError naming
/// the field.
inline StudyConfig parse_config(const std::string& text) {
    StudyConfig cfg;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = detail::trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value, got '" + stripped + "'");
        const std::string key = detail::trim(stripped.substr(0, eq));
        const std::string value = detail::trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("expected key = value, got '" + stripped + "'");

        if (key == "domain_min") {
            const double v = detail::parse_double(value, key);
            cfg.domain.lo = {v, v};
        } else if (key == "domain_max") {
            const double v = detail::parse_double(value, key);
            cfg.domain.hi = {v, v};
        } else if (key == "boundary") {
            cfg.boundary = value;
        } else if (key == "kappa") {
            cfg.kappa = detail::parse_double(value, key);
        } else if (key == "g") {
            const auto v = detail::parse_double_list(value, key);
            if (v.size() != 2) throw ConfigError("g: expected two components");
            cfg.g = {v[0], v[1]};
        } else if (key == "nu") {
            cfg.nu = detail::parse_double(value, key);
        } else if (key == "profile") {
            cfg.profile = value;
        } else if (key == "levels") {
            std::istringstream ls(detail::normalize_list(value));
            std::string tok;
            cfg.levels.clear();
            while (ls >> tok) cfg.levels.push_back(detail::parse_int(tok, key));
        } else if (key == "gamma1") {
            cfg.gamma1 = detail::parse_double(value, key);
        } else if (key == "reference") {
            cfg.reference = value;
        } else if (key == "r_list") {
            cfg.r_list = detail::parse_double_list(value, key);
        } else if (key == "quad_order") {
            cfg.quad_order = detail::parse_int(value, key);
        } else if (key == "solver_tol") {
            cfg.solver_tol = detail::parse_double(value, key);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }

    if (!cfg.domain.valid()) throw ConfigError("domain_min/domain_max: empty domain");
    if (cfg.levels.empty()) throw ConfigError("levels: need at least one level");
    for (int n : cfg.levels)
        if (n < 2) throw ConfigError("levels: every level must be at least 2");
    for (std::size_t k = 1; k < cfg.levels.size(); ++k) {
        if (cfg.levels[k] != 2 * cfg.levels[k - 1])
            throw ConfigError("levels: must double between consecutive levels");
    }
    if (!(cfg.gamma1 > 0.0)) throw ConfigError("gamma1: must be positive");
    if (!(cfg.nu > 0.0)) throw ConfigError("nu: must be positive");
    if (!(cfg.kappa >= 0.0)) throw ConfigError("kappa: must be nonnegative");
    if (cfg.profile != "cosine" && cfg.profile != "hat")
        throw ConfigError("profile: expected cosine or hat");
    if (cfg.quad_order != 1 && cfg.quad_order != 2 && cfg.quad_order != 4 &&
        cfg.quad_order != 6)
        throw ConfigError("quad_order: supported orders are 1, 2, 4, 6");
    if (!(cfg.solver_tol > 0.0)) throw ConfigError("solver_tol: must be positive");
    for (double r : cfg.r_list)
        if (!(r >= 1.0)) throw ConfigError("r_list: every order must be >= 1");
    if (cfg.reference != "analytic" && cfg.reference != "fine:auto") {
        if (cfg.reference.rfind("fine:", 0) != 0)
            throw ConfigError("reference: expected analytic, fine:auto or fine:N");
        const int n = detail::parse_int(cfg.reference.substr(5), "reference");
        if (n <= cfg.levels.back())
            throw ConfigError("reference: fine mesh must be finer than every level");
    }
    if (cfg.reference == "analytic") {
        const Vec2 center = 0.5 * (cfg.domain.lo + cfg.domain.hi);
        if (std::abs(center.x) > 1e-12 || std::abs(center.y) > 1e-12)
            throw ConfigError("reference: analytic reference needs an origin-centered domain");
        if (cfg.boundary != "circle" && cfg.boundary != "none")
            throw ConfigError("reference: analytic reference requires the built-in circle");
    }
    return cfg;
}

/// Boundary data file: one `theta X1 X2 F1 F2` line per sample, strictly
/// increasing theta; '#' comments allowed.
inline ImmersedBoundary load_boundary_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("boundary: cannot open '" + path + "'");
    std::vector<double> nodes;
    std::vector<Vec2> xs, fs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (detail::trim(line).empty()) continue;
        std::istringstream ls(line);
        double t, x1, x2, f1, f2;
        if (!(ls >> t >> x1 >> x2 >> f1 >> f2))
            throw ConfigError("boundary: line " + std::to_string(lineno) +
                              " of '" + path + "' needs 5 numbers");
        std::string extra;
        if (ls >> extra)
            throw ConfigError("boundary: line " + std::to_string(lineno) +
                              " of '" + path + "' has trailing fields");
        if (!nodes.empty() && !(t > nodes.back()))
            throw ConfigError("boundary: theta must increase strictly (line " +
                              std::to_string(lineno) + ")");
        nodes.push_back(t);
        xs.push_back({x1, x2});
        fs.push_back({f1, f2});
    }
    if (nodes.size() < 2)
        throw ConfigError("boundary: '" + path + "' needs at least two samples");
    return sampled_boundary(std::move(nodes), std::move(xs), std::move(fs));
}

/// Mesh + spaces + solution bundle for one resolution, with solve metadata.
struct LevelSolution {
    int n = 0;
    double h = 0.0;
    double epsilon = 0.0;
    std::unique_ptr<TriangleMesh> mesh;
    std::unique_ptr<FemSpaces> spaces;
    DiscreteSolution solution;
    double assemble_seconds = 0.0;
    double solve_seconds = 0.0;
};

/// Builds the mesh, kernel and assembled system for one resolution; fills
/// the level's geometry fields and assembly timing.
inline StokesSystem build_level_system(const StudyConfig& cfg, int n,
                                       LevelSolution& level) {
    using clock = std::chrono::steady_clock;
    level.n = n;
    level.mesh = std::make_unique<TriangleMesh>(n, cfg.domain);
    level.h = level.mesh->mesh_size();
    level.epsilon = cfg.gamma1 * level.h;
    level.spaces = std::make_unique<FemSpaces>(*level.mesh);

    const auto t0 = clock::now();
    StokesSystem system;
    if (cfg.boundary == "none") {
        const Vec2 g = cfg.g;
        system = build_stokes_system(*level.spaces, cfg.nu,
                                     [g](const Vec2&) { return g; }, cfg.quad_order);
    } else {
        ImmersedBoundary ib = cfg.boundary == "circle"
                                  ? circle_boundary(n, cfg.kappa)
                                  : load_boundary_file(cfg.boundary);
        const DeltaKernel kernel(profile_by_name(cfg.profile), level.epsilon);
        validate_separation(ib, cfg.domain, kernel);
        validate_parametrization(ib);
        const MidpointPartition part = build_midpoint_partition(ib);
        const ForceSpreader spread(ib, part, kernel);
        const Vec2 g = cfg.g;
        system = build_stokes_system(*level.spaces, cfg.nu,
                                     [&spread, g](const Vec2& x) { return spread(x) + g; },
                                     cfg.quad_order);
    }
    level.assemble_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return system;
}

/// Runs the full pipeline for one resolution: mesh, kernel, separation
/// check, spreading, assembly, solve, mean normalization.
inline LevelSolution solve_level(const StudyConfig& cfg, int n) {
    using clock = std::chrono::steady_clock;
    LevelSolution level;
    const StokesSystem system = build_level_system(cfg, n, level);
    const auto t0 = clock::now();
    SolveOptions opts;
    opts.tol = cfg.solver_tol;
    level.solution = solve_stokes(system, opts);
    level.solve_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    return level;
}

struct LevelRecord {
    int n = 0;
    double h = 0.0;
    double epsilon = 0.0;
    int velocity_dofs = 0;
    SolveReport solve;
    double assemble_seconds = 0.0;
    double solve_seconds = 0.0;
    double error_seconds = 0.0;
};

struct StudyResult {
    StudyConfig config;
    int reference_n = 0;  // 0 when the reference is analytic
    std::vector<LevelRecord> levels;
    std::vector<ConvergenceReport> reports;  // one per r, in r_list order
};

/// Automatic fine-reference resolution: twice the finest study level.
inline int resolve_reference_n(const StudyConfig& cfg) {
    if (cfg.reference == "analytic") return 0;
    if (cfg.reference == "fine:auto") return 2 * cfg.levels.back();
    return detail::parse_int(cfg.reference.substr(5), "reference");
}

inline StudyResult run_study(const StudyConfig& cfg, bool parallel_levels = false) {
    StudyResult result;
    result.config = cfg;
    result.reference_n = resolve_reference_n(cfg);

    // The reference is solved first; every level compares against it.
    LevelSolution fine_level;
    ReferenceSolution ref;
    if (result.reference_n > 0) {
        fine_level = solve_level(cfg, result.reference_n);
        ref = fine_mesh_reference(fine_level.solution);
    } else {
        ref = analytic_reference();
        ref.analytic.jump = cfg.boundary == "none" ? 0.0 : cfg.kappa;
        ref.analytic.g = cfg.g;
        ref.analytic.domain_area = cfg.domain.area();
    }

    const int error_order = std::max(4, cfg.quad_order);
    struct LevelOutcome {
        LevelRecord record;
        std::vector<ErrorTriple> errors;
    };
    const auto run_one = [&cfg, &ref, error_order](int n) {
        using clock2 = std::chrono::steady_clock;
        LevelOutcome out;
        LevelSolution level = solve_level(cfg, n);
        const auto t0 = clock2::now();
        out.errors = error_norms_multi(level.solution, ref, cfg.r_list, error_order);
        const auto t1 = clock2::now();
        out.record = {level.n,
                      level.h,
                      level.epsilon,
                      level.spaces->num_velocity_dofs(),
                      level.solution.report,
                      level.assemble_seconds,
                      level.solve_seconds,
                      std::chrono::duration<double>(t1 - t0).count()};
        return out;
    };

    std::vector<LevelOutcome> outcomes(cfg.levels.size());
    if (parallel_levels && cfg.levels.size() > 1) {
        std::vector<std::future<LevelOutcome>> futures;
        futures.reserve(cfg.levels.size());
        for (int n : cfg.levels)
            futures.push_back(std::async(std::launch::async, run_one, n));
        for (std::size_t k = 0; k < futures.size(); ++k) outcomes[k] = futures[k].get();
    } else {
        for (std::size_t k = 0; k < cfg.levels.size(); ++k)
            outcomes[k] = run_one(cfg.levels[k]);
    }

    for (auto& out : outcomes) result.levels.push_back(out.record);
    for (std::size_t rk = 0; rk < cfg.r_list.size(); ++rk) {
        std::vector<std::pair<double, ErrorTriple>> rows;
        rows.reserve(outcomes.size());
        for (auto& out : outcomes) rows.emplace_back(out.record.h, out.errors[rk]);
        result.reports.push_back(convergence_rates(cfg.r_list[rk], rows));
    }
    return result;
}

namespace detail {

inline std::string format_number(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

inline std::string format_error(double v) { return format_number("%.6g", v); }
inline std::string format_rate(double v) {
    return std::isfinite(v) ? format_number("%.4f", v) : std::string("---");
}

}  // namespace detail

/// CSV report: one row per (r, level) with the rate columns of the first
/// level per r left as "---".
inline std::string emit_csv(const StudyResult& result) {
    std::string out = "r,h,E_L_u,E_W1_u,E_L_p,rho_L_u,rho_W1_u,rho_L_p\n";
    for (const auto& report : result.reports) {
        for (const auto& row : report.rows) {
            out += detail::format_number("%g", report.r);
            out += ',';
            out += detail::format_number("%.4f", row.h);
            out += ',';
            out += detail::format_error(row.errors.velocity_Lr);
            out += ',';
            out += detail::format_error(row.errors.velocity_W1r);
            out += ',';
            out += detail::format_error(row.errors.pressure_Lr);
            for (int i = 0; i < 3; ++i) {
                out += ',';
                out += row.has_rho ? detail::format_rate(row.rho[i]) : "---";
            }
            out += '\n';
        }
    }
    return out;
}

/// Markdown report: one table per r with interleaved error/rate columns,
/// followed by the per-level solver certificates.
inline std::string emit_markdown(const StudyResult& result) {
    std::string out;
    for (const auto& report : result.reports) {
        out += "## r = " + detail::format_number("%g", report.r) + "\n\n";
        out += "| h | E^{r(1)} | rho^{r(1)} | E^{r(2)} | rho^{r(2)} | E^{r(3)} | rho^{r(3)} |\n";
        out += "|---|---|---|---|---|---|---|\n";
        for (const auto& row : report.rows) {
            out += "| " + detail::format_number("%.4f", row.h);
            const double e[3] = {row.errors.velocity_Lr, row.errors.velocity_W1r,
                                 row.errors.pressure_Lr};
            for (int i = 0; i < 3; ++i) {
                out += " | " + detail::format_error(e[i]) + " | ";
                out += row.has_rho ? detail::format_rate(row.rho[i]) : "---";
            }
            out += " |\n";
        }
        out += '\n';
    }
    out += "## levels\n\n";
    out += "| N | h | velocity dofs | solver | iterations | residual |\n";
    out += "|---|---|---|---|---|---|\n";
    for (const auto& level : result.levels) {
        out += "| " + std::to_string(level.n);
        out += " | " + detail::format_number("%.4f", level.h);
        out += " | " + std::to_string(level.velocity_dofs);
        out += level.solve.direct ? " | direct" : " | minres";
        out += " | " + std::to_string(level.solve.iterations);
        out += " | " + detail::format_number("%.3e", level.solve.residual);
        out += " |\n";
    }
    if (result.reference_n > 0)
        out += "\nreference: fine mesh N = " + std::to_string(result.reference_n) + "\n";
    else
        out += "\nreference: analytic\n";
    return out;
}

inline std::string emit_report(const StudyResult& result, const std::string& format) {
    if (format == "csv") return emit_csv(result);
    if (format == "markdown") return emit_markdown(result);
    throw ConfigError("format: expected csv or markdown");
}

}  // namespace ibstokes
