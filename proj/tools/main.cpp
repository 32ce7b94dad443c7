#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ibstokes/ibstokes.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ibstokes::ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw ibstokes::ConfigError("cannot open output file '" + path + "'");
    out << text;
}

struct CommonFlags {
    std::string config_path;
    std::string format = "markdown";
    std::string out_path;
    int quad_order = 0;        // 0: keep config value
    std::string profile;       // empty: keep config value
    std::string reference;     // empty: keep config value
};

ibstokes::StudyConfig load_config(const CommonFlags& flags) {
    const std::string text = flags.config_path.empty() ? "" : read_file(flags.config_path);
    ibstokes::StudyConfig cfg = ibstokes::parse_config(text);
    // flag overrides re-validate through a config round trip
    std::string overrides;
    if (flags.quad_order > 0) overrides += "quad_order = " + std::to_string(flags.quad_order) + "\n";
    if (!flags.profile.empty()) overrides += "profile = " + flags.profile + "\n";
    if (!flags.reference.empty()) overrides += "reference = " + flags.reference + "\n";
    if (!overrides.empty()) {
        std::string merged = text;
        merged += '\n';
        merged += overrides;
        cfg = ibstokes::parse_config(merged);
    }
    return cfg;
}

int run_study_command(const CommonFlags& flags, bool parallel_levels) {
    const ibstokes::StudyConfig cfg = load_config(flags);
    const ibstokes::StudyResult result = ibstokes::run_study(cfg, parallel_levels);
    write_output(flags.out_path, ibstokes::emit_report(result, flags.format));
    for (const auto& level : result.levels) {
        std::fprintf(stderr,
                     "level N=%d  assemble %.2fs  solve %.2fs  error %.2fs  residual %.2e\n",
                     level.n, level.assemble_seconds, level.solve_seconds,
                     level.error_seconds, level.solve.residual);
    }
    return 0;
}

int run_solve_command(const CommonFlags& flags, int level_n,
                      const std::string& dump_system, const std::string& dump_mesh) {
    ibstokes::StudyConfig cfg = load_config(flags);
    const int n = level_n > 0 ? level_n : cfg.levels.back();

    ibstokes::LevelSolution level;
    const ibstokes::StokesSystem system = ibstokes::build_level_system(cfg, n, level);
    if (!dump_system.empty()) {
        const ibstokes::SaddleOperator op(system.A, system.B, system.c);
        std::ofstream out(dump_system);
        if (!out) throw ibstokes::ConfigError("cannot open '" + dump_system + "'");
        ibstokes::write_matrix_market(out, op.assemble_full());
    }
    if (!dump_mesh.empty()) {
        std::ofstream out(dump_mesh);
        if (!out) throw ibstokes::ConfigError("cannot open '" + dump_mesh + "'");
        level.mesh->dump(out);
    }
    ibstokes::SolveOptions opts;
    opts.tol = cfg.solver_tol;
    level.solution = ibstokes::solve_stokes(system, opts);

    // magnitudes = norms against the zero field
    ibstokes::ReferenceSolution zero = ibstokes::analytic_reference();
    zero.analytic.jump = 0.0;
    zero.analytic.g = {0.0, 0.0};
    zero.analytic.domain_area = cfg.domain.area();
    const ibstokes::ErrorTriple norms =
        ibstokes::error_norms(level.solution, zero, 2.0, std::max(4, cfg.quad_order));

    std::ostringstream report;
    report.precision(6);
    report << "N = " << n << "\n"
           << "h = " << level.h << "\n"
           << "epsilon = " << level.epsilon << "\n"
           << "velocity dofs = " << level.spaces->num_velocity_dofs() << "\n"
           << "pressure dofs = " << level.spaces->num_pressure_dofs() << "\n"
           << "solver = " << (level.solution.report.direct ? "direct" : "minres") << "\n"
           << "iterations = " << level.solution.report.iterations << "\n"
           << "residual = " << level.solution.report.residual << "\n"
           << "velocity L2 = " << norms.velocity_Lr << "\n"
           << "velocity W12 = " << norms.velocity_W1r << "\n"
           << "pressure L2 = " << norms.pressure_Lr << "\n";
    if (cfg.boundary == "circle")
        report << "pressure jump probe = "
               << ibstokes::pressure_jump_probe(level.solution) << "\n";
    write_output(flags.out_path, report.str());
    return 0;
}

int run_kernel_check(const CommonFlags& flags) {
    const std::string name = flags.profile.empty() ? "cosine" : flags.profile;
    const ibstokes::Profile1D profile = ibstokes::profile_by_name(name);
    const std::vector<double> widths{0.2, 0.1, 0.05, 0.025};

    std::ostringstream report;
    report.precision(12);
    report << "profile = " << name << "\n\nzeroth moment\n";
    for (double eps : widths) {
        const ibstokes::DeltaKernel kernel(profile, eps);
        report << "  eps = " << eps << "  moment = " << ibstokes::moment_zero(kernel)
               << "\n";
    }
    report << "\nweighted Lp scaling (slope of log value vs log eps)\n";
    struct Case {
        double p;
        int weight_power;
        double expected;
    };
    for (const Case& c : {Case{1.0, 1, 1.0}, Case{1.0, 0, 0.0}, Case{2.0, 0, -1.0}}) {
        const auto points = ibstokes::weighted_lp_scaling(profile, widths, c.p, c.weight_power);
        const auto slopes = ibstokes::log_log_slopes(points);
        report << "  p = " << c.p << "  weight power = " << c.weight_power
               << "  expected " << c.expected << "  slopes =";
        for (double s : slopes) report << ' ' << (s + 0.0);  // +0.0 folds away -0
        report << "\n";
    }
    write_output(flags.out_path, report.str());
    return 0;
}

int run_jump_command(const CommonFlags& flags, int level_n, double r_in, double r_out,
                     int samples) {
    ibstokes::StudyConfig cfg = load_config(flags);
    const int n = level_n > 0 ? level_n : cfg.levels.back();
    if (cfg.boundary == "none")
        throw ibstokes::ConfigError("jump probe needs an immersed boundary");

    ibstokes::LevelSolution level = ibstokes::solve_level(cfg, n);
    if (!(0.5 - r_in > level.epsilon) || !(r_out - 0.5 > level.epsilon))
        throw ibstokes::ConfigError(
            "jump probe radii must clear the smearing width around the interface");
    const double jump = ibstokes::pressure_jump_probe(level.solution, r_in, r_out, samples);

    std::ostringstream report;
    report.precision(6);
    report << "N = " << n << "\n"
           << "r_in = " << r_in << "\n"
           << "r_out = " << r_out << "\n"
           << "samples = " << samples << "\n"
           << "pressure jump = " << jump << "\n";
    write_output(flags.out_path, report.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Immersed-boundary Stokes convergence studies"};
    app.require_subcommand(1);

    CommonFlags flags;
    app.add_option("--config", flags.config_path, "config file (flat key = value lines)");
    app.add_option("--format", flags.format, "report format: csv or markdown")
        ->check(CLI::IsMember({"csv", "markdown"}));
    app.add_option("--out", flags.out_path, "write the report here instead of stdout");
    app.add_option("--quad-order", flags.quad_order, "right-hand-side quadrature order")
        ->check(CLI::IsMember({1, 2, 4, 6}));
    app.add_option("--profile", flags.profile, "kernel profile: cosine or hat")
        ->check(CLI::IsMember({"cosine", "hat"}));
    app.add_option("--reference", flags.reference,
                   "error reference: analytic, fine:auto or fine:N");

    auto* study = app.add_subcommand("study", "run the mesh ladder and report rates");
    study->fallthrough();
    bool parallel_levels = false;
    study->add_flag("--parallel-levels", parallel_levels, "solve levels concurrently");

    auto* solve = app.add_subcommand("solve", "solve one level and print statistics");
    solve->fallthrough();
    int solve_level_n = 0;
    std::string dump_system, dump_mesh;
    solve->add_option("--level", solve_level_n, "mesh resolution N (default: finest)");
    solve->add_option("--dump-system", dump_system, "write the saddle matrix (Matrix Market)");
    solve->add_option("--dump-mesh", dump_mesh, "write the mesh as plain text");

    auto* kernel = app.add_subcommand("kernel-check", "report kernel moments and scaling");
    kernel->fallthrough();

    auto* jump = app.add_subcommand("jump", "probe the pressure jump across the interface");
    jump->fallthrough();
    int jump_level_n = 0, jump_samples = 360;
    double r_in = 0.35, r_out = 0.65;
    jump->add_option("--level", jump_level_n, "mesh resolution N (default: finest)");
    jump->add_option("--r-in", r_in, "inner probe radius");
    jump->add_option("--r-out", r_out, "outer probe radius");
    jump->add_option("--samples", jump_samples, "angular samples per circle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (study->parsed()) return run_study_command(flags, parallel_levels);
        if (solve->parsed()) return run_solve_command(flags, solve_level_n, dump_system, dump_mesh);
        if (kernel->parsed()) return run_kernel_check(flags);
        if (jump->parsed()) return run_jump_command(flags, jump_level_n, r_in, r_out, jump_samples);
    } catch (const ibstokes::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ibstokes::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
