#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "pbe/cli.hpp"
#include "pbe/errors.hpp"
#include "pbe/radial_oracle.hpp"

namespace pbe::cli {

namespace {

namespace fs = std::filesystem;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw Error("io", "failed writing '" + path + "'");
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// Loaded configuration with file paths resolved against the config's directory.
RunConfig load_config(const std::string& path) {
    RunConfig c = parse_config(read_text(path));
    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](std::string& p) {
        if (!p.empty() && fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
    };
    if (auto* f = std::get_if<PqrFile>(&c.charges)) resolve(f->path);
    if (auto* f = std::get_if<MeshFile>(&c.mesh)) resolve(f->path);
    resolve(c.output);
    return c;
}

ChargeSystem load_charges(const RunConfig& c, std::ostream& err) {
    if (const auto* inline_list = std::get_if<ChargeSystem>(&c.charges)) return *inline_list;
    std::vector<std::string> warnings;
    auto q = parse_pqr(read_text(std::get<PqrFile>(c.charges).path), &warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";
    return q;
}

SimplicialMesh load_mesh(const RunConfig& c, const ChargeSystem& charges) {
    if (const auto* f = std::get_if<MeshFile>(&c.mesh)) {
        try {
            return read_mesh_file(f->path);
        } catch (const MeshError& e) {
            throw Error("io", "mesh file '" + f->path + "': " + e.what());
        } catch (const ParseError& e) {
            throw Error("io", "mesh file '" + f->path + "': " + e.what());
        }
    }
    const auto& g = std::get<MeshGenerator>(c.mesh);
    SimplicialMesh mesh = build_ball_mesh(g.ball);
    if (g.charge_refinement > 0 && !charges.empty()) {
        std::vector<Point3> points;
        for (const auto& q : charges) points.push_back(q.x);
        mesh = refine_around_points(mesh, points, g.charge_refinement);
    }
    return mesh;
}

PbeProblem make_problem(const RunConfig& c, std::ostream& err) {
    auto charges = load_charges(c, err);
    auto mesh = std::make_shared<const SimplicialMesh>(load_mesh(c, charges));
    return PbeProblem(mesh, c.coefficients, std::move(charges), c.nonlinearity, c.qoi_eta);
}

SolveOptions solve_options(const RunConfig& c) { return {c.solver, c.newton}; }

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
    for (const auto& w : warnings) err << "warning: " << w << "\n";
}

const char* nonlinearity_name(Nonlinearity n) { return n == Nonlinearity::Nonlinear ? "nonlinear" : "linearized"; }

int cmd_mesh_gen(const std::string& config_path, std::string out_path, std::ostream& out, std::ostream& err) {
    const RunConfig c = load_config(config_path);
    if (out_path.empty()) out_path = c.output;
    const auto mesh = load_mesh(c, load_charges(c, err));
    if (out_path.empty()) {
        write_mesh(mesh, out);
    } else {
        write_mesh_file(mesh, out_path);
        out << "vertices = " << mesh.num_vertices() << "\ncells = " << mesh.num_cells() << "\n";
    }
    return 0;
}

int cmd_solve(const std::string& config_path, bool enriched, const std::string& out_path, std::ostream& out,
              std::ostream& err) {
    const RunConfig c = load_config(config_path);
    const PbeProblem problem = make_problem(c, err);
    const int degree = enriched ? 2 : 1;
    const Solution sol = solve(problem, solve_options(c), degree);
    print_warnings(sol.warnings, err);
    const double value = qoi(problem, sol);
    out << "qoi = " << num(value) << "\n";
    out << "degree = " << degree << "\n";
    out << "vertices = " << problem.mesh().num_vertices() << "\n";
    out << "newton_iterations = " << sol.newton.iterations << "\n";
    if (!out_path.empty())
        save_reference({value, degree, problem.mesh().num_vertices(), nonlinearity_name(c.nonlinearity)}, out_path);
    return 0;
}

int cmd_estimate(const std::string& config_path, std::ostream& out, std::ostream& err) {
    const RunConfig c = load_config(config_path);
    const PbeProblem problem = make_problem(c, err);
    const auto options = solve_options(c);
    const Solution sol = solve(problem, options);
    print_warnings(sol.warnings, err);
    const auto adj = solve_adjoint(problem, &sol.U_r, options.linear, options.newton.clamp_bound);
    const auto b =
        compute_error_breakdown(problem, sol, adj, build_liftings(problem), c.form, options.newton.clamp_bound);
    out << "qoi = " << num(qoi(problem, sol)) << "\n";
    out << "estimate = " << num(b.total) << "\n";
    out << "E_r = " << num(b.E_r) << "\n";
    out << "E_m = " << num(b.E_m) << "\n";
    out << "E_Gamma = " << num(b.E_Gamma) << "\n";
    out << "E_dOmega = " << num(b.E_dOmega) << "\n";
    out << "E_neg = " << num(b.E_neg) << "\n";
    if (b.E_har) out << "E_har = " << num(*b.E_har) << "\n";
    out << "ucr_action = " << to_string(ucr_decide(b, c.strategy)) << "\n";
    return 0;
}

struct RefineArgs {
    std::string config;
    int levels = -1;
    std::string strategy;
    std::string reference;
    std::string format = "csv";
    std::string out;
};

int cmd_refine(const RefineArgs& a, std::ostream& out, std::ostream& err) {
    RunConfig c = load_config(a.config);
    if (a.levels >= 0) c.strategy.max_levels = a.levels;
    if (!a.strategy.empty()) {
        try {
            c.strategy.kind = parse_strategy(a.strategy);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("--strategy: ") + e.what());
        }
    }
    LoopOptions options;
    options.solve = solve_options(c);
    options.bisection.mode = c.marking;
    options.form = c.form;
    if (!a.reference.empty()) options.reference = load_reference(a.reference).qoi;

    const PbeProblem problem = make_problem(c, err);
    const auto records = run_refinement_loop(problem, c.strategy, options);
    for (const auto& r : records)
        for (const auto& w : r.warnings) err << "warning: level " << r.level << ": " << w << "\n";

    const auto text = emit_table(records, a.format == "table" ? TableFormat::Aligned : TableFormat::Csv);
    const std::string path = a.out.empty() ? c.output : a.out;
    if (path.empty())
        out << text;
    else
        write_text(path, text);
    return 0;
}

int cmd_oracle(const std::string& config_path, int nodes, std::ostream& out, std::ostream& err) {
    const RunConfig c = load_config(config_path);
    const auto* g = std::get_if<MeshGenerator>(&c.mesh);
    if (!g) throw ConfigError("oracle needs generator parameters in [mesh], not a mesh file");
    const auto charges = load_charges(c, err);
    if (charges.size() != 1 || !(charges[0].x == Point3{0.0, 0.0, 0.0}))
        throw ConfigError("oracle needs exactly one charge at the origin");
    const double R = g->ball.molecular_radius;
    const double Ro = g->ball.outer_radius;
    const double q = charges[0].q;
    const auto sol = solve_radial(R, Ro, c.coefficients, q, nodes, c.nonlinearity, c.newton.clamp_bound);
    out << "qoi = " << num(sol.qoi) << "\n";
    out << "nodes = " << nodes << "\n";
    if (c.nonlinearity == Nonlinearity::Linearized)
        out << "closed_form = " << num(born_linear_closed_form(R, c.coefficients, q, Ro)) << "\n";
    out << "born_energy = " << num(born_energy(R, c.coefficients, q)) << "\n";
    return 0;
}

std::string one_line(std::string s) {
    for (auto& ch : s)
        if (ch == '\n' || ch == '\r') ch = ' ';
    return s;
}

int report(std::ostream& err, const std::string& category, const std::string& what) {
    err << "error[" << category << "]: " << one_line(what) << "\n";
    return exit_code_for(category);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Goal-oriented adaptive finite elements for the Poisson-Boltzmann equation", "pbe"};
    app.require_subcommand(1);

    std::string config;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config, "Configuration file")->required();
    };

    auto* mesh_gen = app.add_subcommand("mesh-gen", "Generate (or load) the configured mesh and write it");
    add_config(mesh_gen);
    std::string mesh_out;
    mesh_gen->add_option("--out", mesh_out, "Mesh file to write (default: stdout)");

    auto* solve_cmd = app.add_subcommand("solve", "Solve and print the quantity of interest");
    add_config(solve_cmd);
    bool enriched = false;
    std::string solve_out;
    solve_cmd->add_flag("--enriched", enriched, "Use quadratic elements");
    solve_cmd->add_option("--out", solve_out, "Write the QoI as a reference file (JSON)");

    auto* estimate_cmd = app.add_subcommand("estimate", "Print the error estimate and its components");
    add_config(estimate_cmd);

    auto* refine_cmd = app.add_subcommand("refine", "Run the adaptive refinement loop and print a table");
    RefineArgs ra;
    refine_cmd->add_option("--config", ra.config, "Configuration file")->required();
    refine_cmd->add_option("--levels", ra.levels, "Number of refinement levels")->check(CLI::NonNegativeNumber);
    refine_cmd->add_option("--strategy", ra.strategy, "uniform, ucr, acr or classical");
    refine_cmd->add_option("--reference", ra.reference, "Reference file written by solve --out");
    refine_cmd->add_option("--format", ra.format, "csv or table")->check(CLI::IsMember({"csv", "table"}));
    refine_cmd->add_option("--out", ra.out, "Table file to write (default: stdout)");

    auto* oracle_cmd = app.add_subcommand("oracle", "Radial reference solution for a single centred charge");
    add_config(oracle_cmd);
    int nodes = 4000;
    oracle_cmd->add_option("--nodes", nodes, "Radial grid intervals")->check(CLI::Range(10, 10000000));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        return report(err, "usage", e.what());
    }

    try {
        if (*mesh_gen) return cmd_mesh_gen(config, mesh_out, out, err);
        if (*solve_cmd) return cmd_solve(config, enriched, solve_out, out, err);
        if (*estimate_cmd) return cmd_estimate(config, out, err);
        if (*refine_cmd) return cmd_refine(ra, out, err);
        if (*oracle_cmd) return cmd_oracle(config, nodes, out, err);
    } catch (const Error& e) {
        return report(err, e.category(), e.what());
    } catch (const std::exception& e) {
        return report(err, "internal", e.what());
    }
    return report(err, "usage", "no command given");
}

}  // namespace pbe::cli
