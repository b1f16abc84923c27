#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <unistd.h>

#include "pbe/cli.hpp"
#include "pbe/errors.hpp"

using namespace pbe;
using namespace pbe::cli;
using Catch::Approx;

namespace {

int config_error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        std::smatch m;
        if (std::regex_search(what, m, std::regex("^line ([0-9]+): "))) return std::stoi(m[1]);
        return -1;
    }
    return 0;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> lines(const std::string& s) {
    auto v = split(s, '\n');
    if (!v.empty() && v.back().empty()) v.pop_back();
    return v;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() / ("pbe_cli_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name, const std::string& text) const {
        const auto p = (path / name).string();
        std::ofstream(p) << text;
        return p;
    }
    std::string at(const std::string& name) const { return (path / name).string(); }
};

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "pbe");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

bool single_error_line(const std::string& err) {
    const auto ls = lines(err);
    int errors = 0;
    for (const auto& l : ls)
        if (std::regex_match(l, std::regex("^error\\[[a-z]+\\]: .+"))) ++errors;
    return errors == 1;
}

double field(const std::string& out, const std::string& key) {
    for (const auto& l : lines(out))
        if (l.rfind(key + " = ", 0) == 0) return std::stod(l.substr(key.size() + 3));
    FAIL("missing key " << key);
    return 0.0;
}

const char* kSmallBorn = R"(# small Born ion
[coefficients]
nonlinearity = linearized
[charges]
charge = 1 0 0 0
[mesh]
molecular_radius = 2
outer_radius = 20
)";

}  // namespace

TEST_CASE("empty config yields the documented defaults", "[cli][config]") {
    const RunConfig c = parse_config("");
    CHECK(c.coefficients.eps_m == 1.0);
    CHECK(c.coefficients.eps_s == 78.0);
    CHECK(c.coefficients.kappa_sq == 0.918168);
    CHECK(c.qoi_eta == 0.005);
    CHECK(c.strategy.dorfler_theta == 0.2);
    CHECK(c.strategy.dominance_factor == 3.0);
    CHECK(c.strategy.half_rule == 0.5);
    CHECK(std::holds_alternative<ChargeSystem>(c.charges));
    CHECK(std::get<ChargeSystem>(c.charges).empty());
    CHECK(std::holds_alternative<MeshGenerator>(c.mesh));
    CHECK(c == RunConfig{});
    CHECK(parse_config("# only a comment\n\n   \n") == RunConfig{});
}

TEST_CASE("config values, comments and whitespace", "[cli][config]") {
    const RunConfig c = parse_config(
        "output = run.csv  # trailing comment\n"
        "[coefficients]\n  eps_s=80\nkappa_sq = 0\t\n"
        "[ charges ]\ncharge = 0.5 0.1 0 -0.2\ncharge = -0.5 0 0 0\n"
        "[mesh]\nsurface_subdivisions = 2\nmarking = longest_edge\n"
        "[strategy]\nkind = acr\nmax_levels = 4\nform = alternate\n"
        "[solver]\npreconditioner = sgs\nnewton_max_iterations = 7\n");
    CHECK(c.output == "run.csv");
    CHECK(c.coefficients.eps_s == 80.0);
    CHECK(c.coefficients.kappa_sq == 0.0);
    const auto& q = std::get<ChargeSystem>(c.charges);
    REQUIRE(q.size() == 2);
    CHECK(q[0] == Charge{0.5, {0.1, 0.0, -0.2}});
    CHECK(q[1].q == -0.5);
    CHECK(std::get<MeshGenerator>(c.mesh).ball.surface_subdivisions == 2);
    CHECK(c.marking == BisectionMode::LongestEdge);
    CHECK(c.strategy.kind == StrategyKind::ACR);
    CHECK(c.strategy.max_levels == 4);
    CHECK(c.form == ErrorForm::Alternate);
    CHECK(c.solver.preconditioner == Preconditioner::SymmetricGaussSeidel);
    CHECK(c.newton.max_iterations == 7);
}

TEST_CASE("config errors carry the offending line", "[cli][config]") {
    CHECK(config_error_line("[coefficients]\nkappa_sq = -1\n") == 2);
    CHECK(config_error_line("[coefficients]\n\neps_m = abc\n") == 3);
    CHECK(config_error_line("[coefficients]\nfoo = 1\n") == 2);
    CHECK(config_error_line("eps_m = 1\n") == 1);  // key outside its section
    CHECK(config_error_line("[nowhere]\n") == 1);
    CHECK(config_error_line("[mesh\n") == 1);
    CHECK(config_error_line("[coefficients]\njust text\n") == 2);
    CHECK(config_error_line("[coefficients]\neps_m = 1\neps_m = 2\n") == 3);
    CHECK(config_error_line("[strategy]\nkind = greedy\n") == 2);
    CHECK(config_error_line("[strategy]\nmax_levels = 1.5\n") == 2);
    CHECK(config_error_line("[strategy]\ndorfler_theta = 0\n") == 2);
    CHECK(config_error_line("[strategy]\ndominance_factor = 0.5\n") == 2);
    CHECK(config_error_line("[coefficients]\nqoi_eta = 0\n") == 2);
    CHECK(config_error_line("[coefficients]\neps_m = nan\n") == 2);
    CHECK(config_error_line("[charges]\ncharge = 1 0 0\n") == 2);
    CHECK(config_error_line("[mesh]\nmolecular_layers = 1\n") == 2);
    CHECK(config_error_line("[mesh]\nmolecular_radius = 30\n") == 2);
    CHECK(config_error_line("[mesh]\nouter_radius = 5\nmolecular_radius = 6\n") == 3);
}

TEST_CASE("exactly one charge source and one mesh source", "[cli][config]") {
    CHECK(config_error_line("[charges]\ncharge = 1 0 0 0\npqr = a.pqr\n") == 3);
    CHECK(config_error_line("[charges]\npqr = a.pqr\ncharge = 1 0 0 0\n") == 3);
    CHECK(config_error_line("[mesh]\nfile = m.txt\nouter_radius = 9\n") == 3);
    CHECK(config_error_line("[mesh]\nsolvent_layers = 3\nfile = m.txt\n") == 3);
    // marking is not a generator parameter
    const auto c = parse_config("[mesh]\nfile = m.txt\nmarking = longest_edge\n[charges]\npqr = x.pqr\n");
    CHECK(std::get<MeshFile>(c.mesh).path == "m.txt");
    CHECK(std::get<PqrFile>(c.charges).path == "x.pqr");
}

TEST_CASE("serialize and parse round trip", "[cli][config][property]") {
    CHECK(parse_config(serialize_config(RunConfig{})) == RunConfig{});

    std::mt19937 rng(20240611);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        RunConfig c;
        c.coefficients.eps_m = 0.1 + 10 * U(rng);
        c.coefficients.eps_s = 1 + 100 * U(rng);
        c.coefficients.kappa_sq = U(rng) < 0.2 ? 0.0 : 3 * U(rng);
        c.coefficients.charge_scale = 1e-3 + 1e3 * U(rng);
        c.nonlinearity = U(rng) < 0.5 ? Nonlinearity::Linearized : Nonlinearity::Nonlinear;
        c.qoi_eta = 1e-4 + 0.1 * U(rng);
        if (U(rng) < 0.3) {
            c.charges = PqrFile{"mol/" + std::to_string(trial) + ".pqr"};
        } else {
            ChargeSystem q;
            for (int i = 0; i < trial % 4; ++i) q.push_back({U(rng) - 0.5, {U(rng) - 0.5, U(rng) - 0.5, -U(rng)}});
            c.charges = q;
        }
        if (U(rng) < 0.3) {
            c.mesh = MeshFile{"mesh_" + std::to_string(trial) + ".txt"};
        } else {
            MeshGenerator g;
            g.ball.molecular_radius = 0.5 + U(rng);
            g.ball.outer_radius = 2 + 30 * U(rng);
            g.ball.molecular_layers = 2 + trial % 3;
            g.ball.solvent_layers = trial % 5;
            g.ball.surface_subdivisions = trial % 3;
            g.ball.min_dihedral_degrees = 5 * U(rng);
            g.charge_refinement = trial % 2;
            c.mesh = g;
        }
        c.marking = U(rng) < 0.5 ? BisectionMode::AllEdges : BisectionMode::LongestEdge;
        c.strategy.kind = static_cast<StrategyKind>(trial % 4);
        c.strategy.dorfler_theta = 0.01 + 0.99 * U(rng);
        c.strategy.dominance_factor = 1 + 5 * U(rng);
        c.strategy.half_rule = 0.01 + 0.99 * U(rng);
        c.strategy.max_levels = trial % 7;
        c.form = U(rng) < 0.5 ? ErrorForm::Standard : ErrorForm::Alternate;
        c.solver.rel_tolerance = std::pow(10.0, -14 * U(rng));
        c.solver.abs_tolerance = U(rng) < 0.5 ? 0.0 : 1e-20 * U(rng);
        c.solver.max_iterations = static_cast<std::size_t>(trial * 13);
        c.solver.preconditioner = static_cast<Preconditioner>(trial % 3);
        c.newton.rel_tolerance = 1e-12 * (1 + U(rng));
        c.newton.abs_tolerance = 1e-15 * U(rng);
        c.newton.max_iterations = 1 + trial % 60;
        c.newton.damping = 0.1 + 0.9 * U(rng);
        c.newton.min_damping = 1e-8 + 1e-3 * U(rng);
        c.newton.clamp_bound = 1 + 100 * U(rng);
        c.output = trial % 2 ? "out/table.csv" : "";

        const std::string text = serialize_config(c);
        const RunConfig back = parse_config(text);
        CHECK(back == c);
        CHECK(serialize_config(back) == text);
    }
}

TEST_CASE("PQR charges", "[cli][pqr]") {
    const std::string methanol =
        "REMARK   methanol-like test molecule\n"
        "ATOM      1  C1  MOL     1      -0.380   0.000   0.000  0.27 1.90\n"
        "ATOM      2  H1  MOL A   1       0.700   0.000   0.100  0.43 1.20\n"
        "HETATM    3  O1  MOL     1       0.000   1.200  -0.300 -0.7 1.52\n"
        "TER\nEND\n";
    std::vector<std::string> warnings;
    const auto q = parse_pqr(methanol, &warnings);
    REQUIRE(q.size() == 3);
    CHECK(warnings.empty());
    CHECK(q[0] == Charge{0.27, {-0.38, 0.0, 0.0}});
    CHECK(q[1] == Charge{0.43, {0.7, 0.0, 0.1}});
    CHECK(q[2] == Charge{-0.7, {0.0, 1.2, -0.3}});
    double net = 0.0;
    for (const auto& c : q) net += c.q;
    CHECK(std::abs(net) < 1e-12);

    warnings.clear();
    CHECK(parse_pqr("", &warnings).empty());
    CHECK(warnings.size() == 1);
    CHECK(parse_pqr("REMARK nothing here\n").empty());

    try {
        parse_pqr("REMARK\nATOM 1 C MOL 1 0.0 0.0 0.0 0.27 1.9\nATOM 2 O MOL 1 1.0 0.0 0.0 abc 1.5\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("charge") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_pqr("ATOM 1 0 0 0 1\n"), ParseError);
    CHECK_THROWS_AS(parse_pqr("ATOM 1 C MOL 1 0.0 0.0 0.0 0.27 wide\n"), ParseError);
}

TEST_CASE("table emission", "[cli][table]") {
    IterationRecord r;
    r.level = 0;
    r.vertex_count = 6718;
    r.estimate = -1.14;
    r.effectivity = 1.05;
    r.E_r = 2.05e-1;
    r.E_m = 5.26e-9;
    r.E_Gamma = -1.34;
    r.E_dOmega = 4.86e-4;

    const auto csv = lines(emit_table({r}, TableFormat::Csv));
    REQUIRE(csv.size() == 2);
    CHECK(csv[0] == "level,vertices,estimate,effectivity,E_r,E_m,E_Gamma,E_dOmega");
    CHECK(csv[1] == "0,6718,-1.14,1.05,2.05e-01,5.26e-09,-1.34e+00,4.86e-04");

    IterationRecord s = r;
    s.level = 1;
    s.effectivity.reset();
    const auto csv2 = lines(emit_table({r, s}, TableFormat::Csv));
    REQUIRE(csv2.size() == 3);
    CHECK(split(csv2[2], ',')[3].empty());

    const auto aligned = lines(emit_table({r, s}, TableFormat::Aligned));
    REQUIRE(aligned.size() == 3);
    CHECK(aligned[2].find("--") != std::string::npos);
    CHECK(aligned[1].find("2.05e-01") != std::string::npos);
    for (const auto& l : aligned) CHECK(l.size() == aligned[0].size());
}

TEST_CASE("CSV round trip to printed precision", "[cli][table][property]") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> expo(-12, 6);
    auto value = [&] { return mant(rng) * std::pow(10.0, expo(rng)); };
    std::vector<IterationRecord> records;
    for (int i = 0; i < 50; ++i) {
        IterationRecord r;
        r.level = i;
        r.vertex_count = 100 + 37 * static_cast<std::size_t>(i);
        r.estimate = value();
        if (i % 3) r.effectivity = 0.5 + std::abs(mant(rng));
        r.E_r = value();
        r.E_m = value();
        r.E_Gamma = value();
        r.E_dOmega = value();
        records.push_back(r);
    }
    const auto rows = lines(emit_table(records, TableFormat::Csv));
    REQUIRE(rows.size() == records.size() + 1);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto f = split(rows[i + 1], ',');
        REQUIRE(f.size() == 8);
        const auto& r = records[i];
        CHECK(std::stoi(f[0]) == r.level);
        CHECK(std::stoul(f[1]) == r.vertex_count);
        // 3 significant digits: relative error at most 5e-3
        CHECK(std::abs(std::stod(f[2]) - r.estimate) <= 5e-3 * std::abs(r.estimate));
        if (r.effectivity)
            CHECK(std::abs(std::stod(f[3]) - *r.effectivity) <= 5e-3 * *r.effectivity);
        else
            CHECK(f[3].empty());
        const double comps[] = {r.E_r, r.E_m, r.E_Gamma, r.E_dOmega};
        for (int k = 0; k < 4; ++k) CHECK(std::abs(std::stod(f[4 + k]) - comps[k]) <= 5e-3 * std::abs(comps[k]));
    }
}

TEST_CASE("reference files round trip", "[cli][reference]") {
    TempDir dir;
    const ReferenceValue ref{-276.74987512345678, 2, 411635, "nonlinear"};
    save_reference(ref, dir.at("ref.json"));
    const auto back = load_reference(dir.at("ref.json"));
    CHECK(back.qoi == ref.qoi);
    CHECK(back.degree == 2);
    CHECK(back.vertices == 411635);
    CHECK(back.nonlinearity == "nonlinear");

    CHECK_THROWS_AS(load_reference(dir.at("missing.json")), Error);
    dir.file("bad.json", "{\"degree\": 2}");
    try {
        load_reference(dir.at("bad.json"));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.category() == "io");
    }
}

TEST_CASE("error categories map to exit codes", "[cli]") {
    CHECK(exit_code_for("config") == 2);
    CHECK(exit_code_for("usage") == 2);
    CHECK(exit_code_for("domain") == 2);
    CHECK(exit_code_for("solver") == 3);
    CHECK(exit_code_for("io") == 4);
    CHECK(exit_code_for("parse") == 4);
}

TEST_CASE("command line: errors", "[cli][run]") {
    TempDir dir;
    auto r = run_cli({"solve", "--config", dir.at("none.ini")});
    CHECK(r.code == 4);
    CHECK(single_error_line(r.err));

    r = run_cli({"solve", "--config", dir.file("bad.ini", "[coefficients]\nkappa_sq = -1\n")});
    CHECK(r.code == 2);
    CHECK(single_error_line(r.err));
    CHECK(r.err.find("line 2") != std::string::npos);

    r = run_cli({"frobnicate"});
    CHECK(r.code == 2);
    CHECK(single_error_line(r.err));

    r = run_cli({"solve"});
    CHECK(r.code == 2);
    CHECK(single_error_line(r.err));

    r = run_cli({"refine", "--config", dir.file("ok.ini", kSmallBorn), "--strategy", "greedy"});
    CHECK(r.code == 2);
    CHECK(single_error_line(r.err));

    // Charge outside the molecule is a configuration problem.
    r = run_cli({"solve", "--config", dir.file("far.ini", "[charges]\ncharge = 1 5 0 0\n")});
    CHECK(r.code == 2);
    CHECK(single_error_line(r.err));

    dir.file("broken.pqr", "ATOM 1 C MOL 1 0.0 0.0 0.0 x 1.9\n");
    r = run_cli({"solve", "--config", dir.file("pqr.ini", "[charges]\npqr = broken.pqr\n")});
    CHECK(r.code == 4);
    CHECK(single_error_line(r.err));

    dir.file("broken.mesh", "pbemesh 1\nvertices 2\n0 0 0\n");
    r = run_cli({"solve", "--config", dir.file("mesh.ini", "[mesh]\nfile = broken.mesh\n")});
    CHECK(r.code == 4);
    CHECK(single_error_line(r.err));

    std::string starved = kSmallBorn;
    starved += "[solver]\nmax_iterations = 1\nrel_tolerance = 1e-14\n";
    r = run_cli({"solve", "--config", dir.file("starved.ini", starved)});
    CHECK(r.code == 3);
    CHECK(single_error_line(r.err));

    r = run_cli({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("refine") != std::string::npos);
}

TEST_CASE("command line: solve, estimate, refine, oracle", "[cli][run]") {
    TempDir dir;
    const auto cfg = dir.file("born.ini", kSmallBorn);

    auto r = run_cli({"solve", "--config", cfg});
    REQUIRE(r.code == 0);
    const double q1 = field(r.out, "qoi");
    CHECK(field(r.out, "degree") == 1);

    r = run_cli({"solve", "--config", cfg, "--enriched", "--out", dir.at("ref.json")});
    REQUIRE(r.code == 0);
    const double q2 = field(r.out, "qoi");
    CHECK(load_reference(dir.at("ref.json")).qoi == Approx(q2).epsilon(1e-9));

    r = run_cli({"estimate", "--config", cfg});
    REQUIRE(r.code == 0);
    const double est = field(r.out, "estimate");
    CHECK(field(r.out, "qoi") == Approx(q1).epsilon(1e-9));
    // the linear estimate is exactly the quadratic-minus-linear difference
    CHECK(est == Approx(q2 - q1).epsilon(1e-6));
    CHECK(est == Approx(field(r.out, "E_r") + field(r.out, "E_m") + field(r.out, "E_Gamma") +
                        field(r.out, "E_dOmega") + field(r.out, "E_neg"))
                     .epsilon(1e-8));

    r = run_cli({"refine", "--config", cfg, "--levels", "1", "--reference", dir.at("ref.json")});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "level,vertices,estimate,effectivity,E_r,E_m,E_Gamma,E_dOmega");
    // level 0 is measured against its own quadratic solve: effectivity 1
    CHECK(split(rows[1], ',')[3] == "1");
    CHECK(!split(rows[2], ',')[3].empty());

    // determinism
    const auto again = run_cli({"refine", "--config", cfg, "--levels", "1", "--reference", dir.at("ref.json")});
    CHECK(again.out == r.out);

    r = run_cli({"refine", "--config", cfg, "--levels", "0", "--format", "table", "--out", dir.at("t.txt")});
    REQUIRE(r.code == 0);
    std::ifstream tin(dir.at("t.txt"));
    std::stringstream tbuf;
    tbuf << tin.rdbuf();
    CHECK(tbuf.str().find("--") != std::string::npos);

    r = run_cli({"oracle", "--config", cfg, "--nodes", "2000"});
    REQUIRE(r.code == 0);
    CHECK(field(r.out, "qoi") == Approx(field(r.out, "closed_form")).epsilon(1e-6));
    // the 3D linear solve on the coarse mesh is within a few percent of the oracle
    CHECK(q1 == Approx(field(r.out, "qoi")).epsilon(0.05));
}

TEST_CASE("command line: generated mesh file reproduces the generator", "[cli][run]") {
    TempDir dir;
    const auto cfg = dir.file("born.ini", kSmallBorn);
    auto r = run_cli({"mesh-gen", "--config", cfg, "--out", dir.at("born.mesh")});
    REQUIRE(r.code == 0);
    const auto direct = run_cli({"estimate", "--config", cfg});
    const auto from_file = run_cli({"estimate", "--config",
                                    dir.file("file.ini", "[coefficients]\nnonlinearity = linearized\n"
                                                         "[charges]\ncharge = 1 0 0 0\n[mesh]\nfile = born.mesh\n")});
    REQUIRE(direct.code == 0);
    REQUIRE(from_file.code == 0);
    CHECK(direct.out == from_file.out);
}

TEST_CASE("bundled sample inputs parse", "[cli][config]") {
    const std::filesystem::path data(PBE_DATA_DIR);
    for (const char* f : {"born.ini", "three_charge.ini"}) {
        std::ifstream in(data / f);
        REQUIRE(in);
        std::stringstream text;
        text << in.rdbuf();
        CHECK_NOTHROW(parse_config(text.str()));
    }
    std::ifstream in(data / "three_charge.pqr");
    std::stringstream text;
    text << in.rdbuf();
    CHECK(parse_pqr(text.str()).size() == 3);
}
