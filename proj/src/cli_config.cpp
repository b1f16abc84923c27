#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "pbe/cli.hpp"
#include "pbe/errors.hpp"

namespace pbe::cli {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t j = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > j) out.push_back(s.substr(j, i - j));
    }
    return out;
}

struct Entry {
    std::string key;
    std::string_view value;
    int line = 0;
};

[[noreturn]] void fail(const Entry& e, const std::string& what) { throw ConfigError("'" + e.key + "' " + what, e.line); }

std::optional<double> number(std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

double to_double(const Entry& e) {
    if (auto v = number(e.value)) return *v;
    fail(e, "expects a number, got '" + std::string(e.value) + "'");
}

int to_int(const Entry& e) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (ec != std::errc() || ptr != e.value.data() + e.value.size())
        fail(e, "expects an integer, got '" + std::string(e.value) + "'");
    return v;
}

template <class T, std::size_t N>
T to_enum(const Entry& e, const std::array<std::pair<const char*, T>, N>& names) {
    for (const auto& [name, value] : names)
        if (e.value == name) return value;
    std::string allowed;
    for (const auto& n : names) allowed += (allowed.empty() ? "" : "|") + std::string(n.first);
    fail(e, "expects one of " + allowed + ", got '" + std::string(e.value) + "'");
}

template <class T, std::size_t N>
const char* enum_name(T value, const std::array<std::pair<const char*, T>, N>& names) {
    for (const auto& [name, v] : names)
        if (v == value) return name;
    return "?";
}

constexpr std::array<std::pair<const char*, Nonlinearity>, 2> kNonlinearity{
    {{"linearized", Nonlinearity::Linearized}, {"nonlinear", Nonlinearity::Nonlinear}}};
constexpr std::array<std::pair<const char*, BisectionMode>, 2> kMarking{
    {{"all_edges", BisectionMode::AllEdges}, {"longest_edge", BisectionMode::LongestEdge}}};
constexpr std::array<std::pair<const char*, StrategyKind>, 4> kStrategy{{{"uniform", StrategyKind::Uniform},
                                                                         {"ucr", StrategyKind::UCR},
                                                                         {"acr", StrategyKind::ACR},
                                                                         {"classical", StrategyKind::Classical}}};
constexpr std::array<std::pair<const char*, ErrorForm>, 2> kForm{
    {{"standard", ErrorForm::Standard}, {"alternate", ErrorForm::Alternate}}};
constexpr std::array<std::pair<const char*, Preconditioner>, 3> kPreconditioner{
    {{"none", Preconditioner::None}, {"jacobi", Preconditioner::Jacobi}, {"sgs", Preconditioner::SymmetricGaussSeidel}}};

using Setter = std::function<void(RunConfig&, const Entry&)>;

template <class F>
Setter positive(F field) {
    return [field](RunConfig& c, const Entry& e) {
        const double v = to_double(e);
        if (!(v > 0.0)) fail(e, "must be positive");
        field(c) = v;
    };
}

template <class F>
Setter nonnegative(F field) {
    return [field](RunConfig& c, const Entry& e) {
        const double v = to_double(e);
        if (!(v >= 0.0)) fail(e, "must be nonnegative");
        field(c) = v;
    };
}

template <class F>
Setter unit_interval(F field) {
    return [field](RunConfig& c, const Entry& e) {
        const double v = to_double(e);
        if (!(v > 0.0 && v <= 1.0)) fail(e, "must lie in (0, 1]");
        field(c) = v;
    };
}

template <class F>
Setter integer_at_least(F field, int lo) {
    return [field, lo](RunConfig& c, const Entry& e) {
        const int v = to_int(e);
        if (v < lo) fail(e, "must be at least " + std::to_string(lo));
        field(c) = v;
    };
}

MeshGenerator& generator(RunConfig& c) { return std::get<MeshGenerator>(c.mesh); }

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        t[".output"] = [](RunConfig& c, const Entry& e) {
            if (e.value.empty()) fail(e, "needs a path");
            c.output = std::string(e.value);
        };

        t["coefficients.eps_m"] = positive([](RunConfig& c) -> double& { return c.coefficients.eps_m; });
        t["coefficients.eps_s"] = positive([](RunConfig& c) -> double& { return c.coefficients.eps_s; });
        t["coefficients.kappa_sq"] = nonnegative([](RunConfig& c) -> double& { return c.coefficients.kappa_sq; });
        t["coefficients.charge_scale"] =
            positive([](RunConfig& c) -> double& { return c.coefficients.charge_scale; });
        t["coefficients.qoi_eta"] = positive([](RunConfig& c) -> double& { return c.qoi_eta; });
        t["coefficients.nonlinearity"] = [](RunConfig& c, const Entry& e) {
            c.nonlinearity = to_enum(e, kNonlinearity);
        };

        t["charges.pqr"] = [](RunConfig& c, const Entry& e) {
            if (e.value.empty()) fail(e, "needs a path");
            c.charges = PqrFile{std::string(e.value)};
        };
        t["charges.charge"] = [](RunConfig& c, const Entry& e) {
            const auto tok = split_ws(e.value);
            std::array<double, 4> v{};
            bool ok = tok.size() == 4;
            for (std::size_t i = 0; ok && i < 4; ++i) {
                const auto x = number(tok[i]);
                ok = x.has_value();
                if (ok) v[i] = *x;
            }
            if (!ok) fail(e, "expects 'q x y z', got '" + std::string(e.value) + "'");
            std::get<ChargeSystem>(c.charges).push_back({v[0], {v[1], v[2], v[3]}});
        };

        t["mesh.file"] = [](RunConfig& c, const Entry& e) {
            if (e.value.empty()) fail(e, "needs a path");
            c.mesh = MeshFile{std::string(e.value)};
        };
        t["mesh.molecular_radius"] =
            positive([](RunConfig& c) -> double& { return generator(c).ball.molecular_radius; });
        t["mesh.outer_radius"] = positive([](RunConfig& c) -> double& { return generator(c).ball.outer_radius; });
        t["mesh.molecular_layers"] =
            integer_at_least([](RunConfig& c) -> int& { return generator(c).ball.molecular_layers; }, 2);
        t["mesh.solvent_layers"] =
            integer_at_least([](RunConfig& c) -> int& { return generator(c).ball.solvent_layers; }, 0);
        t["mesh.surface_subdivisions"] =
            integer_at_least([](RunConfig& c) -> int& { return generator(c).ball.surface_subdivisions; }, 0);
        t["mesh.min_dihedral_degrees"] =
            nonnegative([](RunConfig& c) -> double& { return generator(c).ball.min_dihedral_degrees; });
        t["mesh.charge_refinement"] =
            integer_at_least([](RunConfig& c) -> int& { return generator(c).charge_refinement; }, 0);
        t["mesh.marking"] = [](RunConfig& c, const Entry& e) { c.marking = to_enum(e, kMarking); };

        t["strategy.kind"] = [](RunConfig& c, const Entry& e) { c.strategy.kind = to_enum(e, kStrategy); };
        t["strategy.dorfler_theta"] =
            unit_interval([](RunConfig& c) -> double& { return c.strategy.dorfler_theta; });
        t["strategy.dominance_factor"] = [](RunConfig& c, const Entry& e) {
            const double v = to_double(e);
            if (!(v >= 1.0)) fail(e, "must be at least 1");
            c.strategy.dominance_factor = v;
        };
        t["strategy.half_rule"] = unit_interval([](RunConfig& c) -> double& { return c.strategy.half_rule; });
        t["strategy.max_levels"] = integer_at_least([](RunConfig& c) -> int& { return c.strategy.max_levels; }, 0);
        t["strategy.form"] = [](RunConfig& c, const Entry& e) { c.form = to_enum(e, kForm); };

        t["solver.rel_tolerance"] = positive([](RunConfig& c) -> double& { return c.solver.rel_tolerance; });
        t["solver.abs_tolerance"] = nonnegative([](RunConfig& c) -> double& { return c.solver.abs_tolerance; });
        t["solver.max_iterations"] = [](RunConfig& c, const Entry& e) {
            const int v = to_int(e);
            if (v < 0) fail(e, "must be nonnegative");
            c.solver.max_iterations = static_cast<std::size_t>(v);
        };
        t["solver.preconditioner"] = [](RunConfig& c, const Entry& e) {
            c.solver.preconditioner = to_enum(e, kPreconditioner);
        };
        t["solver.newton_rel_tolerance"] = positive([](RunConfig& c) -> double& { return c.newton.rel_tolerance; });
        t["solver.newton_abs_tolerance"] =
            nonnegative([](RunConfig& c) -> double& { return c.newton.abs_tolerance; });
        t["solver.newton_max_iterations"] =
            integer_at_least([](RunConfig& c) -> int& { return c.newton.max_iterations; }, 1);
        t["solver.newton_damping"] = unit_interval([](RunConfig& c) -> double& { return c.newton.damping; });
        t["solver.newton_min_damping"] = unit_interval([](RunConfig& c) -> double& { return c.newton.min_damping; });
        t["solver.clamp_bound"] = positive([](RunConfig& c) -> double& { return c.newton.clamp_bound; });
        return t;
    }();
    return table;
}

const std::set<std::string> kSections{"coefficients", "charges", "mesh", "strategy", "solver"};

bool is_generator_key(const std::string& key) {
    return key.rfind("mesh.", 0) == 0 && key != "mesh.file" && key != "mesh.marking";
}

std::string fmt(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::string section;
    std::map<std::string, int> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header", line_no);
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!kSections.count(section)) throw ConfigError("unknown section [" + section + "]", line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
        const std::string key(trim(line.substr(0, eq)));
        const Entry e{key, trim(line.substr(eq + 1)), line_no};
        const std::string full = section + "." + key;

        const auto it = setters().find(full);
        if (it == setters().end()) {
            throw ConfigError("unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"),
                              line_no);
        }
        if (full != "charges.charge" && seen.count(full)) fail(e, "is set twice");

        if (full == "charges.pqr" && seen.count("charges.charge"))
            fail(e, "conflicts with inline charges (only one charge source is allowed)");
        if (full == "charges.charge" && seen.count("charges.pqr"))
            fail(e, "conflicts with the PQR file (only one charge source is allowed)");
        const bool gen = is_generator_key(full);
        if (full == "mesh.file") {
            for (const auto& [k, l] : seen)
                if (is_generator_key(k)) fail(e, "conflicts with generator parameters (only one mesh source is allowed)");
        }
        if (gen && seen.count("mesh.file"))
            fail(e, "conflicts with the mesh file (only one mesh source is allowed)");

        it->second(c, e);
        seen.emplace(full, line_no);
    }

    if (const auto* g = std::get_if<MeshGenerator>(&c.mesh)) {
        if (!(g->ball.molecular_radius < g->ball.outer_radius)) {
            int line = 0;
            for (const char* k : {"mesh.molecular_radius", "mesh.outer_radius"})
                if (seen.count(k)) line = std::max(line, seen.at(k));
            throw ConfigError("molecular_radius must be smaller than outer_radius", line);
        }
    }
    return c;
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream s;
    if (!c.output.empty()) s << "output = " << c.output << "\n\n";

    s << "[coefficients]\n";
    s << "eps_m = " << fmt(c.coefficients.eps_m) << "\n";
    s << "eps_s = " << fmt(c.coefficients.eps_s) << "\n";
    s << "kappa_sq = " << fmt(c.coefficients.kappa_sq) << "\n";
    s << "charge_scale = " << fmt(c.coefficients.charge_scale) << "\n";
    s << "nonlinearity = " << enum_name(c.nonlinearity, kNonlinearity) << "\n";
    s << "qoi_eta = " << fmt(c.qoi_eta) << "\n\n";

    s << "[charges]\n";
    if (const auto* p = std::get_if<PqrFile>(&c.charges)) {
        s << "pqr = " << p->path << "\n";
    } else {
        for (const auto& q : std::get<ChargeSystem>(c.charges))
            s << "charge = " << fmt(q.q) << " " << fmt(q.x.x) << " " << fmt(q.x.y) << " " << fmt(q.x.z) << "\n";
    }
    s << "\n[mesh]\n";
    if (const auto* f = std::get_if<MeshFile>(&c.mesh)) {
        s << "file = " << f->path << "\n";
    } else {
        const auto& g = std::get<MeshGenerator>(c.mesh);
        s << "molecular_radius = " << fmt(g.ball.molecular_radius) << "\n";
        s << "outer_radius = " << fmt(g.ball.outer_radius) << "\n";
        s << "molecular_layers = " << g.ball.molecular_layers << "\n";
        s << "solvent_layers = " << g.ball.solvent_layers << "\n";
        s << "surface_subdivisions = " << g.ball.surface_subdivisions << "\n";
        s << "min_dihedral_degrees = " << fmt(g.ball.min_dihedral_degrees) << "\n";
        s << "charge_refinement = " << g.charge_refinement << "\n";
    }
    s << "marking = " << enum_name(c.marking, kMarking) << "\n\n";

    s << "[strategy]\n";
    s << "kind = " << enum_name(c.strategy.kind, kStrategy) << "\n";
    s << "dorfler_theta = " << fmt(c.strategy.dorfler_theta) << "\n";
    s << "dominance_factor = " << fmt(c.strategy.dominance_factor) << "\n";
    s << "half_rule = " << fmt(c.strategy.half_rule) << "\n";
    s << "max_levels = " << c.strategy.max_levels << "\n";
    s << "form = " << enum_name(c.form, kForm) << "\n\n";

    s << "[solver]\n";
    s << "rel_tolerance = " << fmt(c.solver.rel_tolerance) << "\n";
    s << "abs_tolerance = " << fmt(c.solver.abs_tolerance) << "\n";
    s << "max_iterations = " << c.solver.max_iterations << "\n";
    s << "preconditioner = " << enum_name(c.solver.preconditioner, kPreconditioner) << "\n";
    s << "newton_rel_tolerance = " << fmt(c.newton.rel_tolerance) << "\n";
    s << "newton_abs_tolerance = " << fmt(c.newton.abs_tolerance) << "\n";
    s << "newton_max_iterations = " << c.newton.max_iterations << "\n";
    s << "newton_damping = " << fmt(c.newton.damping) << "\n";
    s << "newton_min_damping = " << fmt(c.newton.min_damping) << "\n";
    s << "clamp_bound = " << fmt(c.newton.clamp_bound) << "\n";
    return s.str();
}

}  // namespace pbe::cli
