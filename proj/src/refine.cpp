#include "pbe/refine.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>

#include "pbe/errors.hpp"

namespace pbe {

std::string to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::Uniform: return "uniform";
        case StrategyKind::UCR: return "ucr";
        case StrategyKind::ACR: return "acr";
        case StrategyKind::Classical: return "classical";
    }
    return "?";
}

StrategyKind parse_strategy(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    for (auto k : {StrategyKind::Uniform, StrategyKind::UCR, StrategyKind::ACR, StrategyKind::Classical})
        if (to_string(k) == lower) return k;
    throw DomainError("unknown strategy '" + name + "'");
}

void StrategyConfig::validate() const {
    if (!(dorfler_theta > 0.0 && dorfler_theta <= 1.0)) throw DomainError("dorfler_theta must lie in (0, 1]");
    if (!(dominance_factor >= 1.0)) throw DomainError("dominance_factor must be at least 1");
    if (!(half_rule > 0.0 && half_rule <= 1.0)) throw DomainError("half_rule must lie in (0, 1]");
    if (max_levels < 0) throw DomainError("max_levels must be nonnegative");
}

std::string to_string(const RefinementAction& a) {
    switch (a.kind) {
        case ActionKind::UniformAll: return "uniform";
        case ActionKind::TargetWholeMesh: return "target:R";
        case ActionKind::TargetMolecular: return "target:M";
        case ActionKind::TargetInterface: return "target:Gamma";
        case ActionKind::TargetOuterBoundary: return "target:dOmega";
        case ActionKind::AdaptiveOnSources: {
            std::string s = "adaptive:";
            for (std::size_t i = 0; i < a.sources.size(); ++i) s += (i ? "+" : "") + to_string(a.sources[i]);
            return s;
        }
        case ActionKind::AdaptiveClassical: return "adaptive:classical";
    }
    return "?";
}

ActionKind target_of(ErrorSource s) {
    switch (s) {
        case ErrorSource::R: return ActionKind::TargetWholeMesh;
        case ErrorSource::M: return ActionKind::TargetMolecular;
        case ErrorSource::Gamma: return ActionKind::TargetInterface;
        case ErrorSource::dOmega: return ActionKind::TargetOuterBoundary;
    }
    return ActionKind::UniformAll;
}

RefinementAction ucr_decide(const ErrorBreakdown& b, const StrategyConfig& cfg) {
    cfg.validate();
    std::array<ErrorSource, 4> order = kErrorSources;
    std::stable_sort(order.begin(), order.end(), [&](ErrorSource x, ErrorSource y) {
        return std::abs(b.component(x)) > std::abs(b.component(y));
    });
    const double top = b.component(order[0]);
    const double second = b.component(order[1]);
    if (top == 0.0) return {};
    const bool dominant = std::abs(top) >= cfg.dominance_factor * std::abs(second);
    const bool same_sign = second != 0.0 && std::signbit(top) == std::signbit(second);
    if (dominant || same_sign) return {target_of(order[0]), {}};
    return {};
}

CellSet dorfler_mark(const std::vector<double>& indicators, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("Dorfler parameter must lie in (0, 1]");
    std::vector<Index> order;
    for (std::size_t i = 0; i < indicators.size(); ++i) {
        if (!(indicators[i] >= 0.0) || !std::isfinite(indicators[i]))
            throw DomainError("indicators must be finite and nonnegative");
        if (indicators[i] > 0.0) order.push_back(static_cast<Index>(i));
    }
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return indicators[a] > indicators[b]; });
    // Summing in the marking order makes theta = 1 select exactly the nonzero cells.
    double total = 0.0;
    for (Index i : order) total += indicators[i];
    if (total == 0.0) return {};
    CellSet marked;
    double s = 0.0;
    for (Index i : order) {
        marked.push_back(i);
        s += indicators[i];
        if (s >= theta * total) break;
    }
    std::sort(marked.begin(), marked.end());
    return marked;
}

std::vector<ErrorSource> acr_select_sources(const ErrorBreakdown& b, const StrategyConfig& cfg) {
    cfg.validate();
    double largest = 0.0;
    for (auto s : kErrorSources) largest = std::max(largest, std::abs(b.component(s)));
    std::vector<ErrorSource> out;
    for (auto s : kErrorSources)
        if (std::abs(b.component(s)) >= cfg.half_rule * largest) out.push_back(s);
    return out;
}

namespace {

CellSet union_of(const CellSet& a, const CellSet& b) {
    CellSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace

SimplicialMesh apply_action(const SimplicialMesh& mesh, const RefinementAction& action, const ErrorBreakdown& b,
                            const StrategyConfig& cfg, const BisectionOptions& bisection) {
    switch (action.kind) {
        case ActionKind::UniformAll:
        case ActionKind::TargetWholeMesh: return refine_uniform(mesh);
        case ActionKind::TargetMolecular: return refine_marked(mesh, cells_in_region(mesh, Region::Molecular), bisection);
        case ActionKind::TargetInterface: return refine_marked(mesh, cells_touching_interface(mesh), bisection);
        case ActionKind::TargetOuterBoundary: return refine_marked(mesh, cells_touching_outer_boundary(mesh), bisection);
        case ActionKind::AdaptiveOnSources: {
            if (action.sources.empty()) throw DomainError("adaptive refinement needs at least one source");
            CellSet marked;
            for (auto s : action.sources)
                marked = union_of(marked, dorfler_mark(source_indicators(b, s), cfg.dorfler_theta));
            return refine_marked(mesh, marked, bisection);
        }
        case ActionKind::AdaptiveClassical:
            return refine_marked(mesh, dorfler_mark(classical_indicators(b), cfg.dorfler_theta), bisection);
    }
    return mesh;
}

std::vector<IterationRecord> run_refinement_loop(const PbeProblem& initial, const StrategyConfig& cfg,
                                                 const LoopOptions& options) {
    cfg.validate();
    std::vector<IterationRecord> records;
    auto mesh = initial.mesh_ptr();
    for (int level = 0;; ++level) {
        const PbeProblem problem(mesh, initial.coefficients(), initial.charges(), initial.nonlinearity(),
                                 initial.qoi_eta(), initial.qoi_quadrature());
        IterationRecord rec;
        ErrorBreakdown b;
        try {
            const Solution sol = solve(problem, options.solve);
            const auto adj = solve_adjoint(problem, &sol.U_r, options.solve.linear, options.solve.newton.clamp_bound);
            b = compute_error_breakdown(problem, sol, adj, build_liftings(problem), options.form,
                                        options.solve.newton.clamp_bound);
            rec.qoi = qoi(problem, sol);
            rec.warnings = sol.warnings;
        } catch (const SolverError& e) {
            throw SolverError("level " + std::to_string(level) + ": " + e.what());
        }
        rec.level = level;
        rec.vertex_count = mesh->num_vertices();
        rec.cell_count = mesh->num_cells();
        rec.estimate = b.total;
        rec.E_r = b.E_r;
        rec.E_m = b.E_m;
        rec.E_Gamma = b.E_Gamma;
        rec.E_dOmega = b.E_dOmega;
        rec.E_neg = b.E_neg;
        if (options.reference && *options.reference != rec.qoi)
            rec.effectivity = effectivity(b.total, *options.reference - rec.qoi);

        const bool done = level >= cfg.max_levels || (options.goal && std::abs(b.total) < *options.goal);
        if (!done) {
            RefinementAction action;
            switch (cfg.kind) {
                case StrategyKind::Uniform: action = {ActionKind::UniformAll, {}}; break;
                case StrategyKind::UCR: action = ucr_decide(b, cfg); break;
                case StrategyKind::ACR: action = {ActionKind::AdaptiveOnSources, acr_select_sources(b, cfg)}; break;
                case StrategyKind::Classical: action = {ActionKind::AdaptiveClassical, {}}; break;
            }
            mesh = std::make_shared<const SimplicialMesh>(apply_action(*mesh, action, b, cfg, options.bisection));
            rec.action = action;
        }
        records.push_back(std::move(rec));
        if (done) break;
    }
    return records;
}

}  // namespace pbe
