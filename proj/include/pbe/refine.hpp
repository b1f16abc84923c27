#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pbe/adjoint.hpp"
#include "pbe/mesh.hpp"
#include "pbe/pbe_model.hpp"

namespace pbe {

enum class StrategyKind { Uniform, UCR, ACR, Classical };

std::string to_string(StrategyKind k);
StrategyKind parse_strategy(const std::string& name);

struct StrategyConfig {
    StrategyKind kind = StrategyKind::Uniform;
    double dorfler_theta = 0.2;
    double dominance_factor = 3.0;
    double half_rule = 0.5;
    int max_levels = 2;

    void validate() const;
    friend bool operator==(const StrategyConfig&, const StrategyConfig&) = default;
};

enum class ActionKind {
    UniformAll,
    TargetWholeMesh,
    TargetMolecular,
    TargetInterface,
    TargetOuterBoundary,
    AdaptiveOnSources,
    /// Dorfler marking on the classical indicators.
    AdaptiveClassical,
};

struct RefinementAction {
    ActionKind kind = ActionKind::UniformAll;
    /// Selected sources for AdaptiveOnSources.
    std::vector<ErrorSource> sources;

    friend bool operator==(const RefinementAction&, const RefinementAction&) = default;
};

std::string to_string(const RefinementAction& a);

/// Target of a dominant source: R -> whole mesh, M -> molecular cells,
/// Gamma -> interface cells, dOmega -> outer boundary cells.
ActionKind target_of(ErrorSource s);

/// Uniform contribution refinement: target the dominant source when it is at
/// least dominance_factor times the runner-up or shares its sign; otherwise
/// refine everything. Exact ties rank in the order R, M, Gamma, dOmega.
RefinementAction ucr_decide(const ErrorBreakdown& b, const StrategyConfig& cfg);

/// Smallest set of cells whose indicators reach theta times the total,
/// taken greedily in descending order (lower index first on ties).
CellSet dorfler_mark(const std::vector<double>& indicators, double theta);

/// Sources with |E_s| >= half_rule * max |E_s'|.
std::vector<ErrorSource> acr_select_sources(const ErrorBreakdown& b, const StrategyConfig& cfg);

struct IterationRecord {
    int level = 0;
    std::size_t vertex_count = 0;
    std::size_t cell_count = 0;
    double qoi = 0.0;
    double estimate = 0.0;
    std::optional<double> effectivity;
    double E_r = 0.0;
    double E_m = 0.0;
    double E_Gamma = 0.0;
    double E_dOmega = 0.0;
    double E_neg = 0.0;
    /// Refinement applied after this level; empty on the last level.
    std::optional<RefinementAction> action;
    std::vector<std::string> warnings;
};

struct LoopOptions {
    SolveOptions solve;
    BisectionOptions bisection;
    /// Reference QoI for effectivity ratios.
    std::optional<double> reference;
    /// Stop once |estimate| drops below this.
    std::optional<double> goal;
    ErrorForm form = ErrorForm::Standard;
};

/// Mesh produced by applying an action.
SimplicialMesh apply_action(const SimplicialMesh& mesh, const RefinementAction& action, const ErrorBreakdown& b,
                            const StrategyConfig& cfg, const BisectionOptions& bisection = {});

/// Solve, estimate and refine for up to cfg.max_levels refinements.
std::vector<IterationRecord> run_refinement_loop(const PbeProblem& initial, const StrategyConfig& cfg,
                                                 const LoopOptions& options = {});

}  // namespace pbe
