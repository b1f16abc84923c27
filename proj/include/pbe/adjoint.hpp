#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pbe/fem.hpp"
#include "pbe/pbe_model.hpp"

namespace pbe {

/// Adjoint of the split PBE, solved in the degree-2 spaces of the primal mesh.
/// The reversed coupling is solved first for phi_r, then for phi_h.
///
/// The adjoint of the full three-term split is not well posed and is not
/// provided.
struct AdjointSolution {
    FeField phi_h;  // MolecularOnly, degree 2, zero on the interface
    FeField phi_r;  // WholeDomain, degree 2, zero on the outer boundary
};

/// Boundary-only interpolants of the Dirichlet data: g on the outer boundary
/// (r pair) and -u^s on the interface (h pair). Upper case is degree 1, lower
/// case degree 2.
struct LiftingPair {
    FeField U_d_r;
    FeField U_d_h;
    FeField u_d_r;
    FeField u_d_h;
};

enum class ErrorForm { Standard, Alternate };

enum class ErrorSource { R, M, Gamma, dOmega };
inline constexpr std::array<ErrorSource, 4> kErrorSources{ErrorSource::R, ErrorSource::M, ErrorSource::Gamma,
                                                         ErrorSource::dOmega};
std::string to_string(ErrorSource s);
ErrorSource parse_error_source(const std::string& name);

struct ErrorBreakdown {
    double E_r = 0.0;
    double E_m = 0.0;
    double E_Gamma = 0.0;
    double E_dOmega = 0.0;
    double E_neg = 0.0;
    std::optional<double> E_har;
    double total = 0.0;
    /// Signed per-cell contributions indexed by ErrorSource.
    std::array<std::vector<double>, 4> per_cell;
    /// Per-cell E_har contributions (alternate form only).
    std::vector<double> har_per_cell;
    /// Signed per-cell contributions of the classical indicator, with the
    /// residual weights replaced by phi - pi phi.
    std::vector<double> classical_per_cell;

    double component(ErrorSource s) const;
    const std::vector<double>& cells(ErrorSource s) const { return per_cell[static_cast<int>(s)]; }
};

/// Matrix of the regular adjoint, (eps grad phi, grad v) + (kappa_sq w phi, v),
/// with w = cosh(U_r) when U_r is given and 1 otherwise.
SparseMatrix adjoint_regular_matrix(const PbeProblem& problem, const FunctionSpace& space, const FeField* U_r = nullptr,
                                    double clamp_bound = NewtonConfig{}.clamp_bound);

/// Nonlinear problems need the converged regular component U_r.
AdjointSolution solve_adjoint(const PbeProblem& problem, const FeField* U_r = nullptr,
                              const SolverConfig& cfg = SolveOptions{}.linear,
                              double clamp_bound = NewtonConfig{}.clamp_bound);

LiftingPair build_liftings(const PbeProblem& problem);

/// Weak residual of the primal at (v_h, v_r): the regular residual tested
/// with v_r plus -(eps grad U_h, grad v_h)_m. Galerkin orthogonality makes it
/// vanish for discrete test functions with zero boundary values.
double residual_functional(const PbeProblem& problem, const Solution& sol, const FeField& v_h, const FeField& v_r,
                           double clamp_bound = NewtonConfig{}.clamp_bound);

ErrorBreakdown compute_error_breakdown(const PbeProblem& problem, const Solution& sol, const AdjointSolution& adj,
                                       const LiftingPair& lift, ErrorForm form = ErrorForm::Standard,
                                       double clamp_bound = NewtonConfig{}.clamp_bound);

/// |classical_per_cell|.
std::vector<double> classical_indicators(const ErrorBreakdown& b);
/// |per-cell contributions| of one source.
std::vector<double> source_indicators(const ErrorBreakdown& b, ErrorSource s);

double effectivity(double estimate, double reference_error);

}  // namespace pbe
