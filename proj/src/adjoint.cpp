#include "pbe/adjoint.hpp"

#include <cmath>

#include "pbe/errors.hpp"

namespace pbe {

std::string to_string(ErrorSource s) {
    switch (s) {
        case ErrorSource::R: return "R";
        case ErrorSource::M: return "M";
        case ErrorSource::Gamma: return "Gamma";
        case ErrorSource::dOmega: return "dOmega";
    }
    return "?";
}

ErrorSource parse_error_source(const std::string& name) {
    for (auto s : kErrorSources)
        if (to_string(s) == name) return s;
    throw DomainError("unknown error source '" + name + "'");
}

double ErrorBreakdown::component(ErrorSource s) const {
    switch (s) {
        case ErrorSource::R: return E_r;
        case ErrorSource::M: return E_m;
        case ErrorSource::Gamma: return E_Gamma;
        case ErrorSource::dOmega: return E_dOmega;
    }
    return 0.0;
}

SparseMatrix adjoint_regular_matrix(const PbeProblem& problem, const FunctionSpace& space, const FeField* U_r,
                                    double clamp_bound) {
    const auto& c = problem.coefficients();
    SparseMatrix A = assemble_weighted_stiffness(space, c.eps_m, c.eps_s);
    if (U_r)
        A.add_scaled(assemble_weighted_mass(space, c.kappa_sq,
                                            {U_r, [=](double u) { return clamped_cosh(u, clamp_bound); }}),
                     1.0);
    else
        A.add_scaled(assemble_weighted_mass(space, c.kappa_sq), 1.0);
    return A;
}

namespace {

std::vector<double> psi_load(const PbeProblem& problem, const FunctionSpace& space) {
    std::vector<double> b(space.num_dofs(), 0.0);
    for (const auto& n : problem.qoi_nodes()) add_point_load(space, n.at, n.weight, b);
    return b;
}

DirichletValues zero_boundary(const FunctionSpace& space) {
    DirichletValues v;
    for (Index d : space.boundary_dofs()) v.emplace_hint(v.end(), d, 0.0);
    return v;
}

void require_problem_mesh(const PbeProblem& problem, const FeField& f) {
    if (&f.space().mesh() != &problem.mesh()) throw MeshError("field is not defined on the problem's mesh");
}

FeField difference(const FeField& a, const FeField& b) {
    std::vector<double> v(a.values());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= b[i];
    return FeField(a.space_ptr(), std::move(v));
}

void accumulate(std::vector<double>& into, const std::vector<double>& add) {
    for (std::size_t i = 0; i < into.size(); ++i) into[i] += add[i];
}

double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

/// Terms of the regular residual tested with v: interface flux, volume form
/// and molecular coupling (or its interface replacement).
struct RegularTerms {
    std::vector<double> cells;
    std::vector<double> har;
};

RegularTerms regular_terms(const PbeProblem& problem, const Solution& sol, const FeField& v, ErrorForm form,
                           double clamp_bound) {
    const auto& c = problem.coefficients();
    const bool nonlinear = problem.nonlinearity() == Nonlinearity::Nonlinear;
    const FeField* fv[] = {&v};
    RegularTerms out;
    out.cells = cellwise_interface_integrate(fv, [&](const QuadraturePointData& d, const Point3& n) {
        return -problem.singular_flux(d.x, n) * d.values[0];
    });
    const FeField* fr[] = {&sol.U_r, &v};
    accumulate(out.cells, cellwise_integrate(
                              fr,
                              [&](const QuadraturePointData& d) {
                                  const bool solvent = d.region == Region::Solvent;
                                  const double eps = solvent ? c.eps_s : c.eps_m;
                                  double s = -eps * dot(d.gradients[0], d.gradients[1]);
                                  if (solvent) {
                                      const double u = d.values[0];
                                      s -= c.kappa_sq * (nonlinear ? clamped_sinh(u, clamp_bound) : u) * d.values[1];
                                  }
                                  return s;
                              },
                              5));
    const FeField* fh[] = {&sol.U_h, &v};
    const auto coupling = cellwise_integrate(
        fh, [&](const QuadraturePointData& d) { return -c.eps_m * dot(d.gradients[0], d.gradients[1]); }, 2,
        Region::Molecular);
    if (form == ErrorForm::Standard) {
        accumulate(out.cells, coupling);
        return out;
    }
    auto normal_flux = cellwise_interface_integrate(fh, [&](const QuadraturePointData& d, const Point3& n) {
        return c.eps_m * dot(d.gradients[0], n) * d.values[1];
    });
    out.har = normal_flux;
    accumulate(out.har, coupling);
    for (std::size_t i = 0; i < out.cells.size(); ++i) out.cells[i] -= normal_flux[i];
    return out;
}

std::vector<double> molecular_terms(const PbeProblem& problem, const Solution& sol, const FeField& v) {
    const double eps_m = problem.coefficients().eps_m;
    const FeField* f[] = {&sol.U_h, &v};
    return cellwise_integrate(
        f, [&](const QuadraturePointData& d) { return -eps_m * dot(d.gradients[0], d.gradients[1]); }, 2,
        Region::Molecular);
}

}  // namespace

AdjointSolution solve_adjoint(const PbeProblem& problem, const FeField* U_r, const SolverConfig& cfg,
                              double clamp_bound) {
    const bool nonlinear = problem.nonlinearity() == Nonlinearity::Nonlinear;
    if (nonlinear && !U_r) throw DomainError("the nonlinear adjoint needs the regular component");
    if (U_r) require_problem_mesh(problem, *U_r);
    const auto& c = problem.coefficients();

    const auto& Wr = problem.space(2, Support::WholeDomain);
    SparseMatrix Ar = adjoint_regular_matrix(problem, *Wr, nonlinear ? U_r : nullptr, clamp_bound);
    auto br = psi_load(problem, *Wr);
    apply_dirichlet(Ar, br, *Wr, zero_boundary(*Wr));
    FeField phi_r(Wr, cg_solve(Ar, br, cfg));

    const auto& Wm = problem.space(2, Support::MolecularOnly);
    SparseMatrix Am = assemble_weighted_stiffness(*Wm, c.eps_m, c.eps_m);
    auto bm = psi_load(problem, *Wm);
    const auto coupling = assemble_gradient_load(*Wm, {c.eps_m, c.eps_s}, phi_r, Region::Molecular);
    for (std::size_t i = 0; i < bm.size(); ++i) bm[i] -= coupling[i];
    apply_dirichlet(Am, bm, *Wm, zero_boundary(*Wm));
    FeField phi_h(Wm, cg_solve(Am, bm, cfg));
    return {std::move(phi_h), std::move(phi_r)};
}

LiftingPair build_liftings(const PbeProblem& problem) {
    auto g = [&](const Point3& p) { return problem.boundary_g(p); };
    auto h = [&](const Point3& p) { return -problem.singular(p); };
    constexpr auto mask = InterpolationMask::BoundaryOnly;
    return {interpolate_nodal(g, problem.space(1, Support::WholeDomain), mask),
            interpolate_nodal(h, problem.space(1, Support::MolecularOnly), mask),
            interpolate_nodal(g, problem.space(2, Support::WholeDomain), mask),
            interpolate_nodal(h, problem.space(2, Support::MolecularOnly), mask)};
}

double residual_functional(const PbeProblem& problem, const Solution& sol, const FeField& v_h, const FeField& v_r,
                           double clamp_bound) {
    for (const FeField* f : {&sol.U_h, &sol.U_r, &v_h, &v_r}) require_problem_mesh(problem, *f);
    return sum(regular_terms(problem, sol, v_r, ErrorForm::Standard, clamp_bound).cells) +
           sum(molecular_terms(problem, sol, v_h));
}

ErrorBreakdown compute_error_breakdown(const PbeProblem& problem, const Solution& sol, const AdjointSolution& adj,
                                       const LiftingPair& lift, ErrorForm form, double clamp_bound) {
    for (const FeField* f : {&sol.U_h, &sol.U_r, &adj.phi_h, &adj.phi_r, &lift.U_d_r, &lift.U_d_h, &lift.u_d_r,
                             &lift.u_d_h})
        require_problem_mesh(problem, *f);
    const auto& c = problem.coefficients();
    const bool nonlinear = problem.nonlinearity() == Nonlinearity::Nonlinear;
    const auto& mesh = problem.mesh();
    ErrorBreakdown out;

    auto regular = regular_terms(problem, sol, adj.phi_r, form, clamp_bound);
    out.per_cell[0] = regular.cells;
    out.per_cell[1] = molecular_terms(problem, sol, adj.phi_h);

    const FeField gap_h = difference(interpolate_field(lift.U_d_h, lift.u_d_h.space_ptr()), lift.u_d_h);
    const FeField* fg[] = {&adj.phi_h, &adj.phi_r, &gap_h};
    out.per_cell[2] = cellwise_integrate(
        fg,
        [&](const QuadraturePointData& d) { return c.eps_m * dot(d.gradients[0] + d.gradients[1], d.gradients[2]); },
        2, Region::Molecular);

    const FeField gap_r = difference(interpolate_field(lift.U_d_r, lift.u_d_r.space_ptr()), lift.u_d_r);
    const FeField* fo[] = {&adj.phi_r, &gap_r, &sol.U_r};
    out.per_cell[3] = cellwise_integrate(
        fo,
        [&](const QuadraturePointData& d) {
            const bool solvent = d.region == Region::Solvent;
            double s = (solvent ? c.eps_s : c.eps_m) * dot(d.gradients[0], d.gradients[1]);
            if (solvent) {
                const double w = nonlinear ? clamped_cosh(d.values[2], clamp_bound) : 1.0;
                s += c.kappa_sq * w * d.values[0] * d.values[1];
            }
            return s;
        },
        5);

    std::vector<double> neg(mesh.num_cells(), 0.0);
    for (const auto& n : problem.qoi_nodes()) {
        const auto& [cell, bary] = n.at;
        neg[cell] += n.weight * (lift.u_d_h.value_in_cell(cell, bary) - lift.U_d_h.value_in_cell(cell, bary) +
                                 lift.u_d_r.value_in_cell(cell, bary) - lift.U_d_r.value_in_cell(cell, bary));
    }

    out.E_r = sum(out.per_cell[0]);
    out.E_m = sum(out.per_cell[1]);
    out.E_Gamma = sum(out.per_cell[2]);
    out.E_dOmega = sum(out.per_cell[3]);
    out.E_neg = sum(neg);
    out.total = out.E_r + out.E_m + out.E_Gamma + out.E_dOmega + out.E_neg;
    if (form == ErrorForm::Alternate) {
        out.har_per_cell = std::move(regular.har);
        out.E_har = sum(out.har_per_cell);
        out.total += *out.E_har;
    }

    // Classical indicator: residual weights phi - pi phi with pi the L2
    // projection onto the primal spaces.
    const auto& Vr = problem.space(1, Support::WholeDomain);
    const auto& Vm = problem.space(1, Support::MolecularOnly);
    const FeField dr = difference(adj.phi_r, interpolate_field(l2_project(adj.phi_r, Vr, true), adj.phi_r.space_ptr()));
    const FeField dh = difference(adj.phi_h, interpolate_field(l2_project(adj.phi_h, Vm, true), adj.phi_h.space_ptr()));
    out.classical_per_cell = regular_terms(problem, sol, dr, ErrorForm::Standard, clamp_bound).cells;
    accumulate(out.classical_per_cell, molecular_terms(problem, sol, dh));
    accumulate(out.classical_per_cell, out.per_cell[2]);
    accumulate(out.classical_per_cell, out.per_cell[3]);
    accumulate(out.classical_per_cell, neg);
    return out;
}

std::vector<double> classical_indicators(const ErrorBreakdown& b) {
    std::vector<double> out(b.classical_per_cell);
    for (double& v : out) v = std::abs(v);
    return out;
}

std::vector<double> source_indicators(const ErrorBreakdown& b, ErrorSource s) {
    std::vector<double> out(b.cells(s));
    for (double& v : out) v = std::abs(v);
    return out;
}

double effectivity(double estimate, double reference_error) {
    if (reference_error == 0.0) throw DomainError("effectivity with a zero reference error");
    return estimate / reference_error;
}

}  // namespace pbe
