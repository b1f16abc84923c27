#include "pbe/pbe_model.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "pbe/errors.hpp"

namespace pbe {

void PbeCoefficients::validate() const {
    if (!(eps_m > 0.0) || !(eps_s > 0.0)) throw DomainError("dielectric constants must be positive");
    if (!(kappa_sq >= 0.0)) throw DomainError("kappa_sq must be nonnegative");
    if (!(charge_scale > 0.0)) throw DomainError("charge_scale must be positive");
}

namespace {

double distance_checked(const Point3& p, const Point3& x) {
    const double r = norm(p - x);
    if (r < 1e-12) throw DomainError("potential evaluated at a point charge");
    return r;
}

}  // namespace

double eval_singular(const PbeCoefficients& c, const ChargeSystem& charges, const Point3& p) {
    double s = 0.0;
    for (const auto& ch : charges) s += ch.q / distance_checked(p, ch.x);
    return c.charge_scale / c.eps_m * s;
}

Point3 eval_singular_gradient(const PbeCoefficients& c, const ChargeSystem& charges, const Point3& p) {
    Point3 g{};
    for (const auto& ch : charges) {
        const double r = distance_checked(p, ch.x);
        g += (p - ch.x) * (-ch.q / (r * r * r));
    }
    return g * (c.charge_scale / c.eps_m);
}

double eval_singular_flux(const PbeCoefficients& c, const ChargeSystem& charges, const Point3& p, const Point3& n) {
    return c.eps_m * dot(eval_singular_gradient(c, charges, p), n);
}

double eval_boundary_g(const PbeCoefficients& c, const ChargeSystem& charges, const Point3& p) {
    const double k = std::sqrt(c.kappa_sq) / std::sqrt(c.eps_s);
    double s = 0.0;
    for (const auto& ch : charges) {
        const double r = distance_checked(p, ch.x);
        s += ch.q * std::exp(-k * r) / (c.eps_s * r);
    }
    return c.charge_scale * s;
}

double mollifier_constant() {
    static const double c = [] {
        auto f = [](double r) { return r < 1.0 ? r * r * std::exp(-1.0 / (1.0 - r * r)) : 0.0; };
        const double radial = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-15);
        return 1.0 / (4.0 * std::numbers::pi * radial);
    }();
    return c;
}

double eval_mollifier(const Point3& p) {
    const double r2 = dot(p, p);
    if (r2 >= 1.0) return 0.0;
    return mollifier_constant() * std::exp(-1.0 / (1.0 - r2));
}

double eval_psi(const ChargeSystem& charges, double eta, const Point3& p) {
    if (!(eta > 0.0)) throw DomainError("mollifier radius must be positive");
    double s = 0.0;
    for (const auto& ch : charges) s += ch.q * eval_mollifier((p - ch.x) * (1.0 / eta));
    return s / (eta * eta * eta);
}

std::vector<QoiNode> qoi_nodes(const SimplicialMesh& mesh, const ChargeSystem& charges, double eta,
                               const QoiQuadrature& quad) {
    if (!(eta > 0.0)) throw DomainError("mollifier radius must be positive");
    if (quad.n_radial < 1 || quad.n_theta < 1 || quad.n_phi < 1) throw DomainError("QoI quadrature needs positive sizes");
    std::vector<double> tr, wr, tm, wm;
    gauss_legendre(quad.n_radial, tr, wr);
    gauss_legendre(quad.n_theta, tm, wm);
    const double wphi = 2.0 * std::numbers::pi / quad.n_phi;

    std::vector<QoiNode> nodes;
    nodes.reserve(charges.size() * quad.n_radial * quad.n_theta * quad.n_phi);
    for (const auto& ch : charges) {
        const std::size_t first = nodes.size();
        double total = 0.0;
        for (int i = 0; i < quad.n_radial; ++i) {
            const double s = 0.5 * (tr[i] + 1.0);  // r / eta
            const double radial = 0.5 * wr[i] * s * s * eval_mollifier({s, 0.0, 0.0});
            for (int j = 0; j < quad.n_theta; ++j) {
                const double ct = tm[j];
                const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
                for (int k = 0; k < quad.n_phi; ++k) {
                    const double phi = wphi * (k + 0.5);
                    QoiNode n;
                    n.x = ch.x + Point3{st * std::cos(phi), st * std::sin(phi), ct} * (s * eta);
                    n.weight = radial * wm[j] * wphi;
                    total += n.weight;
                    nodes.push_back(n);
                }
            }
        }
        for (std::size_t k = first; k < nodes.size(); ++k) {
            auto& n = nodes[k];
            n.weight *= ch.q / total;
            const auto loc = mesh.locate(n.x);
            if (!loc) throw PointOutsideMesh("QoI quadrature node outside the mesh");
            if (mesh.region(loc->cell) != Region::Molecular)
                throw DomainError("mollifier support of a charge crosses the interface");
            n.at = *loc;
        }
    }
    return nodes;
}

double qoi(const std::vector<QoiNode>& nodes, const FeField* V_h, const FeField& V_r) {
    double s = 0.0;
    for (const auto& n : nodes) {
        double v = V_r.value_in_cell(n.at.cell, n.at.bary);
        if (V_h) v += V_h->value_in_cell(n.at.cell, n.at.bary);
        s += n.weight * v;
    }
    return s;
}

double qoi(const ChargeSystem& charges, double eta, const FeField& V_h, const FeField& V_r, const QoiQuadrature& quad) {
    return qoi(qoi_nodes(V_r.space().mesh(), charges, eta, quad), &V_h, V_r);
}

// ---------------------------------------------------------------------------

PbeProblem::PbeProblem(std::shared_ptr<const SimplicialMesh> mesh, PbeCoefficients coefficients, ChargeSystem charges,
                       Nonlinearity nonlinearity, double qoi_eta, QoiQuadrature quad)
    : mesh_(std::move(mesh)),
      coefficients_(coefficients),
      charges_(std::move(charges)),
      nonlinearity_(nonlinearity),
      qoi_eta_(qoi_eta),
      quad_(quad) {
    if (!mesh_) throw DomainError("problem needs a mesh");
    coefficients_.validate();
    if (!(qoi_eta_ > 0.0)) throw DomainError("qoi_eta must be positive");
    for (std::size_t i = 0; i < charges_.size(); ++i) {
        const auto& ch = charges_[i];
        if (!std::isfinite(ch.q) || !is_finite(ch.x)) throw DomainError("charge " + std::to_string(i) + " is not finite");
        const auto loc = mesh_->locate(ch.x);
        if (!loc || mesh_->region(loc->cell) != Region::Molecular)
            throw DomainError("charge " + std::to_string(i) + " lies outside the molecular region");
        for (const auto& f : mesh_->interface_facets()) {
            const auto t = mesh_->facet_vertices(f);
            if (point_triangle_distance(ch.x, mesh_->vertex(t[0]), mesh_->vertex(t[1]), mesh_->vertex(t[2])) <= qoi_eta_)
                throw DomainError("charge " + std::to_string(i) + " is within qoi_eta of the interface");
        }
    }
    nodes_ = pbe::qoi_nodes(*mesh_, charges_, qoi_eta_, quad);
}

const SpacePtr& PbeProblem::space(int degree, Support support) const {
    if (degree != 1 && degree != 2) throw DomainError("only degree 1 and 2 spaces are supported");
    auto& slot = spaces_[degree - 1][support == Support::WholeDomain ? 0 : 1];
    if (!slot) slot = make_space(mesh_, degree, support);
    return slot;
}

// ---------------------------------------------------------------------------

double clamped_sinh(double u, double bound) { return std::sinh(std::clamp(u, -bound, bound)); }
double clamped_cosh(double u, double bound) { return std::cosh(std::clamp(u, -bound, bound)); }

FeField solve_harmonic(const PbeProblem& problem, int degree, const SolverConfig& cfg,
                       const std::function<double(const Point3&)>& boundary_data, std::vector<std::string>* warnings) {
    const auto& space = problem.space(degree, Support::MolecularOnly);
    const auto& c = problem.coefficients();
    auto data = boundary_data ? boundary_data : [&](const Point3& p) { return -problem.singular(p); };
    SparseMatrix A = assemble_weighted_stiffness(*space, c.eps_m, c.eps_m);
    std::vector<double> b(space->num_dofs(), 0.0);
    apply_dirichlet(A, b, *space, boundary_values(interpolate_nodal(data, space, InterpolationMask::BoundaryOnly)));
    FeField U(space, cg_solve(A, b, cfg));

    if (warnings) {
        double lo = INFINITY, hi = -INFINITY, ilo = INFINITY, ihi = -INFINITY;
        for (Index d = 0; d < space->num_dofs(); ++d) {
            if (space->is_boundary(d)) {
                lo = std::min(lo, U[d]);
                hi = std::max(hi, U[d]);
            } else {
                ilo = std::min(ilo, U[d]);
                ihi = std::max(ihi, U[d]);
            }
        }
        const double slack = 1e-10 * std::max({1.0, std::abs(lo), std::abs(hi)});
        if (ilo < lo - slack || ihi > hi + slack)
            warnings->push_back("harmonic component violates the discrete maximum principle");
    }
    return U;
}

namespace {

/// Interface flux plus molecular coupling: the data part of the regular residual.
std::vector<double> regular_data(const PbeProblem& problem, const FunctionSpace& space, const FeField& U_h) {
    const auto& c = problem.coefficients();
    auto b = assemble_interface_flux_vector(space, [&](const Point3& x, const Point3& n) {
        return problem.singular_flux(x, n);
    });
    const auto coupling = assemble_gradient_load(space, {c.eps_m, c.eps_s}, U_h, Region::Molecular);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += coupling[i];
    return b;
}

}  // namespace

std::vector<double> regular_residual(const PbeProblem& problem, const FeField& U_h, const FeField& U_r,
                                     double clamp_bound) {
    const auto& space = U_r.space();
    const auto& c = problem.coefficients();
    const SparseMatrix K = assemble_weighted_stiffness(space, c.eps_m, c.eps_s);
    std::vector<double> r = K * std::span<const double>(U_r.values());
    const auto data = regular_data(problem, space, U_h);
    std::vector<double> reaction;
    if (problem.nonlinearity() == Nonlinearity::Linearized) {
        reaction = assemble_field_load(space, {0.0, c.kappa_sq}, U_r);
    } else {
        reaction = assemble_field_load(space, {0.0, c.kappa_sq}, U_r,
                                       [&](double u) { return clamped_sinh(u, clamp_bound); });
    }
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += reaction[i] + data[i];
    return r;
}

SparseMatrix regular_matrix(const PbeProblem& problem, const FunctionSpace& space) {
    const auto& c = problem.coefficients();
    SparseMatrix A = assemble_weighted_stiffness(space, c.eps_m, c.eps_s);
    A.add_scaled(assemble_weighted_mass(space, c.kappa_sq), 1.0);
    return A;
}

FeField solve_regular(const PbeProblem& problem, const FeField& U_h, const SolveOptions& options, NewtonReport* report) {
    const int degree = U_h.space().degree();
    const auto& space = problem.space(degree, Support::WholeDomain);
    const auto& c = problem.coefficients();
    const SparseMatrix K = assemble_weighted_stiffness(*space, c.eps_m, c.eps_s);
    const auto data = regular_data(problem, *space, U_h);
    const auto g = interpolate_nodal([&](const Point3& p) { return problem.boundary_g(p); }, space,
                                     InterpolationMask::BoundaryOnly);
    const auto dirichlet = boundary_values(g);

    SparseMatrix A = regular_matrix(problem, *space);
    std::vector<double> b(data.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = -data[i];
    apply_dirichlet(A, b, *space, dirichlet);
    FeField linear(space, cg_solve(A, b, options.linear));
    if (problem.nonlinearity() == Nonlinearity::Linearized) {
        if (report) *report = {};
        return linear;
    }

    const double sigma = options.newton.clamp_bound;
    NewtonSystem sys;
    sys.fixed = space->boundary_mask();
    sys.residual = [&](const std::vector<double>& u) {
        const FeField U(space, u);
        std::vector<double> r = K * std::span<const double>(u);
        const auto reaction =
            assemble_field_load(*space, {0.0, c.kappa_sq}, U, [&](double v) { return clamped_sinh(v, sigma); });
        for (std::size_t i = 0; i < r.size(); ++i) r[i] += reaction[i] + data[i];
        return r;
    };
    sys.jacobian = [&](const std::vector<double>& u) {
        const FeField U(space, u);
        SparseMatrix J = K;
        J.add_scaled(assemble_weighted_mass(*space, c.kappa_sq, {&U, [&](double v) { return clamped_cosh(v, sigma); }}),
                     1.0);
        return J;
    };
    NewtonReport rep;
    auto u = newton_solve(sys, linear.values(), options.newton, options.linear, &rep);
    if (report) *report = rep;
    return FeField(space, std::move(u));
}

Solution solve(const PbeProblem& problem, const SolveOptions& options, int degree) {
    std::vector<std::string> warnings;
    FeField U_h = solve_harmonic(problem, degree, options.linear, {}, &warnings);
    NewtonReport rep;
    FeField U_r = solve_regular(problem, U_h, options, &rep);
    double m = 0.0;
    for (double v : U_r.values()) m = std::max(m, std::abs(v));
    if (problem.nonlinearity() == Nonlinearity::Nonlinear && m >= options.newton.clamp_bound)
        warnings.push_back("regular component reached the sinh clamp bound");
    return Solution{std::move(U_h), std::move(U_r), rep, m, std::move(warnings)};
}

double qoi(const PbeProblem& problem, const Solution& s) { return qoi(problem.qoi_nodes(), &s.U_h, s.U_r); }

}  // namespace pbe
