#include <algorithm>
#include <cmath>

#include "pbe/errors.hpp"
#include "pbe/fem.hpp"

namespace pbe {

namespace {

std::array<double, 4> dof_bary(int local) {
    std::array<double, 4> b{};
    if (local < 4) {
        b[local] = 1.0;
    } else {
        b[kEdgeVertices[local - 4][0]] = 0.5;
        b[kEdgeVertices[local - 4][1]] = 0.5;
    }
    return b;
}

bool same_mesh(const FunctionSpace& a, const FunctionSpace& b) {
    return a.mesh_ptr() == b.mesh_ptr() || a.mesh() == b.mesh();
}

void require_same_mesh(const FunctionSpace& a, const FunctionSpace& b) {
    if (!same_mesh(a, b)) throw DomainError("fields live on different meshes");
}

/// Value and gradient of a field at a point of a cell whose barycentric
/// gradients are known.
void local_eval(const FeField& f, Index cell, const std::array<double, 4>& bary, const std::array<Point3, 4>& g,
                double& value, Point3& grad) {
    const auto& space = f.space();
    std::array<double, 10> phi;
    std::array<Point3, 10> dphi;
    shape_values(space.degree(), bary, phi);
    shape_gradients(space.degree(), bary, g, dphi);
    const auto dofs = space.cell_dofs(cell);
    const auto& v = f.values();
    value = 0.0;
    grad = {};
    for (std::size_t k = 0; k < dofs.size(); ++k) {
        value += phi[k] * v[dofs[k]];
        grad += dphi[k] * v[dofs[k]];
    }
}

double local_value(const FeField& f, Index cell, const std::array<double, 4>& bary) {
    const auto& space = f.space();
    std::array<double, 10> phi;
    shape_values(space.degree(), bary, phi);
    const auto dofs = space.cell_dofs(cell);
    double s = 0.0;
    for (std::size_t k = 0; k < dofs.size(); ++k) s += phi[k] * f.values()[dofs[k]];
    return s;
}

int mass_degree(int degree) { return degree == 1 ? 2 : 4; }

}  // namespace

SparseMatrix assemble_weighted_stiffness(const FunctionSpace& space, double eps_m, double eps_s) {
    SparseMatrix A = space.make_matrix();
    const auto& mesh = space.mesh();
    const int nd = space.dofs_per_cell();
    const auto& q = tet_quadrature(space.degree() == 1 ? 1 : 2);
    std::array<Point3, 10> dphi;
    std::array<double, 100> local;
    for (Index c : space.cells()) {
        const auto pts = mesh.cell_points(c);
        const double vol = mesh.cell_volume(c);
        const double eps = mesh.region(c) == Region::Molecular ? eps_m : eps_s;
        const auto g = barycentric_gradients(pts);
        local.fill(0.0);
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            shape_gradients(space.degree(), q.points[k], g, dphi);
            const double w = eps * vol * q.weights[k] / TetQuadrature::measure;
            for (int i = 0; i < nd; ++i)
                for (int j = 0; j < nd; ++j) local[i * nd + j] += w * dot(dphi[i], dphi[j]);
        }
        const auto dofs = space.cell_dofs(c);
        for (int i = 0; i < nd; ++i)
            for (int j = 0; j < nd; ++j) A.add(dofs[i], dofs[j], local[i * nd + j]);
    }
    return A;
}

SparseMatrix assemble_mass(const FunctionSpace& space, RegionCoefficient coef, const FieldWeight& weight) {
    SparseMatrix M = space.make_matrix();
    const auto& mesh = space.mesh();
    if (weight.field) require_same_mesh(space, weight.field->space());
    const int nd = space.dofs_per_cell();
    // Weighted forms use the degree-5 rule so nonlinear weights are resolved
    // the same way everywhere.
    const auto& q = tet_quadrature(weight.field ? 5 : mass_degree(space.degree()));
    std::array<double, 10> phi;
    std::array<double, 100> local;
    for (Index c : space.cells()) {
        const double cc = coef(mesh.region(c));
        if (cc == 0.0) continue;
        const double vol = mesh.cell_volume(c);
        local.fill(0.0);
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            shape_values(space.degree(), q.points[k], phi);
            double w = cc * vol * q.weights[k] / TetQuadrature::measure;
            if (weight.field) {
                const double u = local_value(*weight.field, c, q.points[k]);
                w *= weight.transform ? weight.transform(u) : u;
            }
            for (int i = 0; i < nd; ++i)
                for (int j = 0; j < nd; ++j) local[i * nd + j] += w * phi[i] * phi[j];
        }
        const auto dofs = space.cell_dofs(c);
        for (int i = 0; i < nd; ++i)
            for (int j = 0; j < nd; ++j) M.add(dofs[i], dofs[j], local[i * nd + j]);
    }
    return M;
}

SparseMatrix assemble_weighted_mass(const FunctionSpace& space, double kappa_sq, const FieldWeight& weight) {
    return assemble_mass(space, {0.0, kappa_sq}, weight);
}

Point3 outward_normal(const SimplicialMesh& mesh, const Facet& f) {
    const auto& cell = mesh.cell(f.cell);
    const auto& lv = kFaceVertices[f.face];
    const Point3 a = mesh.vertex(cell[lv[0]]), b = mesh.vertex(cell[lv[1]]), c = mesh.vertex(cell[lv[2]]);
    Point3 n = triangle_normal(a, b, c);
    n *= 1.0 / norm(n);
    if (dot(n, mesh.vertex(cell[f.face]) - a) > 0.0) n *= -1.0;
    return n;
}

std::array<double, 4> face_to_cell_bary(int face, const std::array<double, 3>& t) {
    std::array<double, 4> b{};
    const auto& lv = kFaceVertices[face];
    for (int k = 0; k < 3; ++k) b[lv[k]] = t[k];
    return b;
}

std::vector<double> assemble_interface_flux_vector(const FunctionSpace& space,
                                                   const std::function<double(const Point3&, const Point3&)>& flux) {
    std::vector<double> b(space.num_dofs(), 0.0);
    const auto& mesh = space.mesh();
    const auto& q = triangle_quadrature(4);
    std::array<double, 10> phi;
    for (const auto& f : mesh.interface_facets()) {
        const auto tri = mesh.facet_vertices(f);
        const Point3 a = mesh.vertex(tri[0]), bb = mesh.vertex(tri[1]), c = mesh.vertex(tri[2]);
        const double area = 0.5 * norm(triangle_normal(a, bb, c));
        const Point3 n = outward_normal(mesh, f);
        const auto pts = mesh.cell_points(f.cell);
        const auto dofs = space.cell_dofs(f.cell);
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const auto bary = face_to_cell_bary(f.face, q.points[k]);
            Point3 x{};
            for (int i = 0; i < 4; ++i) x += pts[i] * bary[i];
            const double w = area * q.weights[k] / TriangleQuadrature::measure * flux(x, n);
            shape_values(space.degree(), bary, phi);
            for (std::size_t i = 0; i < dofs.size(); ++i) b[dofs[i]] += w * phi[i];
        }
    }
    return b;
}

std::vector<double> assemble_field_load(const FunctionSpace& space, RegionCoefficient coef, const FeField& u,
                                        const std::function<double(double)>& transform) {
    require_same_mesh(space, u.space());
    std::vector<double> b(space.num_dofs(), 0.0);
    const auto& mesh = space.mesh();
    const auto& q = tet_quadrature(5);
    std::array<double, 10> phi;
    for (Index c : space.cells()) {
        const double cc = coef(mesh.region(c));
        if (cc == 0.0) continue;
        if (!u.space().in_support(c)) throw DomainError("load field not defined on the space's support");
        const double vol = mesh.cell_volume(c);
        const auto dofs = space.cell_dofs(c);
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const double val = local_value(u, c, q.points[k]);
            const double w = cc * vol * q.weights[k] / TetQuadrature::measure * (transform ? transform(val) : val);
            shape_values(space.degree(), q.points[k], phi);
            for (std::size_t i = 0; i < dofs.size(); ++i) b[dofs[i]] += w * phi[i];
        }
    }
    return b;
}

std::vector<double> assemble_gradient_load(const FunctionSpace& space, RegionCoefficient coef, const FeField& u,
                                           std::optional<Region> region) {
    require_same_mesh(space, u.space());
    std::vector<double> b(space.num_dofs(), 0.0);
    const auto& mesh = space.mesh();
    const auto& q = tet_quadrature(2);
    std::array<Point3, 10> dphi;
    for (Index c : space.cells()) {
        if (region && mesh.region(c) != *region) continue;
        if (!u.space().in_support(c)) continue;
        const double cc = coef(mesh.region(c));
        if (cc == 0.0) continue;
        const auto g = barycentric_gradients(mesh.cell_points(c));
        const double vol = mesh.cell_volume(c);
        const auto dofs = space.cell_dofs(c);
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            double val;
            Point3 grad;
            local_eval(u, c, q.points[k], g, val, grad);
            const double w = cc * vol * q.weights[k] / TetQuadrature::measure;
            shape_gradients(space.degree(), q.points[k], g, dphi);
            for (std::size_t i = 0; i < dofs.size(); ++i) b[dofs[i]] += w * dot(grad, dphi[i]);
        }
    }
    return b;
}

void add_point_load(const FunctionSpace& space, const CellLocation& at, double weight, std::vector<double>& b) {
    if (!space.in_support(at.cell)) throw PointOutsideMesh("point load outside the space's support");
    std::array<double, 10> phi;
    shape_values(space.degree(), at.bary, phi);
    const auto dofs = space.cell_dofs(at.cell);
    for (std::size_t i = 0; i < dofs.size(); ++i) b[dofs[i]] += weight * phi[i];
}

// ---------------------------------------------------------------------------

void apply_dirichlet(SparseMatrix& A, std::vector<double>& b, const FunctionSpace& space, const DirichletValues& values) {
    const std::size_t n = space.num_dofs();
    if (A.rows() != n || b.size() != n) throw DomainError("system size differs from the space's dof count");
    std::vector<bool> fixed(n, false);
    std::vector<double> vals(n, 0.0);
    for (const auto& [dof, v] : values) {
        if (dof >= n) throw DomainError("Dirichlet value for a nonexistent dof");
        fixed[dof] = true;
        vals[dof] = v;
    }
    for (Index d : space.boundary_dofs()) {
        if (!fixed[d]) throw DomainError("missing Dirichlet value for boundary dof " + std::to_string(d));
    }
    eliminate_fixed(A, b, fixed, vals);
}

DirichletValues boundary_values(const FeField& f) {
    DirichletValues out;
    for (Index d : f.space().boundary_dofs()) out.emplace_hint(out.end(), d, f[d]);
    return out;
}

// ---------------------------------------------------------------------------

FeField interpolate_nodal(const std::function<double(const Point3&)>& g, SpacePtr space, InterpolationMask mask) {
    std::vector<double> v(space->num_dofs(), 0.0);
    for (Index d = 0; d < v.size(); ++d) {
        if (mask == InterpolationMask::BoundaryOnly && !space->is_boundary(d)) continue;
        v[d] = g(space->dof_point(d));
        if (!std::isfinite(v[d])) throw DomainError("interpolated function is not finite at a dof");
    }
    return FeField(std::move(space), std::move(v));
}

FeField interpolate_field(const FeField& f, SpacePtr space) {
    require_same_mesh(*space, f.space());
    std::vector<double> v(space->num_dofs(), 0.0);
    std::vector<bool> done(space->num_dofs(), false);
    for (Index c : space->cells()) {
        if (!f.space().in_support(c)) continue;
        const auto dofs = space->cell_dofs(c);
        for (std::size_t k = 0; k < dofs.size(); ++k) {
            if (done[dofs[k]]) continue;
            v[dofs[k]] = local_value(f, c, dof_bary(static_cast<int>(k)));
            done[dofs[k]] = true;
        }
    }
    if (std::find(done.begin(), done.end(), false) != done.end())
        throw DomainError("source field does not cover the target space");
    return FeField(std::move(space), std::move(v));
}

FeField l2_project(const FeField& f, SpacePtr target, bool homogeneous_boundary, const SolverConfig& solver) {
    require_same_mesh(*target, f.space());
    for (Index c : target->cells())
        if (!f.space().in_support(c)) throw DomainError("projected field does not cover the target support");
    SparseMatrix M = assemble_mass(*target, {1.0, 1.0});
    std::vector<double> b = assemble_field_load(*target, {1.0, 1.0}, f);
    if (homogeneous_boundary) {
        DirichletValues zero;
        for (Index d : target->boundary_dofs()) zero.emplace_hint(zero.end(), d, 0.0);
        apply_dirichlet(M, b, *target, zero);
    }
    return FeField(std::move(target), cg_solve(M, b, solver));
}

// ---------------------------------------------------------------------------

double evaluate(const FeField& f, const Point3& p) {
    const auto loc = f.space().mesh().locate(p);
    if (!loc) throw PointOutsideMesh("point outside the mesh");
    return f.value_in_cell(loc->cell, loc->bary);
}

Point3 evaluate_gradient(const FeField& f, const Point3& p) {
    const auto loc = f.space().mesh().locate(p);
    if (!loc) throw PointOutsideMesh("point outside the mesh");
    return f.gradient_in_cell(loc->cell, loc->bary);
}

std::vector<double> cellwise_integrate(std::span<const FeField* const> fields,
                                       const std::function<double(const QuadraturePointData&)>& integrand, int degree,
                                       std::optional<Region> region) {
    if (fields.empty()) throw DomainError("cellwise integral needs at least one field");
    const auto& mesh = fields[0]->space().mesh();
    for (const auto* f : fields) require_same_mesh(fields[0]->space(), f->space());
    const auto& q = tet_quadrature(degree);
    std::vector<double> out(mesh.num_cells(), 0.0);
    std::vector<double> values(fields.size());
    std::vector<Point3> grads(fields.size());
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        if (region && mesh.region(c) != *region) continue;
        bool ok = true;
        for (const auto* f : fields) ok = ok && f->space().in_support(c);
        if (!ok) continue;
        const auto pts = mesh.cell_points(c);
        const auto g = barycentric_gradients(pts);
        const double vol = mesh.cell_volume(c);
        double s = 0.0;
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            for (std::size_t i = 0; i < fields.size(); ++i) local_eval(*fields[i], c, q.points[k], g, values[i], grads[i]);
            Point3 x{};
            for (int i = 0; i < 4; ++i) x += pts[i] * q.points[k][i];
            s += q.weights[k] * integrand({c, mesh.region(c), x, values, grads});
        }
        out[c] = s * vol / TetQuadrature::measure;
    }
    return out;
}

std::vector<double> cellwise_interface_integrate(
    std::span<const FeField* const> fields,
    const std::function<double(const QuadraturePointData&, const Point3& normal)>& integrand, int degree) {
    if (fields.empty()) throw DomainError("interface integral needs at least one field");
    const auto& mesh = fields[0]->space().mesh();
    for (const auto* f : fields) require_same_mesh(fields[0]->space(), f->space());
    const auto& q = triangle_quadrature(degree);
    std::vector<double> out(mesh.num_cells(), 0.0);
    std::vector<double> values(fields.size());
    std::vector<Point3> grads(fields.size());
    for (const auto& f : mesh.interface_facets()) {
        const auto tri = mesh.facet_vertices(f);
        const double area =
            0.5 * norm(triangle_normal(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2])));
        const Point3 n = outward_normal(mesh, f);
        const auto pts = mesh.cell_points(f.cell);
        const auto g = barycentric_gradients(pts);
        double s = 0.0;
        for (std::size_t k = 0; k < q.points.size(); ++k) {
            const auto bary = face_to_cell_bary(f.face, q.points[k]);
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (!fields[i]->space().in_support(f.cell)) throw DomainError("field not defined on the interface");
                local_eval(*fields[i], f.cell, bary, g, values[i], grads[i]);
            }
            Point3 x{};
            for (int i = 0; i < 4; ++i) x += pts[i] * bary[i];
            s += q.weights[k] * integrand({f.cell, mesh.region(f.cell), x, values, grads}, n);
        }
        out[f.cell] += s * area / TriangleQuadrature::measure;
    }
    return out;
}

double integrate_pair(const FeField& f, const FeField& g, std::optional<Region> region) {
    const FeField* fields[] = {&f, &g};
    const int degree = f.space().degree() + g.space().degree();
    const auto cells = cellwise_integrate(fields, [](const QuadraturePointData& d) { return d.values[0] * d.values[1]; },
                                          degree, region);
    double s = 0.0;
    for (double v : cells) s += v;
    return s;
}

double integrate_grad_pair(const FeField& f, const FeField& g, RegionCoefficient coef, std::optional<Region> region) {
    const FeField* fields[] = {&f, &g};
    const int degree = f.space().degree() + g.space().degree() - 2;
    const auto cells = cellwise_integrate(
        fields, [&](const QuadraturePointData& d) { return coef(d.region) * dot(d.gradients[0], d.gradients[1]); },
        degree, region);
    double s = 0.0;
    for (double v : cells) s += v;
    return s;
}

}  // namespace pbe
