#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pbe/mesh.hpp"
#include "pbe/quadrature.hpp"
#include "pbe/solvers.hpp"
#include "pbe/sparse.hpp"

namespace pbe {

enum class Support { WholeDomain, MolecularOnly };

/// Continuous Lagrange space of degree 1 or 2 on the cells of a support.
///
/// Dofs are numbered vertices first (ascending vertex index), then edge
/// midpoints (ascending edge index), restricted to the support. Boundary dofs
/// are those on the outer boundary (WholeDomain) or on the interface
/// (MolecularOnly).
class FunctionSpace {
public:
    FunctionSpace(std::shared_ptr<const SimplicialMesh> mesh, int degree, Support support);

    const SimplicialMesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const SimplicialMesh>& mesh_ptr() const { return mesh_; }
    int degree() const { return degree_; }
    Support support() const { return support_; }
    std::size_t num_dofs() const { return points_.size(); }
    int dofs_per_cell() const { return degree_ == 1 ? 4 : 10; }

    bool in_support(Index cell) const { return support_ == Support::WholeDomain || mesh_->region(cell) == Region::Molecular; }
    /// Cells of the support in ascending order.
    const std::vector<Index>& cells() const { return cells_; }
    /// Local-to-global dofs of a support cell: four vertices, then the six
    /// edges in kEdgeVertices order for degree 2.
    std::span<const Index> cell_dofs(Index cell) const {
        return {cell_dofs_.data() + static_cast<std::size_t>(cell) * 10, static_cast<std::size_t>(dofs_per_cell())};
    }

    const Point3& dof_point(Index dof) const { return points_[dof]; }
    bool is_boundary(Index dof) const { return boundary_mask_[dof]; }
    const std::vector<bool>& boundary_mask() const { return boundary_mask_; }
    const std::vector<Index>& boundary_dofs() const { return boundary_; }

    Index vertex_dof(Index v) const { return vertex_dof_[v]; }
    Index edge_dof(Index e) const { return edge_dof_.empty() ? kNoIndex : edge_dof_[e]; }

    /// Empty matrix with the coupling pattern of this space.
    SparseMatrix make_matrix() const;

private:
    std::shared_ptr<const SimplicialMesh> mesh_;
    int degree_;
    Support support_;
    std::vector<Index> cells_;
    std::vector<Index> cell_dofs_;
    std::vector<Point3> points_;
    std::vector<bool> boundary_mask_;
    std::vector<Index> boundary_;
    std::vector<Index> vertex_dof_;
    std::vector<Index> edge_dof_;
};

using SpacePtr = std::shared_ptr<const FunctionSpace>;

SpacePtr make_space(std::shared_ptr<const SimplicialMesh> mesh, int degree, Support support);

/// Finite element function: one coefficient per dof of its space.
class FeField {
public:
    explicit FeField(SpacePtr space);
    FeField(SpacePtr space, std::vector<double> values);

    const FunctionSpace& space() const { return *space_; }
    const SpacePtr& space_ptr() const { return space_; }
    const std::vector<double>& values() const { return values_; }
    double operator[](Index dof) const { return values_[dof]; }

    /// Value at barycentric coordinates inside a support cell.
    double value_in_cell(Index cell, const std::array<double, 4>& bary) const;
    Point3 gradient_in_cell(Index cell, const std::array<double, 4>& bary) const;

private:
    SpacePtr space_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Reference element

/// Gradients of the barycentric coordinates of a tetrahedron.
std::array<Point3, 4> barycentric_gradients(const std::array<Point3, 4>& v);

/// Lagrange basis values (4 or 10 entries).
void shape_values(int degree, const std::array<double, 4>& bary, std::span<double> out);
/// Lagrange basis gradients given the barycentric gradients.
void shape_gradients(int degree, const std::array<double, 4>& bary, const std::array<Point3, 4>& grad_bary,
                     std::span<Point3> out);

// ---------------------------------------------------------------------------
// Assembly

/// Piecewise constant coefficient: one value per region.
struct RegionCoefficient {
    double molecular = 0.0;
    double solvent = 0.0;
    double operator()(Region r) const { return r == Region::Molecular ? molecular : solvent; }
};

/// Optional pointwise weight w = transform(field(x)); identity transform when empty.
struct FieldWeight {
    const FeField* field = nullptr;
    std::function<double(double)> transform;
};

/// A_ij = int eps grad(l_j) . grad(l_i) over the support.
SparseMatrix assemble_weighted_stiffness(const FunctionSpace& space, double eps_m, double eps_s);

/// M_ij = int c(x) w(x) l_j l_i with c = kappa_sq in the solvent and 0 in the
/// molecular region.
SparseMatrix assemble_weighted_mass(const FunctionSpace& space, double kappa_sq, const FieldWeight& weight = {});

/// M_ij = int c(x) w(x) l_j l_i with an arbitrary per-region coefficient.
SparseMatrix assemble_mass(const FunctionSpace& space, RegionCoefficient c, const FieldWeight& weight = {});

/// b_i = int_Gamma flux(x, n) l_i ds, n the unit normal pointing out of the
/// molecular region.
std::vector<double> assemble_interface_flux_vector(const FunctionSpace& space,
                                                   const std::function<double(const Point3&, const Point3&)>& flux);

/// b_i = int c(x) F(u(x)) l_i dx.
std::vector<double> assemble_field_load(const FunctionSpace& space, RegionCoefficient c, const FeField& u,
                                        const std::function<double(double)>& transform = {});

/// b_i = int_R c grad(u) . grad(l_i) over the cells of `region` (all cells
/// when empty) shared by both supports.
std::vector<double> assemble_gradient_load(const FunctionSpace& space, RegionCoefficient c, const FeField& u,
                                           std::optional<Region> region = std::nullopt);

/// b_i += weight * l_i(p) for the point p given by a cell location.
void add_point_load(const FunctionSpace& space, const CellLocation& at, double weight, std::vector<double>& b);

// ---------------------------------------------------------------------------
// Boundary conditions

using DirichletValues = std::map<Index, double>;

/// Symmetric elimination; every boundary dof of the space must have a value.
void apply_dirichlet(SparseMatrix& A, std::vector<double>& b, const FunctionSpace& space, const DirichletValues& values);

/// Boundary values of a field keyed by its space's boundary dofs.
DirichletValues boundary_values(const FeField& f);

// ---------------------------------------------------------------------------
// Interpolation and projection

enum class InterpolationMask { All, BoundaryOnly };

FeField interpolate_nodal(const std::function<double(const Point3&)>& g, SpacePtr space,
                          InterpolationMask mask = InterpolationMask::All);

/// Nodal interpolation of another field on the same mesh into `space`.
FeField interpolate_field(const FeField& f, SpacePtr space);

/// L2 projection onto `target`. With homogeneous_boundary the projection is
/// onto the subspace vanishing at the boundary dofs.
FeField l2_project(const FeField& f, SpacePtr target, bool homogeneous_boundary = false,
                   const SolverConfig& solver = {1e-13, 1e-30, 0, Preconditioner::Jacobi});

// ---------------------------------------------------------------------------
// Evaluation and integrals

double evaluate(const FeField& f, const Point3& p);
Point3 evaluate_gradient(const FeField& f, const Point3& p);

/// int_R f g over cells of `region` (all when empty) shared by both supports.
double integrate_pair(const FeField& f, const FeField& g, std::optional<Region> region = std::nullopt);
/// int_R c grad(f) . grad(g).
double integrate_grad_pair(const FeField& f, const FeField& g, RegionCoefficient c,
                           std::optional<Region> region = std::nullopt);

/// Pointwise data handed to a cellwise integrand.
struct QuadraturePointData {
    Index cell;
    Region region;
    Point3 x;
    std::span<const double> values;     // one per field
    std::span<const Point3> gradients;  // one per field
};

/// Per-cell integrals of integrand(data) over cells shared by every field's
/// support (restricted to `region` when given); zero for other cells.
std::vector<double> cellwise_integrate(std::span<const FeField* const> fields,
                                       const std::function<double(const QuadraturePointData&)>& integrand,
                                       int degree, std::optional<Region> region = std::nullopt);

/// Per-cell interface integrals of integrand(data, n) over the interface
/// facets, attributed to the molecular owner cell.
std::vector<double> cellwise_interface_integrate(
    std::span<const FeField* const> fields,
    const std::function<double(const QuadraturePointData&, const Point3& normal)>& integrand, int degree = 4);

/// Unit normal of a cell face pointing away from the cell.
Point3 outward_normal(const SimplicialMesh& mesh, const Facet& f);
/// Barycentric coordinates in the owner cell of a point on its face.
std::array<double, 4> face_to_cell_bary(int face, const std::array<double, 3>& tri_bary);

}  // namespace pbe
