#include <algorithm>
#include <cmath>

#include "pbe/errors.hpp"
#include "pbe/fem.hpp"

namespace pbe {

FunctionSpace::FunctionSpace(std::shared_ptr<const SimplicialMesh> mesh, int degree, Support support)
    : mesh_(std::move(mesh)), degree_(degree), support_(support) {
    if (!mesh_) throw DomainError("function space needs a mesh");
    if (degree_ != 1 && degree_ != 2) throw DomainError("only degree 1 and 2 spaces are supported");
    const auto& m = *mesh_;

    std::vector<bool> used_vertex(m.num_vertices(), false);
    std::vector<bool> used_edge(degree_ == 2 ? m.num_edges() : 0, false);
    for (Index c = 0; c < m.num_cells(); ++c) {
        if (!in_support(c)) continue;
        cells_.push_back(c);
        for (Index v : m.cell(c)) used_vertex[v] = true;
        if (degree_ == 2)
            for (Index e : m.cell_edges(c)) used_edge[e] = true;
    }

    vertex_dof_.assign(m.num_vertices(), kNoIndex);
    for (Index v = 0; v < m.num_vertices(); ++v) {
        if (!used_vertex[v]) continue;
        vertex_dof_[v] = static_cast<Index>(points_.size());
        points_.push_back(m.vertex(v));
    }
    if (degree_ == 2) {
        edge_dof_.assign(m.num_edges(), kNoIndex);
        for (Index e = 0; e < m.num_edges(); ++e) {
            if (!used_edge[e]) continue;
            edge_dof_[e] = static_cast<Index>(points_.size());
            const auto& ed = m.edges()[e];
            points_.push_back((m.vertex(ed[0]) + m.vertex(ed[1])) * 0.5);
        }
    }

    cell_dofs_.assign(m.num_cells() * 10, kNoIndex);
    for (Index c : cells_) {
        Index* d = cell_dofs_.data() + static_cast<std::size_t>(c) * 10;
        for (int k = 0; k < 4; ++k) d[k] = vertex_dof_[m.cell(c)[k]];
        if (degree_ == 2)
            for (int k = 0; k < 6; ++k) d[4 + k] = edge_dof_[m.cell_edges(c)[k]];
    }

    boundary_mask_.assign(points_.size(), false);
    const auto& facets = support_ == Support::WholeDomain ? m.outer_facets() : m.interface_facets();
    for (const auto& f : facets) {
        const auto dofs = cell_dofs(f.cell);
        for (int k = 0; k < 4; ++k)
            if (k != f.face) boundary_mask_[dofs[k]] = true;
        if (degree_ == 2) {
            for (int e = 0; e < 6; ++e) {
                if (kEdgeVertices[e][0] != f.face && kEdgeVertices[e][1] != f.face) boundary_mask_[dofs[4 + e]] = true;
            }
        }
    }
    for (Index d = 0; d < points_.size(); ++d)
        if (boundary_mask_[d]) boundary_.push_back(d);
}

SparseMatrix FunctionSpace::make_matrix() const {
    std::vector<std::vector<std::uint32_t>> rows(num_dofs());
    for (Index c : cells_) {
        const auto dofs = cell_dofs(c);
        for (Index i : dofs) rows[i].insert(rows[i].end(), dofs.begin(), dofs.end());
    }
    return SparseMatrix(std::move(rows));
}

SpacePtr make_space(std::shared_ptr<const SimplicialMesh> mesh, int degree, Support support) {
    return std::make_shared<const FunctionSpace>(std::move(mesh), degree, support);
}

// ---------------------------------------------------------------------------

std::array<Point3, 4> barycentric_gradients(const std::array<Point3, 4>& v) {
    const Point3 e1 = v[1] - v[0], e2 = v[2] - v[0], e3 = v[3] - v[0];
    const double det = dot(e1, cross(e2, e3));
    if (det == 0.0) throw DegenerateElementError("zero-volume cell");
    std::array<Point3, 4> g;
    g[1] = cross(e2, e3) * (1.0 / det);
    g[2] = cross(e3, e1) * (1.0 / det);
    g[3] = cross(e1, e2) * (1.0 / det);
    g[0] = (g[1] + g[2] + g[3]) * -1.0;
    return g;
}

void shape_values(int degree, const std::array<double, 4>& l, std::span<double> out) {
    if (degree == 1) {
        for (int i = 0; i < 4; ++i) out[i] = l[i];
        return;
    }
    for (int i = 0; i < 4; ++i) out[i] = l[i] * (2.0 * l[i] - 1.0);
    for (int e = 0; e < 6; ++e) out[4 + e] = 4.0 * l[kEdgeVertices[e][0]] * l[kEdgeVertices[e][1]];
}

void shape_gradients(int degree, const std::array<double, 4>& l, const std::array<Point3, 4>& g,
                     std::span<Point3> out) {
    if (degree == 1) {
        for (int i = 0; i < 4; ++i) out[i] = g[i];
        return;
    }
    for (int i = 0; i < 4; ++i) out[i] = g[i] * (4.0 * l[i] - 1.0);
    for (int e = 0; e < 6; ++e) {
        const int i = kEdgeVertices[e][0], j = kEdgeVertices[e][1];
        out[4 + e] = (g[i] * l[j] + g[j] * l[i]) * 4.0;
    }
}

// ---------------------------------------------------------------------------

FeField::FeField(SpacePtr space) : space_(std::move(space)) {
    if (!space_) throw DomainError("field needs a space");
    values_.assign(space_->num_dofs(), 0.0);
}

FeField::FeField(SpacePtr space, std::vector<double> values) : space_(std::move(space)), values_(std::move(values)) {
    if (!space_) throw DomainError("field needs a space");
    if (values_.size() != space_->num_dofs())
        throw DomainError("field has " + std::to_string(values_.size()) + " coefficients, space has " +
                          std::to_string(space_->num_dofs()) + " dofs");
    for (double v : values_)
        if (!std::isfinite(v)) throw DomainError("non-finite field coefficient");
}

double FeField::value_in_cell(Index cell, const std::array<double, 4>& bary) const {
    if (!space_->in_support(cell)) throw PointOutsideMesh("cell outside the field's support");
    std::array<double, 10> phi;
    shape_values(space_->degree(), bary, phi);
    const auto dofs = space_->cell_dofs(cell);
    double s = 0.0;
    for (std::size_t k = 0; k < dofs.size(); ++k) s += phi[k] * values_[dofs[k]];
    return s;
}

Point3 FeField::gradient_in_cell(Index cell, const std::array<double, 4>& bary) const {
    if (!space_->in_support(cell)) throw PointOutsideMesh("cell outside the field's support");
    const auto g = barycentric_gradients(space_->mesh().cell_points(cell));
    std::array<Point3, 10> dphi;
    shape_gradients(space_->degree(), bary, g, dphi);
    const auto dofs = space_->cell_dofs(cell);
    Point3 s{};
    for (std::size_t k = 0; k < dofs.size(); ++k) s += dphi[k] * values_[dofs[k]];
    return s;
}

}  // namespace pbe
