#pragma once

// Brute-force mesh checks used as test oracles. Slow; only for small meshes.

#include <algorithm>
#include <vector>

#include "pbe/mesh.hpp"

namespace pbe::testing {

/// Vertices lying on a cell face (or edge) without being one of its corners.
inline std::vector<Index> hanging_vertices(const SimplicialMesh& mesh) {
    std::vector<Index> out;
    double scale = 0.0;
    for (const auto& v : mesh.vertices()) scale = std::max(scale, norm(v));
    const double tol = 1e-10 * std::max(scale, 1.0);
    // Vertices sorted by x so each face only scans its x-range.
    std::vector<Index> by_x(mesh.num_vertices());
    for (Index v = 0; v < by_x.size(); ++v) by_x[v] = v;
    std::sort(by_x.begin(), by_x.end(), [&](Index a, Index b) { return mesh.vertex(a).x < mesh.vertex(b).x; });
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const auto& cell = mesh.cell(c);
        for (int f = 0; f < 4; ++f) {
            const auto& lv = kFaceVertices[f];
            const Index a = cell[lv[0]], b = cell[lv[1]], d = cell[lv[2]];
            const double lo = std::min({mesh.vertex(a).x, mesh.vertex(b).x, mesh.vertex(d).x}) - tol;
            const double hi = std::max({mesh.vertex(a).x, mesh.vertex(b).x, mesh.vertex(d).x}) + tol;
            auto it = std::lower_bound(by_x.begin(), by_x.end(), lo,
                                       [&](Index v, double x) { return mesh.vertex(v).x < x; });
            for (; it != by_x.end() && mesh.vertex(*it).x <= hi; ++it) {
                const Index v = *it;
                if (v == a || v == b || v == d) continue;
                const double dist = point_triangle_distance(mesh.vertex(v), mesh.vertex(a), mesh.vertex(b), mesh.vertex(d));
                if (dist < tol) out.push_back(v);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Two tetrahedra sharing the face (1, 2, 3).
inline SimplicialMesh two_tet_mesh(Region first, Region second) {
    std::vector<Point3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}};
    std::vector<Cell> c{{0, 1, 2, 3}, {1, 2, 3, 4}};
    return SimplicialMesh::with_derived_facets(v, c, {first, second});
}

inline SimplicialMesh reference_tet_mesh(Region region = Region::Solvent) {
    std::vector<Point3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    return SimplicialMesh::with_derived_facets(v, {{0, 1, 2, 3}}, {region});
}

}  // namespace pbe::testing
