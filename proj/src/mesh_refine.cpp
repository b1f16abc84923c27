#include <algorithm>
#include <bit>
#include <unordered_map>

#include "pbe/errors.hpp"
#include "pbe/mesh.hpp"

namespace pbe {

namespace {

std::uint64_t edge_key(Index a, Index b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

double squared_length(const std::vector<Point3>& v, Index a, Index b) {
    const Point3 d = v[a] - v[b];
    return dot(d, d);
}

/// Local edge index of the longest edge; exact ties go to the smaller key so
/// every cell sharing the edge agrees.
int longest_edge(const std::vector<Point3>& vertices, const Cell& c) {
    int best = 0;
    double best_len = -1.0;
    std::uint64_t best_key = 0;
    for (int e = 0; e < 6; ++e) {
        const Index a = c[kEdgeVertices[e][0]];
        const Index b = c[kEdgeVertices[e][1]];
        const double len = squared_length(vertices, a, b);
        const std::uint64_t key = edge_key(a, b);
        if (len > best_len || (len == best_len && key < best_key)) {
            best = e;
            best_len = len;
            best_key = key;
        }
    }
    return best;
}

}  // namespace

namespace {

void push_oriented(const std::vector<Point3>& vertices, Cell kid, Region region, std::vector<Cell>& cells,
                   std::vector<Region>& regions) {
    if (signed_volume(vertices[kid[0]], vertices[kid[1]], vertices[kid[2]], vertices[kid[3]]) < 0.0)
        std::swap(kid[2], kid[3]);
    cells.push_back(kid);
    regions.push_back(region);
}

/// Red (1 -> 8) subdivision given the six edge midpoints in kEdgeVertices order.
void red_children(const std::vector<Point3>& vertices, const Cell& c, const std::array<Index, 6>& m, Region region,
                  std::vector<Cell>& cells, std::vector<Region>& regions) {
    const Index m01 = m[0], m02 = m[1], m03 = m[2], m12 = m[3], m13 = m[4], m23 = m[5];
    std::array<Cell, 8> kids{};
    kids[0] = {c[0], m01, m02, m03};
    kids[1] = {c[1], m01, m12, m13};
    kids[2] = {c[2], m02, m12, m23};
    kids[3] = {c[3], m03, m13, m23};

    // Inner octahedron split along its shortest diagonal.
    const double d0 = squared_length(vertices, m01, m23);
    const double d1 = squared_length(vertices, m02, m13);
    const double d2 = squared_length(vertices, m03, m12);
    Index a, b;
    std::array<Index, 4> ring;
    if (d0 <= d1 && d0 <= d2) {
        a = m01, b = m23, ring = {m02, m03, m13, m12};
    } else if (d1 <= d2) {
        a = m02, b = m13, ring = {m01, m03, m23, m12};
    } else {
        a = m03, b = m12, ring = {m01, m02, m23, m13};
    }
    for (int k = 0; k < 4; ++k) kids[4 + k] = {a, b, ring[k], ring[(k + 1) % 4]};
    for (const auto& kid : kids) push_oriented(vertices, kid, region, cells, regions);
}

bool edge_on_face(int edge, int face) { return kEdgeVertices[edge][0] != face && kEdgeVertices[edge][1] != face; }

}  // namespace

SimplicialMesh refine_uniform(const SimplicialMesh& mesh) {
    const Index nv = static_cast<Index>(mesh.num_vertices());
    std::vector<Point3> vertices = mesh.vertices();
    vertices.reserve(nv + mesh.num_edges());
    for (const auto& e : mesh.edges()) vertices.push_back((mesh.vertex(e[0]) + mesh.vertex(e[1])) * 0.5);

    std::vector<Cell> cells;
    std::vector<Region> regions;
    cells.reserve(mesh.num_cells() * 8);
    regions.reserve(mesh.num_cells() * 8);
    for (Index ci = 0; ci < mesh.num_cells(); ++ci) {
        std::array<Index, 6> m;
        for (int k = 0; k < 6; ++k) m[k] = nv + mesh.cell_edges(ci)[k];
        red_children(vertices, mesh.cell(ci), m, mesh.region(ci), cells, regions);
    }
    return SimplicialMesh::with_derived_facets(std::move(vertices), std::move(cells), std::move(regions));
}

SimplicialMesh refine_marked(const SimplicialMesh& mesh, const CellSet& marked, const BisectionOptions& options) {
    for (Index c : marked) {
        if (c >= mesh.num_cells()) throw DomainError("marked cell index out of range");
    }
    if (marked.empty()) return mesh;

    const std::size_t nc = mesh.num_cells();
    std::vector<char> red(nc, 0);
    std::vector<char> split(mesh.num_edges(), 0);
    for (Index ci : marked) {
        const auto& ce = mesh.cell_edges(ci);
        if (options.mode == BisectionMode::AllEdges) {
            red[ci] = 1;
            for (Index e : ce) split[e] = 1;
        } else {
            split[ce[longest_edge(mesh.vertices(), mesh.cell(ci))]] = 1;
        }
    }

    // Closure. A face with all three edges split always takes the red
    // pattern; a cell can realize that only as red or, with a single such
    // face and nothing else split, as a four-child green split. Other cells
    // are bisected along their split edges, which only produces face patterns
    // that depend on the face alone.
    auto split_mask = [&](Index ci) {
        int mask = 0;
        for (int k = 0; k < 6; ++k)
            if (split[mesh.cell_edges(ci)[k]]) mask |= 1 << k;
        return mask;
    };
    auto full_faces = [&](int mask) {
        int faces = 0;
        for (int f = 0; f < 4; ++f) {
            bool full = true;
            for (int k = 0; k < 6; ++k)
                if (edge_on_face(k, f) && !(mask >> k & 1)) full = false;
            if (full) faces |= 1 << f;
        }
        return faces;
    };
    for (int sweep = 0;; ++sweep) {
        if (sweep >= options.max_sweeps)
            throw MeshError("refinement closure exceeded " + std::to_string(options.max_sweeps) + " sweeps");
        bool changed = false;
        for (Index ci = 0; ci < nc; ++ci) {
            if (red[ci]) continue;
            const int mask = split_mask(ci);
            const int faces = full_faces(mask);
            const int nfaces = std::popcount(static_cast<unsigned>(faces));
            if (nfaces >= 2 || (nfaces == 1 && std::popcount(static_cast<unsigned>(mask)) > 3)) {
                red[ci] = 1;
                for (Index e : mesh.cell_edges(ci)) split[e] = 1;
                changed = true;
            }
        }
        if (!changed) break;
    }

    std::vector<Point3> vertices = mesh.vertices();
    std::vector<Index> mid(mesh.num_edges(), kNoIndex);
    for (Index e = 0; e < mesh.num_edges(); ++e) {
        if (!split[e]) continue;
        mid[e] = static_cast<Index>(vertices.size());
        const auto& ev = mesh.edges()[e];
        vertices.push_back((vertices[ev[0]] + vertices[ev[1]]) * 0.5);
    }
    std::unordered_map<std::uint64_t, Index> midpoint;
    for (Index e = 0; e < mesh.num_edges(); ++e)
        if (split[e]) midpoint.emplace(edge_key(mesh.edges()[e][0], mesh.edges()[e][1]), mid[e]);

    std::vector<Cell> cells;
    std::vector<Region> regions;
    std::vector<Cell> stack;
    for (Index ci = 0; ci < nc; ++ci) {
        const Cell& c = mesh.cell(ci);
        const Region region = mesh.region(ci);
        const int mask = split_mask(ci);
        if (mask == 0) {
            cells.push_back(c);
            regions.push_back(region);
            continue;
        }
        if (red[ci]) {
            std::array<Index, 6> m;
            for (int k = 0; k < 6; ++k) m[k] = mid[mesh.cell_edges(ci)[k]];
            red_children(vertices, c, m, region, cells, regions);
            continue;
        }
        const int faces = full_faces(mask);
        if (faces) {
            const int f = std::countr_zero(static_cast<unsigned>(faces));
            const auto& lv = kFaceVertices[f];
            const Index a = c[lv[0]], b = c[lv[1]], d = c[lv[2]], top = c[f];
            const Index mab = midpoint.at(edge_key(a, b)), mbd = midpoint.at(edge_key(b, d)),
                        mda = midpoint.at(edge_key(d, a));
            for (const Cell& kid : {Cell{top, a, mab, mda}, Cell{top, b, mbd, mab}, Cell{top, d, mda, mbd},
                                    Cell{top, mab, mbd, mda}})
                push_oriented(vertices, kid, region, cells, regions);
            continue;
        }
        // Bisect along the split edges, longest first with ties on the edge
        // key, so cells sharing a face split it the same way.
        stack.assign(1, c);
        while (!stack.empty()) {
            const Cell t = stack.back();
            stack.pop_back();
            int best = -1;
            double len = -1.0;
            std::uint64_t best_key = 0;
            for (int k = 0; k < 6; ++k) {
                const auto key = edge_key(t[kEdgeVertices[k][0]], t[kEdgeVertices[k][1]]);
                if (!midpoint.count(key)) continue;
                const double l = squared_length(vertices, t[kEdgeVertices[k][0]], t[kEdgeVertices[k][1]]);
                if (l > len || (l == len && key < best_key)) best = k, len = l, best_key = key;
            }
            if (best < 0) {
                cells.push_back(t);
                regions.push_back(region);
                continue;
            }
            const int i = kEdgeVertices[best][0], j = kEdgeVertices[best][1];
            const Index m = midpoint.at(best_key);
            Cell first = t, second = t;
            first[j] = m;
            second[i] = m;
            stack.push_back(second);
            stack.push_back(first);
        }
    }
    return SimplicialMesh::with_derived_facets(std::move(vertices), std::move(cells), std::move(regions));
}

SimplicialMesh refine_around_points(const SimplicialMesh& mesh, std::span<const Point3> points, int rounds) {
    SimplicialMesh current = mesh;
    for (int r = 0; r < rounds; ++r) {
        CellSet marked;
        for (Index c = 0; c < current.num_cells(); ++c) {
            const auto v = current.cell_points(c);
            for (const auto& p : points) {
                const auto b = barycentric(v, p);
                if (*std::min_element(b.begin(), b.end()) >= -1e-10) {
                    marked.push_back(c);
                    break;
                }
            }
        }
        current = refine_marked(current, marked);
    }
    return current;
}

}  // namespace pbe
