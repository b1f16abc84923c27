#include "pbe/mesh.hpp"

#include <algorithm>
#include <sstream>

#include "pbe/errors.hpp"
#include "pbe/point_locator.hpp"

namespace pbe {

namespace {

struct FaceRecord {
    Triangle key;
    Index cell;
    int face;
};

Triangle sorted_face(const Cell& c, int f) {
    Triangle t{c[kFaceVertices[f][0]], c[kFaceVertices[f][1]], c[kFaceVertices[f][2]]};
    std::sort(t.begin(), t.end());
    return t;
}

std::vector<FaceRecord> face_table(const std::vector<Cell>& cells) {
    std::vector<FaceRecord> faces;
    faces.reserve(cells.size() * 4);
    for (Index c = 0; c < cells.size(); ++c) {
        for (int f = 0; f < 4; ++f) faces.push_back({sorted_face(cells[c], f), c, f});
    }
    std::sort(faces.begin(), faces.end(), [](const FaceRecord& a, const FaceRecord& b) {
        return a.key != b.key ? a.key < b.key : (a.cell != b.cell ? a.cell < b.cell : a.face < b.face);
    });
    return faces;
}

struct DerivedFacets {
    std::vector<Facet> interface;
    std::vector<Facet> outer;
    std::vector<std::string> problems;
};

DerivedFacets derive_facets(const std::vector<Cell>& cells, const std::vector<Region>& regions) {
    DerivedFacets out;
    const auto faces = face_table(cells);
    std::size_t i = 0;
    while (i < faces.size()) {
        std::size_t j = i + 1;
        while (j < faces.size() && faces[j].key == faces[i].key) ++j;
        const std::size_t count = j - i;
        if (count == 1) {
            out.outer.push_back({faces[i].cell, faces[i].face});
        } else if (count == 2) {
            const auto& a = faces[i];
            const auto& b = faces[i + 1];
            if (regions[a.cell] != regions[b.cell]) {
                const auto& mol = regions[a.cell] == Region::Molecular ? a : b;
                out.interface.push_back({mol.cell, mol.face});
            }
        } else {
            std::ostringstream msg;
            msg << "face (" << faces[i].key[0] << ", " << faces[i].key[1] << ", " << faces[i].key[2] << ") is shared by "
                << count << " cells";
            out.problems.push_back(msg.str());
        }
        i = j;
    }
    std::sort(out.interface.begin(), out.interface.end());
    std::sort(out.outer.begin(), out.outer.end());
    return out;
}

}  // namespace

std::array<double, 4> barycentric(const std::array<Point3, 4>& v, const Point3& p) {
    const double vol = signed_volume(v[0], v[1], v[2], v[3]);
    std::array<double, 4> b{};
    b[0] = signed_volume(p, v[1], v[2], v[3]) / vol;
    b[1] = signed_volume(v[0], p, v[2], v[3]) / vol;
    b[2] = signed_volume(v[0], v[1], p, v[3]) / vol;
    b[3] = 1.0 - b[0] - b[1] - b[2];
    return b;
}

SimplicialMesh::SimplicialMesh(std::vector<Point3> vertices, std::vector<Cell> cells, std::vector<Region> regions,
                               std::vector<Facet> interface_facets, std::vector<Facet> outer_facets)
    : vertices_(std::move(vertices)),
      cells_(std::move(cells)),
      regions_(std::move(regions)),
      interface_facets_(std::move(interface_facets)),
      outer_facets_(std::move(outer_facets)) {
    if (regions_.size() != cells_.size()) throw InvariantViolation("region tag count does not match cell count");
    for (std::size_t v = 0; v < vertices_.size(); ++v) {
        if (!is_finite(vertices_[v])) throw InvariantViolation("vertex " + std::to_string(v) + " is not finite");
    }
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        const auto& cell = cells_[c];
        for (int k = 0; k < 4; ++k) {
            if (cell[k] >= vertices_.size())
                throw InvariantViolation("cell " + std::to_string(c) + " references a missing vertex");
        }
        const double vol = cell_volume(static_cast<Index>(c));
        if (!(vol > 0.0))
            throw InvariantViolation("cell " + std::to_string(c) + " has nonpositive signed volume");
    }

    auto derived = derive_facets(cells_, regions_);
    if (!derived.problems.empty()) throw InvariantViolation("non-conforming mesh: " + derived.problems.front());

    auto check_facets = [&](std::vector<Facet>& given, const std::vector<Facet>& expected, const char* what) {
        for (const auto& f : given) {
            if (f.cell >= cells_.size() || f.face < 0 || f.face > 3)
                throw InvariantViolation(std::string(what) + " facet references a missing cell or face");
        }
        std::sort(given.begin(), given.end());
        if (std::adjacent_find(given.begin(), given.end()) != given.end())
            throw InvariantViolation(std::string("duplicate ") + what + " facet");
        for (const auto& f : given) {
            if (!std::binary_search(expected.begin(), expected.end(), f)) {
                throw InvariantViolation(std::string(what) + " facet (" + std::to_string(f.cell) + ", " +
                                         std::to_string(f.face) + ") is not a valid " + what + " face");
            }
        }
        if (given.size() != expected.size())
            throw InvariantViolation(std::string("incomplete ") + what + " facet list: expected " +
                                     std::to_string(expected.size()) + ", got " + std::to_string(given.size()));
    };
    check_facets(interface_facets_, derived.interface, "interface");
    check_facets(outer_facets_, derived.outer, "outer");

    build_topology();
}

SimplicialMesh SimplicialMesh::with_derived_facets(std::vector<Point3> vertices, std::vector<Cell> cells,
                                                   std::vector<Region> regions) {
    if (regions.size() != cells.size()) throw InvariantViolation("region tag count does not match cell count");
    auto derived = derive_facets(cells, regions);
    if (!derived.problems.empty()) throw InvariantViolation("non-conforming mesh: " + derived.problems.front());
    return SimplicialMesh(std::move(vertices), std::move(cells), std::move(regions), std::move(derived.interface),
                          std::move(derived.outer));
}

void SimplicialMesh::build_topology() {
    edges_.clear();
    edges_.reserve(cells_.size() * 6);
    for (const auto& c : cells_) {
        for (const auto& e : kEdgeVertices) {
            Edge edge{c[e[0]], c[e[1]]};
            if (edge[0] > edge[1]) std::swap(edge[0], edge[1]);
            edges_.push_back(edge);
        }
    }
    std::sort(edges_.begin(), edges_.end());
    edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
    edges_.shrink_to_fit();

    cell_edges_.resize(cells_.size());
    for (std::size_t ci = 0; ci < cells_.size(); ++ci) {
        const auto& c = cells_[ci];
        for (int k = 0; k < 6; ++k) {
            Edge edge{c[kEdgeVertices[k][0]], c[kEdgeVertices[k][1]]};
            if (edge[0] > edge[1]) std::swap(edge[0], edge[1]);
            const auto it = std::lower_bound(edges_.begin(), edges_.end(), edge);
            cell_edges_[ci][k] = static_cast<Index>(it - edges_.begin());
        }
    }
    locator_ = std::make_shared<const PointLocator>(vertices_, cells_);
}

std::array<Point3, 4> SimplicialMesh::cell_points(Index c) const {
    const auto& cell = cells_[c];
    return {vertices_[cell[0]], vertices_[cell[1]], vertices_[cell[2]], vertices_[cell[3]]};
}

Triangle SimplicialMesh::facet_vertices(const Facet& f) const {
    const auto& cell = cells_[f.cell];
    const auto& lv = kFaceVertices[f.face];
    return {cell[lv[0]], cell[lv[1]], cell[lv[2]]};
}

double SimplicialMesh::cell_volume(Index c) const {
    const auto v = cell_points(c);
    return signed_volume(v[0], v[1], v[2], v[3]);
}

Point3 SimplicialMesh::cell_centroid(Index c) const {
    const auto v = cell_points(c);
    return (v[0] + v[1] + v[2] + v[3]) * 0.25;
}

double SimplicialMesh::total_volume() const {
    double sum = 0.0;
    for (Index c = 0; c < cells_.size(); ++c) sum += cell_volume(c);
    return sum;
}

double SimplicialMesh::region_volume(Region r) const {
    double sum = 0.0;
    for (Index c = 0; c < cells_.size(); ++c) {
        if (regions_[c] == r) sum += cell_volume(c);
    }
    return sum;
}

std::vector<bool> SimplicialMesh::region_vertex_mask(Region r) const {
    std::vector<bool> mask(vertices_.size(), false);
    for (Index c = 0; c < cells_.size(); ++c) {
        if (regions_[c] != r) continue;
        for (Index v : cells_[c]) mask[v] = true;
    }
    return mask;
}

std::optional<CellLocation> SimplicialMesh::locate(const Point3& p) const {
    if (!locator_) return std::nullopt;
    return locator_->locate(vertices_, cells_, p);
}

bool operator==(const SimplicialMesh& a, const SimplicialMesh& b) {
    return a.vertices_ == b.vertices_ && a.cells_ == b.cells_ && a.regions_ == b.regions_ &&
           a.interface_facets_ == b.interface_facets_ && a.outer_facets_ == b.outer_facets_;
}

std::vector<std::string> audit_mesh(const SimplicialMesh& mesh) {
    std::vector<std::string> problems;
    auto derived = derive_facets(mesh.cells(), mesh.regions());
    problems = derived.problems;
    if (derived.outer != mesh.outer_facets()) problems.push_back("outer facets do not match single-owner faces");
    if (derived.interface != mesh.interface_facets())
        problems.push_back("interface facets do not match Molecular/Solvent faces");
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        if (!(mesh.cell_volume(c) > 0.0)) problems.push_back("cell " + std::to_string(c) + " is inverted");
    }
    for (const auto& f : mesh.interface_facets()) {
        if (mesh.region(f.cell) != Region::Molecular)
            problems.push_back("interface facet owned by a Solvent cell");
    }
    return problems;
}

CellSet cells_touching_interface(const SimplicialMesh& mesh) {
    CellSet out;
    for (const auto& f : mesh.interface_facets()) {
        if (mesh.region(f.cell) == Region::Molecular) out.push_back(f.cell);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

CellSet cells_touching_outer_boundary(const SimplicialMesh& mesh) {
    CellSet out;
    for (const auto& f : mesh.outer_facets()) out.push_back(f.cell);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

CellSet cells_in_region(const SimplicialMesh& mesh, Region region) {
    CellSet out;
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        if (mesh.region(c) == region) out.push_back(c);
    }
    return out;
}

}  // namespace pbe
