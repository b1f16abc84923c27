#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pbe/geometry.hpp"

namespace pbe {

using Index = std::uint32_t;
inline constexpr Index kNoIndex = std::numeric_limits<Index>::max();

enum class Region : std::uint8_t { Molecular, Solvent };

using Cell = std::array<Index, 4>;
using Edge = std::array<Index, 2>;
using Triangle = std::array<Index, 3>;

/// Sorted, duplicate-free list of cell indices.
using CellSet = std::vector<Index>;

/// A triangular face of the mesh identified by its owning cell and the local
/// index of the opposite vertex.
struct Facet {
    Index cell = 0;
    int face = 0;

    friend auto operator<=>(const Facet&, const Facet&) = default;
};

/// Local face f of a tetrahedron omits vertex f.
inline constexpr std::array<std::array<int, 3>, 4> kFaceVertices{{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};
inline constexpr std::array<std::array<int, 2>, 6> kEdgeVertices{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

class PointLocator;

/// Barycentric location of a point inside a mesh cell.
struct CellLocation {
    Index cell = kNoIndex;
    std::array<double, 4> bary{};
};

/// Conforming tetrahedral mesh of a nested domain: a Molecular region enclosed
/// by the interface facets and a Solvent region bounded by the outer facets.
///
/// Construction validates every structural invariant and throws
/// InvariantViolation on failure, so a SimplicialMesh value is always valid.
/// Instances are immutable.
class SimplicialMesh {
public:
    SimplicialMesh(std::vector<Point3> vertices, std::vector<Cell> cells, std::vector<Region> regions,
                   std::vector<Facet> interface_facets, std::vector<Facet> outer_facets);

    /// Builds a mesh whose interface facets (faces between a Molecular and a
    /// Solvent cell, stored on the Molecular side) and outer facets (faces
    /// owned by a single cell) are derived from the connectivity.
    static SimplicialMesh with_derived_facets(std::vector<Point3> vertices, std::vector<Cell> cells,
                                              std::vector<Region> regions);

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_cells() const { return cells_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    const std::vector<Point3>& vertices() const { return vertices_; }
    const std::vector<Cell>& cells() const { return cells_; }
    const std::vector<Region>& regions() const { return regions_; }
    const std::vector<Facet>& interface_facets() const { return interface_facets_; }
    const std::vector<Facet>& outer_facets() const { return outer_facets_; }
    const std::vector<Edge>& edges() const { return edges_; }

    const Point3& vertex(Index v) const { return vertices_[v]; }
    const Cell& cell(Index c) const { return cells_[c]; }
    Region region(Index c) const { return regions_[c]; }
    const std::array<Index, 6>& cell_edges(Index c) const { return cell_edges_[c]; }

    std::array<Point3, 4> cell_points(Index c) const;
    Triangle facet_vertices(const Facet& f) const;
    double cell_volume(Index c) const;
    Point3 cell_centroid(Index c) const;
    double total_volume() const;
    double region_volume(Region r) const;

    /// Vertices touched by at least one cell of the region.
    std::vector<bool> region_vertex_mask(Region r) const;

    /// Cell containing p (nearest match within a small tolerance), if any.
    std::optional<CellLocation> locate(const Point3& p) const;

    friend bool operator==(const SimplicialMesh& a, const SimplicialMesh& b);

private:
    SimplicialMesh() = default;
    void build_topology();

    std::vector<Point3> vertices_;
    std::vector<Cell> cells_;
    std::vector<Region> regions_;
    std::vector<Facet> interface_facets_;
    std::vector<Facet> outer_facets_;

    std::vector<Edge> edges_;
    std::vector<std::array<Index, 6>> cell_edges_;
    std::shared_ptr<const PointLocator> locator_;
};

/// Barycentric coordinates of p with respect to the tetrahedron v.
std::array<double, 4> barycentric(const std::array<Point3, 4>& v, const Point3& p);

// ---------------------------------------------------------------------------
// Construction

struct BallMeshOptions {
    double molecular_radius = 2.0;
    double outer_radius = 20.0;
    /// Radial layers inside the molecular ball (the innermost is a cone layer).
    int molecular_layers = 2;
    /// Radial layers in the solvent shell; 0 picks a geometric grading that
    /// keeps cells close to isotropic.
    int solvent_layers = 0;
    int surface_subdivisions = 1;
    double min_dihedral_degrees = 3.0;
    friend bool operator==(const BallMeshOptions&, const BallMeshOptions&) = default;
};

/// Layered icosphere ball mesh with a vertex shell exactly at the molecular
/// radius (the interface) and one exactly at the outer radius.
SimplicialMesh build_ball_mesh(const BallMeshOptions& options);
SimplicialMesh build_ball_mesh(double molecular_radius, double outer_radius, int layers, int surface_subdivisions);

// ---------------------------------------------------------------------------
// Refinement

/// Red (1 -> 8) refinement of every cell.
SimplicialMesh refine_uniform(const SimplicialMesh& mesh);

enum class BisectionMode {
    /// Every edge of a marked cell is bisected (local halving of h).
    AllEdges,
    /// Only the longest edge of each marked cell is bisected.
    LongestEdge,
};

struct BisectionOptions {
    BisectionMode mode = BisectionMode::AllEdges;
    /// Upper bound on bisection sweeps before closure is declared divergent.
    int max_sweeps = 256;
    friend bool operator==(const BisectionOptions&, const BisectionOptions&) = default;
};

/// Local refinement of the marked cells with a conforming closure.
///
/// AllEdges red-refines every marked cell. LongestEdge splits only the
/// longest edge of each marked cell. Neighbours are closed without
/// propagation: one fully split face gives a four-child split, at most two
/// split edges per face gives bisection along those edges, anything else is
/// red-refined. New vertices are edge midpoints, so flat facets stay flat.
SimplicialMesh refine_marked(const SimplicialMesh& mesh, const CellSet& marked, const BisectionOptions& options = {});

/// Refines the cells containing any of the points `rounds` times.
SimplicialMesh refine_around_points(const SimplicialMesh& mesh, std::span<const Point3> points, int rounds);

/// Molecular cells with at least one face on the interface.
CellSet cells_touching_interface(const SimplicialMesh& mesh);
/// Cells with at least one face on the outer boundary.
CellSet cells_touching_outer_boundary(const SimplicialMesh& mesh);
/// All cells of the given region.
CellSet cells_in_region(const SimplicialMesh& mesh, Region region);

// ---------------------------------------------------------------------------
// I/O

void write_mesh(const SimplicialMesh& mesh, std::ostream& out);
SimplicialMesh read_mesh(std::istream& in);

void write_mesh_file(const SimplicialMesh& mesh, const std::string& path);
SimplicialMesh read_mesh_file(const std::string& path);

// ---------------------------------------------------------------------------
// Diagnostics

/// Combinatorial audit: every face is shared by at most two cells, boundary
/// faces match the outer facets and region-changing faces match the interface
/// facets. Returns human readable problems; empty when the mesh is sound.
std::vector<std::string> audit_mesh(const SimplicialMesh& mesh);

}  // namespace pbe
