#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "pbe/errors.hpp"
#include "pbe/mesh.hpp"

namespace pbe {

namespace {

struct Icosphere {
    std::vector<Point3> points;  // unit vectors
    std::vector<Triangle> triangles;
};

Icosphere make_icosphere(int subdivisions) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    Icosphere s;
    s.points = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& p : s.points) p = p * (1.0 / norm(p));
    s.triangles = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                   {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                   {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    for (int level = 0; level < subdivisions; ++level) {
        std::map<Edge, Index> midpoint;
        auto mid = [&](Index a, Index b) {
            const Edge key{std::min(a, b), std::max(a, b)};
            auto [it, inserted] = midpoint.try_emplace(key, static_cast<Index>(s.points.size()));
            if (inserted) {
                Point3 m = (s.points[a] + s.points[b]) * 0.5;
                s.points.push_back(m * (1.0 / norm(m)));
            }
            return it->second;
        };
        std::vector<Triangle> next;
        next.reserve(s.triangles.size() * 4);
        for (const auto& tri : s.triangles) {
            const Index ab = mid(tri[0], tri[1]);
            const Index bc = mid(tri[1], tri[2]);
            const Index ca = mid(tri[2], tri[0]);
            next.push_back({tri[0], ab, ca});
            next.push_back({tri[1], bc, ab});
            next.push_back({tri[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        s.triangles = std::move(next);
    }
    return s;
}

double mean_edge_length(const Icosphere& s) {
    double sum = 0.0;
    for (const auto& t : s.triangles) {
        sum += norm(s.points[t[0]] - s.points[t[1]]) + norm(s.points[t[1]] - s.points[t[2]]) +
               norm(s.points[t[2]] - s.points[t[0]]);
    }
    return sum / (3.0 * static_cast<double>(s.triangles.size()));
}

void orient_positive(const std::vector<Point3>& vertices, Cell& c) {
    if (signed_volume(vertices[c[0]], vertices[c[1]], vertices[c[2]], vertices[c[3]]) < 0.0) std::swap(c[2], c[3]);
}

}  // namespace

SimplicialMesh build_ball_mesh(const BallMeshOptions& opt) {
    if (!(opt.molecular_radius > 0.0) || !(opt.outer_radius > opt.molecular_radius))
        throw DomainError("ball mesh requires 0 < molecular_radius < outer_radius");
    if (opt.molecular_layers < 2) throw DomainError("ball mesh requires at least 2 molecular layers");
    if (opt.solvent_layers < 0) throw DomainError("solvent_layers must be nonnegative");
    if (opt.surface_subdivisions < 0) throw DomainError("surface_subdivisions must be nonnegative");

    const Icosphere sphere = make_icosphere(opt.surface_subdivisions);

    std::vector<double> radii;
    for (int j = 1; j < opt.molecular_layers; ++j)
        radii.push_back(opt.molecular_radius * static_cast<double>(j) / opt.molecular_layers);
    radii.push_back(opt.molecular_radius);
    const std::size_t interface_shell = radii.size() - 1;

    int solvent_layers = opt.solvent_layers;
    const double ratio = opt.outer_radius / opt.molecular_radius;
    if (solvent_layers == 0) {
        const double growth = 1.0 + mean_edge_length(sphere);
        solvent_layers = std::max(1, static_cast<int>(std::ceil(std::log(ratio) / std::log(growth))));
    }
    for (int j = 1; j < solvent_layers; ++j)
        radii.push_back(opt.molecular_radius * std::pow(ratio, static_cast<double>(j) / solvent_layers));
    radii.push_back(opt.outer_radius);

    const Index per_shell = static_cast<Index>(sphere.points.size());
    std::vector<Point3> vertices;
    vertices.reserve(1 + per_shell * radii.size());
    vertices.push_back({0.0, 0.0, 0.0});
    for (double r : radii) {
        for (const auto& u : sphere.points) vertices.push_back(u * r);
    }
    auto shell_vertex = [&](std::size_t shell, Index local) { return static_cast<Index>(1 + shell * per_shell + local); };

    std::vector<Cell> cells;
    std::vector<Region> regions;
    cells.reserve(sphere.triangles.size() * (1 + 3 * (radii.size() - 1)));

    for (const auto& tri : sphere.triangles) {
        Cell c{0, shell_vertex(0, tri[0]), shell_vertex(0, tri[1]), shell_vertex(0, tri[2])};
        orient_positive(vertices, c);
        cells.push_back(c);
        regions.push_back(Region::Molecular);
    }
    for (std::size_t shell = 0; shell + 1 < radii.size(); ++shell) {
        const Region region = shell + 1 <= interface_shell ? Region::Molecular : Region::Solvent;
        for (const auto& tri : sphere.triangles) {
            // Sorting by index makes every quadrilateral side split along the
            // same diagonal from both neighbouring prisms.
            Triangle s = tri;
            std::sort(s.begin(), s.end());
            const Index a = shell_vertex(shell, s[0]), b = shell_vertex(shell, s[1]), c = shell_vertex(shell, s[2]);
            const Index a2 = shell_vertex(shell + 1, s[0]), b2 = shell_vertex(shell + 1, s[1]),
                        c2 = shell_vertex(shell + 1, s[2]);
            for (Cell t : {Cell{a, b, c, a2}, Cell{b, c, a2, b2}, Cell{c, a2, b2, c2}}) {
                orient_positive(vertices, t);
                cells.push_back(t);
                regions.push_back(region);
            }
        }
    }

    const double floor = opt.min_dihedral_degrees * std::numbers::pi / 180.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        const std::array<Point3, 4> v{vertices[cell[0]], vertices[cell[1]], vertices[cell[2]], vertices[cell[3]]};
        const double angle = min_dihedral_angle(v);
        if (angle < floor) {
            throw DegenerateElementError("generated cell " + std::to_string(c) + " has minimum dihedral angle " +
                                         std::to_string(angle * 180.0 / std::numbers::pi) + " degrees");
        }
    }
    return SimplicialMesh::with_derived_facets(std::move(vertices), std::move(cells), std::move(regions));
}

SimplicialMesh build_ball_mesh(double molecular_radius, double outer_radius, int layers, int surface_subdivisions) {
    BallMeshOptions opt;
    opt.molecular_radius = molecular_radius;
    opt.outer_radius = outer_radius;
    opt.molecular_layers = layers;
    opt.surface_subdivisions = surface_subdivisions;
    return build_ball_mesh(opt);
}

}  // namespace pbe
