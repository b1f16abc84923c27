#include <catch_amalgamated.hpp>

#include <numbers>
#include <random>
#include <sstream>

#include "mesh_oracles.hpp"
#include "pbe/errors.hpp"
#include "pbe/mesh.hpp"

using namespace pbe;
using Catch::Approx;

namespace {

bool is_set(const CellSet& s) { return std::is_sorted(s.begin(), s.end()) && std::adjacent_find(s.begin(), s.end()) == s.end(); }

}  // namespace

TEST_CASE("ball mesh places interface and outer shells exactly", "[mesh][ball]") {
    const auto mesh = build_ball_mesh(1.0, 2.0, 2, 0);
    REQUIRE(audit_mesh(mesh).empty());
    REQUIRE_FALSE(mesh.interface_facets().empty());
    for (const auto& f : mesh.interface_facets()) {
        for (Index v : mesh.facet_vertices(f)) CHECK(std::abs(norm(mesh.vertex(v)) - 1.0) <= 1e-12);
    }
    for (const auto& f : mesh.outer_facets()) {
        for (Index v : mesh.facet_vertices(f)) CHECK(std::abs(norm(mesh.vertex(v)) - 2.0) <= 2e-12);
    }
    CHECK(testing::hanging_vertices(mesh).empty());
}

TEST_CASE("ball mesh volume is below the enclosing ball", "[mesh][ball]") {
    for (int s : {0, 1, 2}) {
        const auto mesh = build_ball_mesh(1.0, 2.0, 2, s);
        const double ball = 4.0 / 3.0 * std::numbers::pi * 8.0;
        CHECK(mesh.total_volume() < ball);
        CHECK(mesh.total_volume() > 0.5 * ball);
    }
}

TEST_CASE("Born-like ball mesh tags cells inside the molecular radius", "[mesh][ball]") {
    const auto mesh = build_ball_mesh(2.0, 20.0, 3, 1);
    std::size_t molecular = 0;
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const double r = norm(mesh.cell_centroid(c));
        if (mesh.region(c) == Region::Molecular) {
            ++molecular;
            CHECK(r < 2.0);
        } else {
            CHECK(r > 2.0 * 0.8);
        }
    }
    CHECK(molecular > 0);
    CHECK(audit_mesh(mesh).empty());
}

TEST_CASE("ball mesh rejects bad parameters and degenerate cells", "[mesh][ball]") {
    CHECK_THROWS_AS(build_ball_mesh(2.0, 1.0, 2, 0), DomainError);
    CHECK_THROWS_AS(build_ball_mesh(1.0, 2.0, 1, 0), DomainError);
    BallMeshOptions opt;
    opt.min_dihedral_degrees = 80.0;
    CHECK_THROWS_AS(build_ball_mesh(opt), DegenerateElementError);
}

TEST_CASE("red refinement of the reference tetrahedron", "[mesh][uniform]") {
    const auto mesh = testing::reference_tet_mesh();
    const auto fine = refine_uniform(mesh);
    CHECK(fine.num_cells() == 8);
    CHECK(fine.num_vertices() == 10);
    CHECK(fine.total_volume() == Approx(1.0 / 6.0).epsilon(1e-12));
    for (Index c = 0; c < fine.num_cells(); ++c) CHECK(fine.cell_volume(c) == Approx(1.0 / 48.0).epsilon(1e-12));
    CHECK(fine.outer_facets().size() == 16);
}

TEST_CASE("uniform refinement multiplies cells by eight and keeps tags", "[mesh][uniform]") {
    const auto mesh = build_ball_mesh(1.0, 3.0, 2, 0);
    const auto fine = refine_uniform(mesh);
    CHECK(fine.num_cells() == 8 * mesh.num_cells());
    CHECK(fine.total_volume() == Approx(mesh.total_volume()).epsilon(1e-12));
    CHECK(fine.region_volume(Region::Molecular) == Approx(mesh.region_volume(Region::Molecular)).epsilon(1e-12));
    CHECK(fine.interface_facets().size() == 4 * mesh.interface_facets().size());
    CHECK(fine.outer_facets().size() == 4 * mesh.outer_facets().size());
    CHECK(audit_mesh(fine).empty());
    CHECK(testing::hanging_vertices(fine).empty());
}

TEST_CASE("marked refinement with nothing marked is the identity", "[mesh][bisection]") {
    const auto mesh = build_ball_mesh(1.0, 2.0, 2, 0);
    CHECK(refine_marked(mesh, {}) == mesh);
}

TEST_CASE("marking every cell shrinks every cell", "[mesh][bisection]") {
    const auto mesh = build_ball_mesh(1.0, 2.0, 2, 0);
    CellSet all(mesh.num_cells());
    std::iota(all.begin(), all.end(), Index{0});
    for (auto mode : {BisectionMode::AllEdges, BisectionMode::LongestEdge}) {
        const auto fine = refine_marked(mesh, all, {mode});
        CHECK(audit_mesh(fine).empty());
        for (Index c = 0; c < fine.num_cells(); ++c) {
            const auto loc = mesh.locate(fine.cell_centroid(c));
            REQUIRE(loc);
            CHECK(fine.cell_volume(c) < mesh.cell_volume(loc->cell));
            CHECK(fine.region(c) == mesh.region(loc->cell));
        }
    }
}

TEST_CASE("bisecting one of two tetrahedra leaves no hanging vertex", "[mesh][bisection]") {
    const auto mesh = testing::two_tet_mesh(Region::Molecular, Region::Solvent);
    for (auto mode : {BisectionMode::AllEdges, BisectionMode::LongestEdge}) {
        const auto fine = refine_marked(mesh, {0}, {mode});
        CHECK(fine.num_vertices() > mesh.num_vertices());
        CHECK(testing::hanging_vertices(fine).empty());
        CHECK(audit_mesh(fine).empty());
        CHECK(fine.region_volume(Region::Molecular) == Approx(mesh.region_volume(Region::Molecular)).epsilon(1e-12));
        // The shared face is split consistently: interface area is unchanged.
        double area = 0.0;
        for (const auto& f : fine.interface_facets()) {
            const auto t = fine.facet_vertices(f);
            area += 0.5 * norm(triangle_normal(fine.vertex(t[0]), fine.vertex(t[1]), fine.vertex(t[2])));
        }
        CHECK(area == Approx(std::sqrt(3.0) / 2.0).epsilon(1e-12));
    }
}

TEST_CASE("random marked refinement stays conforming and keeps regions", "[mesh][bisection][property]") {
    const auto base = build_ball_mesh(1.0, 2.0, 2, 0);
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 8; ++trial) {
        SimplicialMesh mesh = base;
        for (int round = 0; round < 2; ++round) {
            std::bernoulli_distribution pick(0.15);
            CellSet marked;
            for (Index c = 0; c < mesh.num_cells(); ++c)
                if (pick(rng)) marked.push_back(c);
            if (marked.empty()) marked.push_back(0);
            const auto fine = refine_marked(mesh, marked, {trial % 2 ? BisectionMode::LongestEdge : BisectionMode::AllEdges});
            CHECK(fine.num_vertices() > mesh.num_vertices());
            CHECK(audit_mesh(fine).empty());
            for (Index c = 0; c < fine.num_cells(); ++c) {
                const auto loc = mesh.locate(fine.cell_centroid(c));
                REQUIRE(loc);
                CHECK(fine.region(c) == mesh.region(loc->cell));
            }
            // New boundary vertices stay on the flat facets.
            for (const auto& f : fine.outer_facets()) {
                for (Index v : fine.facet_vertices(f)) CHECK(norm(fine.vertex(v)) <= 2.0 * (1 + 1e-12));
            }
            mesh = fine;
        }
        CHECK(testing::hanging_vertices(mesh).empty());
    }
}

TEST_CASE("interface and outer cell sets", "[mesh][sets]") {
    const auto solvent_only = testing::two_tet_mesh(Region::Solvent, Region::Solvent);
    CHECK(cells_touching_interface(solvent_only).empty());

    const auto ball = build_ball_mesh(1.0, 2.0, 2, 1);
    const auto iface = cells_touching_interface(ball);
    REQUIRE_FALSE(iface.empty());
    CHECK(is_set(iface));
    for (Index c : iface) {
        CHECK(ball.region(c) == Region::Molecular);
        const bool has = std::any_of(ball.interface_facets().begin(), ball.interface_facets().end(),
                                     [&](const Facet& f) { return f.cell == c; });
        CHECK(has);
    }

    const auto two = testing::two_tet_mesh(Region::Solvent, Region::Molecular);
    CHECK(cells_touching_interface(two) == CellSet{1});
    CHECK(cells_touching_outer_boundary(two) == CellSet{0, 1});
}

TEST_CASE("mesh file round trip is exact", "[mesh][io]") {
    auto mesh = build_ball_mesh(1.3, 4.7, 2, 1);
    CellSet marked{0, 5, 17};
    mesh = refine_marked(mesh, marked);
    std::stringstream buf;
    write_mesh(mesh, buf);
    const auto back = read_mesh(buf);
    CHECK(back == mesh);
}

TEST_CASE("mesh reader reports invariant violations and parse errors", "[mesh][io]") {
    SECTION("negative volume") {
        std::stringstream in("pbemesh 1\nvertices 4\n0 0 0\n1 0 0\n0 1 0\n0 0 1\ncells 1\n0 2 1 3 S\n"
                             "interface_facets 0\nouter_facets 4\n0 0\n0 1\n0 2\n0 3\n");
        CHECK_THROWS_AS(read_mesh(in), InvariantViolation);
    }
    SECTION("interface between same-region cells") {
        std::stringstream in("pbemesh 1\nvertices 5\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n1 1 1\ncells 2\n0 1 2 3 S\n1 2 3 4 S\n"
                             "interface_facets 1\n0 0\nouter_facets 6\n0 1\n0 2\n0 3\n1 0\n1 1\n1 2\n");
        CHECK_THROWS_AS(read_mesh(in), InvariantViolation);
    }
    SECTION("truncated file names the line") {
        std::stringstream in("pbemesh 1\nvertices 4\n0 0 0\n1 0 0\n");
        try {
            read_mesh(in);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 5);
            CHECK(std::string(e.what()).find("line 5") != std::string::npos);
        }
    }
    SECTION("bad number") {
        std::stringstream in("pbemesh 1\nvertices 1\n0 zero 0\n");
        try {
            read_mesh(in);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
    }
}

TEST_CASE("point location", "[mesh][locate]") {
    const auto mesh = build_ball_mesh(1.0, 2.0, 2, 1);
    const auto at_center = mesh.locate({0, 0, 0});
    REQUIRE(at_center);
    CHECK(mesh.region(at_center->cell) == Region::Molecular);
    const auto p = Point3{0.3, -0.2, 1.1};
    const auto loc = mesh.locate(p);
    REQUIRE(loc);
    Point3 back{};
    const auto v = mesh.cell_points(loc->cell);
    for (int k = 0; k < 4; ++k) back += v[k] * loc->bary[k];
    CHECK(norm(back - p) < 1e-12);
    CHECK_FALSE(mesh.locate({5, 0, 0}));
}
