#pragma once

#include <array>
#include <vector>

namespace pbe {

/// Quadrature on the reference tetrahedron (measure 1/6). Points are given in
/// barycentric coordinates.
struct TetQuadrature {
    std::vector<std::array<double, 4>> points;
    std::vector<double> weights;
    int degree = 0;
    static constexpr double measure = 1.0 / 6.0;
};

/// Quadrature on the reference triangle (measure 1/2), barycentric points.
struct TriangleQuadrature {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights;
    int degree = 0;
    static constexpr double measure = 0.5;
};

/// Smallest built-in tetrahedron rule exact for polynomials of the given
/// degree (1, 2 or up to 5).
const TetQuadrature& tet_quadrature(int degree);

/// Smallest built-in triangle rule exact up to the given degree (1 or up to 4).
const TriangleQuadrature& triangle_quadrature(int degree);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace pbe
