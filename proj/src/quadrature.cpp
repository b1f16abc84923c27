#include "pbe/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "pbe/errors.hpp"

namespace pbe {

namespace {

TetQuadrature make_centroid() {
    TetQuadrature q;
    q.points = {{0.25, 0.25, 0.25, 0.25}};
    q.weights = {1.0 / 6.0};
    q.degree = 1;
    return q;
}

TetQuadrature make_tet4() {
    const double a = 0.5854101966249685;
    const double b = 0.1381966011250105;
    TetQuadrature q;
    q.points = {{a, b, b, b}, {b, a, b, b}, {b, b, a, b}, {b, b, b, a}};
    q.weights.assign(4, 1.0 / 24.0);
    q.degree = 2;
    return q;
}

// Keast 14-point rule (degree 5).
TetQuadrature make_tet14() {
    TetQuadrature q;
    auto add_orbit4 = [&](double a, double w) {
        const double c = 1.0 - 3.0 * a;
        q.points.push_back({c, a, a, a});
        q.points.push_back({a, c, a, a});
        q.points.push_back({a, a, c, a});
        q.points.push_back({a, a, a, c});
        q.weights.insert(q.weights.end(), 4, w);
    };
    add_orbit4(0.0927352503108912, 0.01224884051939366);
    add_orbit4(0.3108859192633006, 0.01878132095300264);
    const double b = 0.0455037041256496;
    const double c = 0.5 - b;
    q.points.push_back({b, b, c, c});
    q.points.push_back({b, c, b, c});
    q.points.push_back({b, c, c, b});
    q.points.push_back({c, b, b, c});
    q.points.push_back({c, b, c, b});
    q.points.push_back({c, c, b, b});
    q.weights.insert(q.weights.end(), 6, 0.007091003462846911);
    q.degree = 5;
    return q;
}

TriangleQuadrature make_tri1() {
    TriangleQuadrature q;
    q.points = {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
    q.weights = {0.5};
    q.degree = 1;
    return q;
}

// Strang-Fix / Dunavant 6-point rule (degree 4).
TriangleQuadrature make_tri6() {
    TriangleQuadrature q;
    const double a = 0.445948490915965, wa = 0.223381589678011;
    const double b = 0.091576213509771, wb = 0.109951743655322;
    q.points = {{1 - 2 * a, a, a}, {a, 1 - 2 * a, a}, {a, a, 1 - 2 * a},
                {1 - 2 * b, b, b}, {b, 1 - 2 * b, b}, {b, b, 1 - 2 * b}};
    q.weights = {wa / 2, wa / 2, wa / 2, wb / 2, wb / 2, wb / 2};
    q.degree = 4;
    return q;
}

}  // namespace

const TetQuadrature& tet_quadrature(int degree) {
    static const TetQuadrature q1 = make_centroid();
    static const TetQuadrature q2 = make_tet4();
    static const TetQuadrature q5 = make_tet14();
    if (degree <= 1) return q1;
    if (degree == 2) return q2;
    if (degree <= 5) return q5;
    throw DomainError("no tetrahedron quadrature of degree " + std::to_string(degree));
}

const TriangleQuadrature& triangle_quadrature(int degree) {
    static const TriangleQuadrature q1 = make_tri1();
    static const TriangleQuadrature q4 = make_tri6();
    if (degree <= 1) return q1;
    if (degree <= 4) return q4;
    throw DomainError("no triangle quadrature of degree " + std::to_string(degree));
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw DomainError("Gauss-Legendre rule needs at least one node");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

}  // namespace pbe
