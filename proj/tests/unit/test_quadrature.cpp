#include <catch_amalgamated.hpp>

#include <cmath>

#include "pbe/quadrature.hpp"

using namespace pbe;
using Catch::Approx;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// int over the reference tet of x^a y^b z^c.
double tet_moment(int a, int b, int c) { return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3); }
double tri_moment(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

}  // namespace

TEST_CASE("tetrahedron rules integrate monomials up to their degree", "[quadrature]") {
    for (int requested : {1, 2, 5}) {
        const auto& q = tet_quadrature(requested);
        CHECK(q.degree >= requested);
        double wsum = 0.0;
        for (double w : q.weights) wsum += w;
        CHECK(wsum == Approx(1.0 / 6.0).epsilon(1e-14));
        for (int a = 0; a <= q.degree; ++a) {
            for (int b = 0; a + b <= q.degree; ++b) {
                for (int c = 0; a + b + c <= q.degree; ++c) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < q.points.size(); ++k) {
                        const auto& p = q.points[k];
                        s += q.weights[k] * std::pow(p[1], a) * std::pow(p[2], b) * std::pow(p[3], c);
                    }
                    INFO("degree " << q.degree << " monomial " << a << b << c);
                    CHECK(s == Approx(tet_moment(a, b, c)).epsilon(1e-13));
                }
            }
        }
    }
}

TEST_CASE("degree-5 tetrahedron rule is not exact at degree 6", "[quadrature]") {
    const auto& q = tet_quadrature(5);
    double s = 0.0;
    for (std::size_t k = 0; k < q.points.size(); ++k) s += q.weights[k] * std::pow(q.points[k][1], 6);
    CHECK(std::abs(s - tet_moment(6, 0, 0)) > 1e-10);
}

TEST_CASE("triangle rules integrate monomials up to their degree", "[quadrature]") {
    for (int requested : {1, 4}) {
        const auto& q = triangle_quadrature(requested);
        double wsum = 0.0;
        for (double w : q.weights) wsum += w;
        CHECK(wsum == Approx(0.5).epsilon(1e-14));
        for (int a = 0; a <= q.degree; ++a) {
            for (int b = 0; a + b <= q.degree; ++b) {
                double s = 0.0;
                for (std::size_t k = 0; k < q.points.size(); ++k)
                    s += q.weights[k] * std::pow(q.points[k][1], a) * std::pow(q.points[k][2], b);
                CHECK(s == Approx(tri_moment(a, b)).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("Gauss-Legendre rules are exact to degree 2n-1", "[quadrature]") {
    for (int n : {1, 2, 5, 8, 16}) {
        std::vector<double> x, w;
        gauss_legendre(n, x, w);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], k);
            const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
            CHECK(s == Approx(exact).margin(1e-14));
        }
    }
}
