#include "pbe/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace pbe {

double point_triangle_distance(const Point3& p, const Point3& a, const Point3& b, const Point3& c) {
    // Closest point by Voronoi-region classification (Ericson, RTCD 5.1.5).
    const Point3 ab = b - a;
    const Point3 ac = c - a;
    const Point3 ap = p - a;
    const double d1 = dot(ab, ap);
    const double d2 = dot(ac, ap);
    if (d1 <= 0.0 && d2 <= 0.0) return norm(ap);

    const Point3 bp = p - b;
    const double d3 = dot(ab, bp);
    const double d4 = dot(ac, bp);
    if (d3 >= 0.0 && d4 <= d3) return norm(bp);

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return norm(p - (a + v * ab));
    }

    const Point3 cp = p - c;
    const double d5 = dot(ab, cp);
    const double d6 = dot(ac, cp);
    if (d6 >= 0.0 && d5 <= d6) return norm(cp);

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return norm(p - (a + w * ac));
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return norm(p - (b + w * (c - b)));
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return norm(p - (a + ab * v + ac * w));
}

double min_dihedral_angle(const std::array<Point3, 4>& v) {
    static constexpr int opposite[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
    std::array<Point3, 4> normals;
    for (int f = 0; f < 4; ++f) {
        const auto& t = opposite[f];
        Point3 n = triangle_normal(v[t[0]], v[t[1]], v[t[2]]);
        if (dot(n, v[f] - v[t[0]]) > 0.0) n = -1.0 * n;
        normals[f] = n * (1.0 / norm(n));
    }
    double best = std::numbers::pi;
    for (int a = 0; a < 4; ++a) {
        for (int b = a + 1; b < 4; ++b) {
            const double cosine = std::clamp(dot(normals[a], normals[b]), -1.0, 1.0);
            best = std::min(best, std::numbers::pi - std::acos(cosine));
        }
    }
    return best;
}

}  // namespace pbe
