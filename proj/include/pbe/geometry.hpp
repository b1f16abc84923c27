#pragma once

#include <array>
#include <cmath>

namespace pbe {

/// Cartesian point (or vector) in Angstrom.
struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Point3& operator+=(const Point3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr Point3& operator-=(const Point3& o) {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    constexpr Point3& operator*=(double s) {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }
    friend constexpr Point3 operator+(Point3 a, const Point3& b) { return a += b; }
    friend constexpr Point3 operator-(Point3 a, const Point3& b) { return a -= b; }
    friend constexpr Point3 operator*(Point3 a, double s) { return a *= s; }
    friend constexpr Point3 operator*(double s, Point3 a) { return a *= s; }
    friend constexpr bool operator==(const Point3&, const Point3&) = default;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

constexpr double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Point3 cross(const Point3& a, const Point3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Point3& a) { return std::sqrt(dot(a, a)); }

inline bool is_finite(const Point3& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

/// Signed volume of the tetrahedron (a, b, c, d); positive for right-handed order.
inline double signed_volume(const Point3& a, const Point3& b, const Point3& c, const Point3& d) {
    return dot(b - a, cross(c - a, d - a)) / 6.0;
}

inline Point3 triangle_normal(const Point3& a, const Point3& b, const Point3& c) {
    return cross(b - a, c - a);
}

/// Euclidean distance from p to the closed triangle (a, b, c).
double point_triangle_distance(const Point3& p, const Point3& a, const Point3& b, const Point3& c);

/// Smallest of the six dihedral angles of a tetrahedron, in radians.
double min_dihedral_angle(const std::array<Point3, 4>& v);

}  // namespace pbe
