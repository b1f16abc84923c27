#pragma once

// Polynomials in the barycentric coordinates of one tetrahedron, integrated
// exactly with the closed-form moments  int l^a = a0! a1! a2! a3! 3! V / (|a| + 3)!.

#include <array>
#include <map>

#include "pbe/mesh.hpp"

namespace pbe::testing {

class BaryPoly {
public:
    using Exponent = std::array<int, 4>;

    BaryPoly() = default;
    explicit BaryPoly(double c) { if (c != 0.0) terms_[{0, 0, 0, 0}] = c; }
    static BaryPoly coordinate(int i) {
        BaryPoly p;
        Exponent e{0, 0, 0, 0};
        e[i] = 1;
        p.terms_[e] = 1.0;
        return p;
    }

    BaryPoly operator+(const BaryPoly& o) const {
        BaryPoly r = *this;
        for (const auto& [e, c] : o.terms_) r.terms_[e] += c;
        return r;
    }
    BaryPoly operator*(double s) const {
        BaryPoly r = *this;
        for (auto& [e, c] : r.terms_) c *= s;
        return r;
    }
    BaryPoly operator*(const BaryPoly& o) const {
        BaryPoly r;
        for (const auto& [ea, ca] : terms_) {
            for (const auto& [eb, cb] : o.terms_) {
                Exponent e{ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]};
                r.terms_[e] += ca * cb;
            }
        }
        return r;
    }

    double integrate(double volume) const {
        double s = 0.0;
        for (const auto& [e, c] : terms_) {
            const int total = e[0] + e[1] + e[2] + e[3];
            s += c * factorial(e[0]) * factorial(e[1]) * factorial(e[2]) * factorial(e[3]) * 6.0 / factorial(total + 3);
        }
        return s * volume;
    }

private:
    static double factorial(int n) {
        double f = 1.0;
        for (int k = 2; k <= n; ++k) f *= k;
        return f;
    }
    std::map<Exponent, double> terms_;
};

/// Lagrange basis function `local` of the given degree as a BaryPoly.
inline BaryPoly lagrange_basis(int degree, int local) {
    if (degree == 1) return BaryPoly::coordinate(local);
    if (local < 4) {
        const auto l = BaryPoly::coordinate(local);
        return l * (l * 2.0 + BaryPoly(-1.0));
    }
    const auto& e = kEdgeVertices[local - 4];
    return BaryPoly::coordinate(e[0]) * BaryPoly::coordinate(e[1]) * 4.0;
}

}  // namespace pbe::testing
