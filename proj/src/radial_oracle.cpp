#include "pbe/radial_oracle.hpp"

#include <cmath>

#include "pbe/errors.hpp"

namespace pbe {

namespace {

/// Solves a tridiagonal system in place (Thomas algorithm); a is the sub-,
/// b the main and c the super-diagonal.
std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                                      std::vector<double> d) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    return x;
}

}  // namespace

RadialSolution solve_radial(double R, double Ro, const PbeCoefficients& coeffs, double q, int nodes,
                            Nonlinearity nonlinearity, double clamp_bound) {
    coeffs.validate();
    if (nodes < 16) throw DomainError("radial grid too coarse (need at least 16 intervals)");
    if (!(R > 0.0) || !(Ro > R)) throw DomainError("radial oracle requires 0 < R_m < R_outer");

    const int n_m = std::max(2, static_cast<int>(std::lround(nodes * R / Ro)));
    const int n_s = std::max(2, nodes - n_m);
    const int n = n_m + n_s;
    RadialSolution out;
    out.radii.resize(n + 1);
    for (int i = 0; i <= n_m; ++i) out.radii[i] = R * i / n_m;
    for (int i = 1; i <= n_s; ++i) out.radii[n_m + i] = R + (Ro - R) * i / n_s;
    out.radii[n_m] = R;
    out.radii[n] = Ro;
    const auto& r = out.radii;

    // Face conductances eps r^2 / h and control volume measures (per 4 pi).
    std::vector<double> cond(n), vol_s(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        const double mid = 0.5 * (r[i] + r[i + 1]);
        const double eps = i < n_m ? coeffs.eps_m : coeffs.eps_s;
        cond[i] = eps * mid * mid / (r[i + 1] - r[i]);
    }
    for (int i = 0; i <= n; ++i) {
        const double lo = i > 0 ? 0.5 * (r[i - 1] + r[i]) : 0.0;
        const double hi = i < n ? 0.5 * (r[i] + r[i + 1]) : Ro;
        const double a = std::max(lo, R);
        if (hi > a) vol_s[i] = (hi * hi * hi - a * a * a) / 3.0;
    }
    const double Cq = coeffs.charge_scale * q;
    const double k = std::sqrt(coeffs.kappa_sq / coeffs.eps_s);
    const double g = Cq * std::exp(-k * Ro) / (coeffs.eps_s * Ro);

    const bool nonlinear = nonlinearity == Nonlinearity::Nonlinear;
    auto N = [&](double u) { return nonlinear ? std::sinh(std::clamp(u, -clamp_bound, clamp_bound)) : u; };
    auto dN = [&](double u) { return nonlinear ? std::cosh(std::clamp(u, -clamp_bound, clamp_bound)) : 1.0; };

    std::vector<double> u(n + 1, 0.0);
    u[n] = g;
    auto residual = [&](const std::vector<double>& v) {
        std::vector<double> res(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double s = coeffs.kappa_sq * vol_s[i] * N(v[i]);
            if (i > 0) s += cond[i - 1] * (v[i] - v[i - 1]);
            s += cond[i] * (v[i] - v[i + 1]);
            if (i == n_m) s -= Cq;
            res[i] = s;
        }
        return res;
    };
    auto rnorm = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };

    std::vector<double> res = residual(u);
    double current = rnorm(res);
    const double target = 1e-13 * std::max(1.0, std::abs(Cq));
    int it = 0;
    bool stalled = false;
    while (current > target && !stalled) {
        if (++it > 100) throw SolverError("radial Newton did not converge");
        std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n);
        for (int i = 0; i < n; ++i) {
            b[i] = coeffs.kappa_sq * vol_s[i] * dN(u[i]) + cond[i] + (i > 0 ? cond[i - 1] : 0.0);
            if (i > 0) a[i] = -cond[i - 1];
            if (i + 1 < n) c[i] = -cond[i];
            d[i] = -res[i];
        }
        const auto du = solve_tridiagonal(a, b, c, d);
        if (!nonlinear) {
            for (int i = 0; i < n; ++i) u[i] += du[i];
            break;
        }
        double step = 1.0;
        for (;;) {
            std::vector<double> trial = u;
            for (int i = 0; i < n; ++i) trial[i] += step * du[i];
            auto tr = residual(trial);
            const double tn = rnorm(tr);
            if (tn < current) {
                u = std::move(trial);
                res = std::move(tr);
                current = tn;
                break;
            }
            step *= 0.5;
            if (step < 1.0 / (1 << 20)) {
                // Stagnation at roundoff level counts as converged.
                if (current > 1e-9 * std::max(1.0, std::abs(Cq))) throw SolverError("radial Newton line search failed");
                stalled = true;
                break;
            }
        }
    }
    out.regular = std::move(u);
    out.harmonic = -Cq / (coeffs.eps_m * R);
    out.qoi = q * (out.harmonic + out.regular[0]);
    out.newton_iterations = it;
    return out;
}

double born_linear_closed_form(double R, const PbeCoefficients& coeffs, double q, double Ro) {
    coeffs.validate();
    const double Cq = coeffs.charge_scale * q;
    const double k = std::sqrt(coeffs.kappa_sq / coeffs.eps_s);
    const double g = Cq * std::exp(-k * Ro) / (coeffs.eps_s * Ro);
    if (k == 0.0) {
        // u = B / r + C in the solvent.
        const double B = Cq / coeffs.eps_s;
        const double A = B / R + (g - B / Ro);
        return q * (A - Cq / (coeffs.eps_m * R));
    }
    // u = (B e^{-kr} + C e^{kr}) / r in the solvent; u(Ro) = g, eps_s u'(R) = -Cq / R^2.
    const double f1 = std::exp(-k * Ro) / Ro, f2 = std::exp(k * Ro) / Ro;
    const double d1 = coeffs.eps_s * (-k * R - 1.0) * std::exp(-k * R) / (R * R);
    const double d2 = coeffs.eps_s * (k * R - 1.0) * std::exp(k * R) / (R * R);
    const double rhs2 = -Cq / (R * R);
    const double det = f1 * d2 - f2 * d1;
    const double B = (g * d2 - f2 * rhs2) / det;
    const double C = (f1 * rhs2 - d1 * g) / det;
    const double A = (B * std::exp(-k * R) + C * std::exp(k * R)) / R;
    return q * (A - Cq / (coeffs.eps_m * R));
}

double born_energy(double R, const PbeCoefficients& coeffs, double q) {
    return q * q * coeffs.charge_scale * (1.0 / coeffs.eps_s - 1.0 / coeffs.eps_m) / R;
}

}  // namespace pbe
