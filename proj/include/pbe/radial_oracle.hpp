#pragma once

#include <vector>

#include "pbe/pbe_model.hpp"

namespace pbe {

/// Spherically symmetric Born-ion solution on a radial grid.
struct RadialSolution {
    /// Node radii from 0 to the outer radius, with a node at the molecular radius.
    std::vector<double> radii;
    /// u^r at the nodes.
    std::vector<double> regular;
    /// The harmonic component, constant in the molecule.
    double harmonic = 0.0;
    /// q (u^h + u^r)(0).
    double qoi = 0.0;
    int newton_iterations = 0;
};

/// Conservative finite volumes on a piecewise uniform radial grid with
/// `nodes` intervals, Newton for the sinh nonlinearity.
RadialSolution solve_radial(double molecular_radius, double outer_radius, const PbeCoefficients& coeffs, double q,
                            int nodes, Nonlinearity nonlinearity, double clamp_bound = NewtonConfig{}.clamp_bound);

/// Closed-form QoI of the linearized Born ion on the truncated ball with
/// screened-Coulomb Dirichlet data at the outer radius.
double born_linear_closed_form(double molecular_radius, const PbeCoefficients& coeffs, double q, double outer_radius);

/// Classical Born reaction energy q^2 C_g (1/eps_s - 1/eps_m) / R.
double born_energy(double molecular_radius, const PbeCoefficients& coeffs, double q);

}  // namespace pbe
