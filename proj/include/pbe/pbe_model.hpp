#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "pbe/fem.hpp"
#include "pbe/mesh.hpp"
#include "pbe/solvers.hpp"

namespace pbe {

/// Dielectric and screening constants. All physical unit constants are
/// folded into charge_scale and kappa_sq.
struct PbeCoefficients {
    double eps_m = 1.0;
    double eps_s = 78.0;
    double kappa_sq = 0.918168;
    double charge_scale = 1.0;

    void validate() const;
    friend bool operator==(const PbeCoefficients&, const PbeCoefficients&) = default;
};

struct Charge {
    double q = 0.0;
    Point3 x;
    friend bool operator==(const Charge&, const Charge&) = default;
};
using ChargeSystem = std::vector<Charge>;

enum class Nonlinearity { Linearized, Nonlinear };

/// Coulomb potential (C_g / eps_m) sum Q_i / |p - x_i|.
double eval_singular(const PbeCoefficients& c, const ChargeSystem& charges, const Point3& p);
Point3 eval_singular_gradient(const PbeCoefficients& c, const ChargeSystem& charges, const Point3& p);
/// eps_m times the normal derivative of the Coulomb potential.
double eval_singular_flux(const PbeCoefficients& c, const ChargeSystem& charges, const Point3& p, const Point3& n);
/// Screened Coulomb boundary data C_g sum Q_i exp(-k r / sqrt(eps_s)) / (eps_s r), k = sqrt(kappa_sq).
double eval_boundary_g(const PbeCoefficients& c, const ChargeSystem& charges, const Point3& p);

/// Normalisation constant of the standard mollifier.
double mollifier_constant();
double eval_mollifier(const Point3& p);
double eval_psi(const ChargeSystem& charges, double eta, const Point3& p);

struct QoiQuadrature {
    int n_radial = 8;
    int n_theta = 8;
    int n_phi = 16;
    friend bool operator==(const QoiQuadrature&, const QoiQuadrature&) = default;
};

/// Quadrature node of the QoI functional; weight includes the charge, the
/// mollifier and the volume element.
struct QoiNode {
    Point3 x;
    double weight = 0.0;
    CellLocation at;
};

/// Spherical product quadrature of sum_i Q_i int eta^-3 rho((y - x_i)/eta) f(y) dy.
/// Weights are normalised per charge so constants integrate exactly.
std::vector<QoiNode> qoi_nodes(const SimplicialMesh& mesh, const ChargeSystem& charges, double eta,
                               const QoiQuadrature& quad = {});

/// The QoI functional applied to V_h + V_r (V_h may be null).
double qoi(const std::vector<QoiNode>& nodes, const FeField* V_h, const FeField& V_r);
double qoi(const ChargeSystem& charges, double eta, const FeField& V_h, const FeField& V_r,
           const QoiQuadrature& quad = {});

/// Discrete PBE problem on one mesh.
class PbeProblem {
public:
    PbeProblem(std::shared_ptr<const SimplicialMesh> mesh, PbeCoefficients coefficients, ChargeSystem charges,
               Nonlinearity nonlinearity, double qoi_eta = 0.005, QoiQuadrature quad = {});

    const SimplicialMesh& mesh() const { return *mesh_; }
    const std::shared_ptr<const SimplicialMesh>& mesh_ptr() const { return mesh_; }
    const PbeCoefficients& coefficients() const { return coefficients_; }
    const ChargeSystem& charges() const { return charges_; }
    Nonlinearity nonlinearity() const { return nonlinearity_; }
    double qoi_eta() const { return qoi_eta_; }
    const QoiQuadrature& qoi_quadrature() const { return quad_; }

    /// Lagrange space of degree 1 or 2 on the whole domain or the molecule.
    const SpacePtr& space(int degree, Support support) const;
    const std::vector<QoiNode>& qoi_nodes() const { return nodes_; }

    double singular(const Point3& p) const { return eval_singular(coefficients_, charges_, p); }
    double boundary_g(const Point3& p) const { return eval_boundary_g(coefficients_, charges_, p); }
    double singular_flux(const Point3& p, const Point3& n) const {
        return eval_singular_flux(coefficients_, charges_, p, n);
    }

private:
    std::shared_ptr<const SimplicialMesh> mesh_;
    PbeCoefficients coefficients_;
    ChargeSystem charges_;
    Nonlinearity nonlinearity_;
    double qoi_eta_;
    QoiQuadrature quad_;
    std::vector<QoiNode> nodes_;
    mutable SpacePtr spaces_[2][2];
};

struct SolveOptions {
    SolverConfig linear{1e-12, 1e-30, 0, Preconditioner::Jacobi};
    NewtonConfig newton;
};

struct Solution {
    FeField U_h;
    FeField U_r;
    NewtonReport newton;
    /// Largest |U^r| over the dofs; the clamp is inactive when below its bound.
    double max_abs_regular = 0.0;
    std::vector<std::string> warnings;
};

/// Harmonic component: Laplace on the molecule with -u^s on the interface.
/// `boundary_data` replaces -u^s when given.
FeField solve_harmonic(const PbeProblem& problem, int degree = 1, const SolverConfig& cfg = SolveOptions{}.linear,
                       const std::function<double(const Point3&)>& boundary_data = {},
                       std::vector<std::string>* warnings = nullptr);

/// Linearized regular operator (eps grad, grad) + (kappa_sq u, v) before boundary conditions.
SparseMatrix regular_matrix(const PbeProblem& problem, const FunctionSpace& space);

/// Regular component on the whole domain with g on the outer boundary.
FeField solve_regular(const PbeProblem& problem, const FeField& U_h, const SolveOptions& options = {},
                      NewtonReport* report = nullptr);

/// Harmonic plus regular solve in the degree-`degree` spaces.
Solution solve(const PbeProblem& problem, const SolveOptions& options = {}, int degree = 1);

double qoi(const PbeProblem& problem, const Solution& s);

/// Residual of the regular equation for a trial U^r, one entry per dof of
/// U_r's space (boundary rows included).
std::vector<double> regular_residual(const PbeProblem& problem, const FeField& U_h, const FeField& U_r,
                                     double clamp_bound = NewtonConfig{}.clamp_bound);

/// sinh and cosh with the argument clamped to [-bound, bound].
double clamped_sinh(double u, double bound);
double clamped_cosh(double u, double bound);

}  // namespace pbe
