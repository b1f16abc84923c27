#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "pbe/errors.hpp"
#include "pbe/sparse.hpp"

namespace pbe {

enum class Preconditioner { None, Jacobi, SymmetricGaussSeidel };

struct SolverConfig {
    double rel_tolerance = 1e-10;
    double abs_tolerance = 1e-14;
    /// 0 means 10 x the number of unknowns.
    std::size_t max_iterations = 0;
    Preconditioner preconditioner = Preconditioner::Jacobi;
    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

struct SolveReport {
    std::size_t iterations = 0;
    double initial_residual = 0.0;
    double residual = 0.0;
};

/// CG did not reach the tolerance.
class ConvergenceError : public SolverError {
public:
    ConvergenceError(const std::string& what, double residual) : SolverError(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Nonpositive curvature met in CG: the matrix is not SPD.
class BreakdownError : public SolverError {
public:
    using SolverError::SolverError;
};

/// Called after every CG iteration with the current iterate.
using IterateObserver = std::function<void(const std::vector<double>&)>;

/// Preconditioned conjugate gradients for an SPD matrix. Stops when
/// ||b - Ax|| <= max(rel_tolerance ||b||, abs_tolerance).
std::vector<double> cg_solve(const SparseMatrix& A, const std::vector<double>& b, const SolverConfig& cfg = {},
                             SolveReport* report = nullptr, const std::vector<double>* initial = nullptr,
                             const IterateObserver& observer = {});

struct NewtonConfig {
    double rel_tolerance = 1e-9;
    double abs_tolerance = 1e-14;
    int max_iterations = 50;
    /// First trial step length; halved on backtracking.
    double damping = 1.0;
    /// Arguments of sinh and cosh are clamped to [-clamp_bound, clamp_bound].
    double clamp_bound = 40.0;
    double min_damping = 1.0 / (1 << 20);
    friend bool operator==(const NewtonConfig&, const NewtonConfig&) = default;
};

struct NewtonReport {
    int iterations = 0;
    double initial_residual = 0.0;
    double residual = 0.0;
    std::vector<double> history;
};

/// Nonlinear system R(x) = 0 where the unknowns flagged in `fixed` are held at
/// their initial values.
struct NewtonSystem {
    std::function<std::vector<double>(const std::vector<double>&)> residual;
    std::function<SparseMatrix(const std::vector<double>&)> jacobian;
    std::vector<bool> fixed;
};

/// Damped Newton with backtracking; every accepted step strictly decreases
/// the free-dof residual norm.
std::vector<double> newton_solve(const NewtonSystem& system, std::vector<double> x, const NewtonConfig& cfg,
                                 const SolverConfig& linear = {}, NewtonReport* report = nullptr);

}  // namespace pbe
