#include "pbe/solvers.hpp"

#include <cmath>
#include <cstdio>

namespace pbe {

namespace {

std::string format_residual(double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", r);
    return buf;
}

class PreconditionerOp {
public:
    PreconditionerOp(const SparseMatrix& A, Preconditioner kind) : A_(A), kind_(kind), diag_(A.diagonal()) {
        if (kind_ != Preconditioner::None) {
            for (double d : diag_) {
                if (!(d > 0.0)) throw BreakdownError("nonpositive diagonal entry; matrix is not SPD");
            }
        }
    }

    void apply(const std::vector<double>& r, std::vector<double>& z) const {
        const std::size_t n = r.size();
        switch (kind_) {
        case Preconditioner::None:
            z = r;
            break;
        case Preconditioner::Jacobi:
            for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag_[i];
            break;
        case Preconditioner::SymmetricGaussSeidel: {
            const auto& off = A_.offsets();
            const auto& col = A_.columns();
            const auto& val = A_.values();
            // (D + L) y = r, then (D + U) z = D y.
            for (std::size_t i = 0; i < n; ++i) {
                double s = r[i];
                for (std::size_t k = off[i]; k < off[i + 1]; ++k)
                    if (col[k] < i) s -= val[k] * z[col[k]];
                z[i] = s / diag_[i];
            }
            for (std::size_t i = n; i-- > 0;) {
                double s = diag_[i] * z[i];
                for (std::size_t k = off[i]; k < off[i + 1]; ++k)
                    if (col[k] > i) s -= val[k] * z[col[k]];
                z[i] = s / diag_[i];
            }
            break;
        }
        }
    }

private:
    const SparseMatrix& A_;
    Preconditioner kind_;
    std::vector<double> diag_;
};

}  // namespace

std::vector<double> cg_solve(const SparseMatrix& A, const std::vector<double>& b, const SolverConfig& cfg,
                             SolveReport* report, const std::vector<double>* initial, const IterateObserver& observer) {
    const std::size_t n = b.size();
    if (A.rows() != n) throw DomainError("matrix and right-hand side sizes differ");
    std::vector<double> x = initial ? *initial : std::vector<double>(n, 0.0);
    std::vector<double> r(n), z(n), p(n), q(n);
    A.multiply(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];

    const double target = std::max(cfg.rel_tolerance * norm2(b), cfg.abs_tolerance);
    const std::size_t max_it = cfg.max_iterations ? cfg.max_iterations : std::max<std::size_t>(10 * n, 10);
    double rnorm = norm2(r);
    SolveReport rep;
    rep.initial_residual = rnorm;
    rep.residual = rnorm;
    if (rnorm <= target) {
        if (report) *report = rep;
        return x;
    }

    PreconditionerOp M(A, cfg.preconditioner);
    M.apply(r, z);
    p = z;
    double rz = dot(r, z);
    for (std::size_t it = 1; it <= max_it; ++it) {
        A.multiply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) throw BreakdownError("nonpositive curvature in CG; matrix is not SPD");
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        if (observer) observer(x);
        rnorm = norm2(r);
        rep.iterations = it;
        rep.residual = rnorm;
        if (rnorm <= target) {
            // Confirm with the true residual so drift in r cannot fake convergence.
            A.multiply(x, q);
            for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
            rnorm = norm2(r);
            rep.residual = rnorm;
            if (rnorm <= target) {
                if (report) *report = rep;
                return x;
            }
        }
        M.apply(r, z);
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (report) *report = rep;
    throw ConvergenceError("CG did not converge in " + std::to_string(max_it) + " iterations, residual " +
                               format_residual(rnorm),
                           rnorm);
}

namespace {

double free_norm(const std::vector<double>& r, const std::vector<bool>& fixed) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!fixed[i]) s += r[i] * r[i];
    return std::sqrt(s);
}

}  // namespace

std::vector<double> newton_solve(const NewtonSystem& system, std::vector<double> x, const NewtonConfig& cfg,
                                 const SolverConfig& linear, NewtonReport* report) {
    const std::size_t n = x.size();
    if (system.fixed.size() != n) throw DomainError("fixed mask size differs from the unknown count");
    NewtonReport rep;
    std::vector<double> r = system.residual(x);
    double rnorm = free_norm(r, system.fixed);
    rep.initial_residual = rep.residual = rnorm;
    rep.history.push_back(rnorm);
    const double target = std::max(cfg.rel_tolerance * rnorm, cfg.abs_tolerance);
    const std::vector<double> zeros(n, 0.0);

    for (int it = 0; rnorm > target; ++it) {
        if (it >= cfg.max_iterations) {
            if (report) *report = rep;
            throw ConvergenceError("Newton did not converge in " + std::to_string(cfg.max_iterations) +
                                       " iterations, residual " + format_residual(rnorm),
                                   rnorm);
        }
        SparseMatrix J = system.jacobian(x);
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = -r[i];
        eliminate_fixed(J, rhs, system.fixed, zeros);
        const std::vector<double> dx = cg_solve(J, rhs, linear);

        double step = cfg.damping;
        for (;;) {
            std::vector<double> trial(n);
            for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + step * dx[i];
            std::vector<double> rt = system.residual(trial);
            const double tnorm = free_norm(rt, system.fixed);
            if (tnorm < rnorm) {
                x = std::move(trial);
                r = std::move(rt);
                rnorm = tnorm;
                break;
            }
            step *= 0.5;
            if (step < cfg.min_damping) {
                if (report) *report = rep;
                throw SolverError("Newton line search failed: damping fell below " + format_residual(cfg.min_damping) +
                                  " at residual " + format_residual(rnorm));
            }
        }
        rep.iterations = it + 1;
        rep.residual = rnorm;
        rep.history.push_back(rnorm);
    }
    if (report) *report = rep;
    return x;
}

}  // namespace pbe
