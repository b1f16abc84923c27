#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "pbe/solvers.hpp"

using namespace pbe;
using Catch::Approx;

namespace {

SparseMatrix from_dense(const Eigen::MatrixXd& D) {
    const auto n = static_cast<std::size_t>(D.rows());
    std::vector<std::vector<std::uint32_t>> rows(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (D(i, j) != 0.0 || i == j) rows[i].push_back(static_cast<std::uint32_t>(j));
    SparseMatrix A(rows);
    for (std::size_t i = 0; i < n; ++i)
        for (auto j : rows[i]) A.add(static_cast<std::uint32_t>(i), j, D(i, j));
    return A;
}

Eigen::MatrixXd random_spd(int n, std::mt19937& rng) {
    std::normal_distribution<double> n01;
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = n01(rng);
    return B.transpose() * B + Eigen::MatrixXd::Identity(n, n);
}

// 1D Laplacian with a mass shift, tridiagonal.
SparseMatrix tridiagonal(std::size_t n, double shift) {
    std::vector<std::vector<std::uint32_t>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) rows[i].push_back(static_cast<std::uint32_t>(i - 1));
        rows[i].push_back(static_cast<std::uint32_t>(i));
        if (i + 1 < n) rows[i].push_back(static_cast<std::uint32_t>(i + 1));
    }
    SparseMatrix A(rows);
    for (std::uint32_t i = 0; i < n; ++i) {
        A.add(i, i, 2.0 + shift);
        if (i > 0) A.add(i, i - 1, -1.0);
        if (i + 1 < n) A.add(i, i + 1, -1.0);
    }
    return A;
}

}  // namespace

TEST_CASE("CG on the identity converges in one iteration", "[solvers][cg]") {
    const SparseMatrix I = from_dense(Eigen::MatrixXd::Identity(5, 5));
    const std::vector<double> b{1, -2, 3, 0.5, 7};
    SolveReport rep;
    const auto x = cg_solve(I, b, {1e-12, 1e-30, 0, Preconditioner::None}, &rep);
    CHECK(rep.iterations == 1);
    for (int i = 0; i < 5; ++i) CHECK(x[i] == Approx(b[i]));
}

TEST_CASE("CG on a hand-checkable 2x2 system", "[solvers][cg]") {
    Eigen::MatrixXd D(2, 2);
    D << 2, 1, 1, 2;
    const auto x = cg_solve(from_dense(D), {3, 3});
    CHECK(x[0] == Approx(1.0));
    CHECK(x[1] == Approx(1.0));
}

TEST_CASE("CG matches a dense factorization on random SPD systems", "[solvers][cg][property]") {
    std::mt19937 rng(2024);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd D = random_spd(20, rng);
        Eigen::VectorXd b(20);
        for (int i = 0; i < 20; ++i) b(i) = n01(rng);
        const Eigen::VectorXd exact = D.llt().solve(b);
        const SparseMatrix A = from_dense(D);
        const std::vector<double> bv(b.data(), b.data() + 20);
        for (auto pc : {Preconditioner::None, Preconditioner::Jacobi, Preconditioner::SymmetricGaussSeidel}) {
            const auto x = cg_solve(A, bv, {1e-14, 1e-30, 0, pc});
            for (int i = 0; i < 20; ++i) CHECK(x[i] == Approx(exact(i)).margin(1e-8));
        }
    }
}

TEST_CASE("CG error decreases monotonically in the energy norm", "[solvers][cg][property]") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd D = random_spd(20, rng);
        Eigen::VectorXd b = Eigen::VectorXd::Ones(20);
        const Eigen::VectorXd exact = D.llt().solve(b);
        std::vector<double> energies;
        auto observe = [&](const std::vector<double>& x) {
            Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(x.data(), 20) - exact;
            energies.push_back(e.dot(D * e));
        };
        for (auto pc : {Preconditioner::None, Preconditioner::Jacobi, Preconditioner::SymmetricGaussSeidel}) {
            energies.clear();
            cg_solve(from_dense(D), std::vector<double>(20, 1.0), {1e-14, 1e-30, 0, pc}, nullptr, nullptr, observe);
            REQUIRE(energies.size() >= 2);
            for (std::size_t k = 1; k < energies.size(); ++k) CHECK(energies[k] <= energies[k - 1] * (1 + 1e-10) + 1e-24);
        }
    }
}

TEST_CASE("CG reports breakdown and non-convergence", "[solvers][cg]") {
    Eigen::MatrixXd D(2, 2);
    D << 1, 2, 2, 1;  // indefinite
    CHECK_THROWS_AS(cg_solve(from_dense(D), {1, -1}, {1e-12, 1e-30, 0, Preconditioner::None}), BreakdownError);

    const auto A = tridiagonal(200, 0.0);
    try {
        cg_solve(A, std::vector<double>(200, 1.0), {1e-12, 1e-30, 3, Preconditioner::None});
        FAIL("expected non-convergence");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual() > 0.0);
        CHECK(e.category() == "solver");
    }
}

TEST_CASE("SGS preconditioning needs fewer iterations than none", "[solvers][cg]") {
    const auto A = tridiagonal(400, 0.01);
    const std::vector<double> b(400, 1.0);
    SolveReport plain, sgs;
    cg_solve(A, b, {1e-10, 1e-30, 0, Preconditioner::None}, &plain);
    cg_solve(A, b, {1e-10, 1e-30, 0, Preconditioner::SymmetricGaussSeidel}, &sgs);
    CHECK(sgs.iterations < plain.iterations);
}

TEST_CASE("Newton on a linear residual takes one step", "[solvers][newton]") {
    const auto A = tridiagonal(50, 0.5);
    const std::vector<double> f(50, 1.0);
    NewtonSystem sys;
    sys.residual = [&](const std::vector<double>& x) {
        auto r = A * x;
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= f[i];
        return r;
    };
    sys.jacobian = [&](const std::vector<double>&) { return A; };
    sys.fixed.assign(50, false);
    NewtonReport rep;
    const auto x = newton_solve(sys, std::vector<double>(50, 0.0), {}, {1e-14, 1e-30, 0, Preconditioner::Jacobi}, &rep);
    CHECK(rep.iterations == 1);
    const auto r = sys.residual(x);
    CHECK(norm2(r) <= 1e-12);
}

TEST_CASE("Newton with a zero initial residual does nothing", "[solvers][newton]") {
    NewtonSystem sys;
    sys.residual = [](const std::vector<double>& x) { return x; };
    sys.jacobian = [](const std::vector<double>&) { return tridiagonal(4, 1.0); };
    sys.fixed.assign(4, false);
    NewtonReport rep;
    const auto x = newton_solve(sys, std::vector<double>(4, 0.0), {}, {}, &rep);
    CHECK(rep.iterations == 0);
    for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("Newton solves a sinh reaction problem with fixed ends", "[solvers][newton]") {
    const std::size_t n = 60;
    const auto A = tridiagonal(n, 0.0);
    NewtonSystem sys;
    sys.fixed.assign(n, false);
    sys.fixed[0] = sys.fixed[n - 1] = true;
    sys.residual = [&](const std::vector<double>& x) {
        auto r = A * x;
        for (std::size_t i = 0; i < n; ++i) r[i] += 0.1 * std::sinh(x[i]) - 0.5;
        for (std::size_t i = 0; i < n; ++i)
            if (sys.fixed[i]) r[i] = 0.0;
        return r;
    };
    sys.jacobian = [&](const std::vector<double>& x) {
        SparseMatrix J = A;
        for (std::uint32_t i = 0; i < n; ++i) J.add(i, i, 0.1 * std::cosh(x[i]));
        return J;
    };
    std::vector<double> x0(n, 0.0);
    x0[0] = 3.0;
    x0[n - 1] = -2.0;
    NewtonReport rep;
    const auto x = newton_solve(sys, x0, {1e-12, 1e-30, 50}, {1e-14, 1e-30, 0, Preconditioner::Jacobi}, &rep);
    CHECK(x[0] == 3.0);
    CHECK(x[n - 1] == -2.0);
    for (std::size_t k = 1; k < rep.history.size(); ++k) CHECK(rep.history[k] < rep.history[k - 1]);
    CHECK(rep.residual <= 1e-12 * rep.initial_residual);
    CHECK(rep.iterations < 20);
}
