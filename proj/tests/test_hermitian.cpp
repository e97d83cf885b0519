#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace qmarginal;
using qmtest::random_hermitian;

TEST_CASE("pauli X spectrum") {
    ComplexMatrix x(2, 2);
    x << 0, 1, 1, 0;
    const auto ed = eig_hermitian(HermitianOp(x));
    CHECK(ed.eigenvalues(0) == doctest::Approx(-1.0));
    CHECK(ed.eigenvalues(1) == doctest::Approx(1.0));
}

TEST_CASE("diagonal eigenvalues come out ascending") {
    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = -1.0;
    const auto ed = eig_hermitian(HermitianOp(d));
    CHECK(ed.eigenvalues(0) == doctest::Approx(-1.0));
    CHECK(ed.eigenvalues(1) == doctest::Approx(2.0));
}

TEST_CASE("random 8x8: per-pair residual and reconstruction") {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 5; ++rep) {
        const HermitianOp a = random_hermitian(8, rng, 3.0);
        const auto ed = eig_hermitian(a);
        for (int i = 0; i < 8; ++i) {
            const ComplexVector v = ed.eigenvectors.col(i);
            CHECK((a.matrix() * v - ed.eigenvalues(i) * v).norm() < 1e-9);
        }
        const ComplexMatrix rec =
            ed.eigenvectors * ed.eigenvalues.asDiagonal() * ed.eigenvectors.adjoint();
        CHECK(qmtest::matrix_dev(rec, a.matrix()) < 1e-9 * 8 * operator_norm(a));
        CHECK(qmtest::matrix_dev(ed.eigenvectors.adjoint() * ed.eigenvectors,
                                 ComplexMatrix::Identity(8, 8)) < 1e-10);
        // trace = sum of eigenvalues
        CHECK(a.trace_real() == doctest::Approx(ed.eigenvalues.sum()).epsilon(1e-9));
    }
}

TEST_CASE("non-Hermitian input is rejected") {
    ComplexMatrix bad(2, 2);
    bad << 0, 1, 2, 0;
    CHECK_THROWS_AS(HermitianOp{bad}, hermiticity_error);
}

TEST_CASE("expm: zero and diagonal cases") {
    const HermitianOp z = HermitianOp::zero(4);
    CHECK(qmtest::matrix_dev(expm_hermitian(z).matrix(), ComplexMatrix::Identity(4, 4)) < 1e-14);

    const double theta = 0.37;
    ComplexMatrix sz(2, 2);
    sz << theta, 0, 0, -theta;
    const HermitianOp e = expm_hermitian(HermitianOp(sz));
    CHECK(e.matrix()(0, 0).real() == doctest::Approx(std::exp(theta)));
    CHECK(e.matrix()(1, 1).real() == doctest::Approx(std::exp(-theta)));
}

TEST_CASE("expm inverse identity and commutation") {
    std::mt19937_64 rng(7);
    const HermitianOp a = random_hermitian(6, rng, 2.0);
    const HermitianOp ea = expm_hermitian(a);
    ComplexMatrix neg = -a.matrix();
    const HermitianOp eneg = expm_hermitian(HermitianOp(std::move(neg)));
    CHECK(qmtest::matrix_dev(ea.matrix() * eneg.matrix(), ComplexMatrix::Identity(6, 6)) < 1e-8);
    CHECK((ea.matrix() * a.matrix() - a.matrix() * ea.matrix()).norm() < 1e-8);
    // positive definite by construction
    CHECK(eig_hermitian(ea).eigenvalues(0) > 0.0);
}

TEST_CASE("expm overflow guard") {
    ComplexMatrix big = ComplexMatrix::Zero(2, 2);
    big(0, 0) = 800.0;
    CHECK_THROWS_AS(expm_hermitian(HermitianOp(std::move(big))), std::range_error);
}

TEST_CASE("trace norm basics") {
    std::mt19937_64 rng(3);
    const DensityMatrix rho = random_density_matrix(8, rng);
    CHECK(trace_norm(rho.op()) == doctest::Approx(1.0).epsilon(1e-10));

    ComplexMatrix sz(2, 2);
    sz << 1, 0, 0, -1;
    CHECK(trace_norm(HermitianOp(sz)) == doctest::Approx(2.0));

    ComplexMatrix zero = rho.matrix() - rho.matrix();
    CHECK(trace_norm(HermitianOp(std::move(zero))) == doctest::Approx(0.0));
}

TEST_CASE("trace norm triangle inequality on random triples") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 10; ++rep) {
        const HermitianOp a = random_hermitian(5, rng, 1.0);
        const HermitianOp b = random_hermitian(5, rng, 1.0);
        ComplexMatrix sum = a.matrix() + b.matrix();
        CHECK(trace_norm(HermitianOp(std::move(sum))) <=
              trace_norm(a) + trace_norm(b) + 1e-9);
    }
}

TEST_CASE("min eigenvalue with eigenvector") {
    ComplexMatrix sz(2, 2);
    sz << 1, 0, 0, -1;
    const auto [lam, v] = min_eigenvalue(HermitianOp(sz));
    CHECK(lam == doctest::Approx(-1.0));
    CHECK(std::abs(v(1)) == doctest::Approx(1.0));

    const auto [li, vi] = min_eigenvalue(HermitianOp::identity(4));
    CHECK(li == doctest::Approx(1.0));
    CHECK(vi.norm() == doctest::Approx(1.0));
}

TEST_CASE("min eigenvalue matches full spectrum on a random 3-qubit operator") {
    std::mt19937_64 rng(19);
    const HermitianOp h = random_hermitian(8, rng, 2.0);
    const auto [lam, v] = min_eigenvalue(h);
    CHECK(lam == doctest::Approx(eig_hermitian(h).eigenvalues(0)).epsilon(1e-10));
    CHECK((h.matrix() * v - lam * v).norm() < 1e-9);
}
