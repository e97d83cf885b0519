#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qmarginal/alpha.hpp"
#include "qmarginal/qudit.hpp"
#include "support.hpp"

using namespace qmarginal;

TEST_CASE("single-letter pauli matrices") {
    const HermitianOp z = pauli_matrix(PauliString("Z"));
    CHECK(z.matrix()(0, 0).real() == doctest::Approx(1.0));
    CHECK(z.matrix()(1, 1).real() == doctest::Approx(-1.0));
}

TEST_CASE("bell correlation Tr(XX Phi+) = 1") {
    const HermitianOp xx = pauli_matrix(PauliString("XX"));
    const DensityMatrix bell = DensityMatrix(HermitianOp(qmtest::bell_pair_matrix()));
    CHECK(expectation(xx, bell) == doctest::Approx(1.0));
}

TEST_CASE("pauli orthogonality Tr(PQ) = 2^n delta") {
    std::mt19937_64 rng(5);
    const std::vector<std::string> words{"XYZ", "IXY", "ZZI", "YYY", "IIX"};
    for (const auto& a : words)
        for (const auto& b : words) {
            const double tr =
                (pauli_matrix(PauliString(a)).matrix() * pauli_matrix(PauliString(b)).matrix())
                    .trace()
                    .real();
            if (a == b)
                CHECK(tr == doctest::Approx(8.0));
            else
                CHECK(tr == doctest::Approx(0.0));
        }
    (void)rng;
}

TEST_CASE("oversize pauli word is rejected") {
    CHECK_THROWS_AS(pauli_matrix(PauliString(std::string(13, 'X'))), capacity_error);
}

TEST_CASE("partial trace: bell marginal is maximally mixed") {
    const HermitianOp bell(qmtest::bell_pair_matrix());
    const HermitianOp r1 = partial_trace(bell, {1}, 2);
    CHECK(qmtest::matrix_dev(r1.matrix(), 0.5 * ComplexMatrix::Identity(2, 2)) < 1e-12);
    const HermitianOp r2 = partial_trace(bell, {2}, 2);
    CHECK(qmtest::matrix_dev(r2.matrix(), 0.5 * ComplexMatrix::Identity(2, 2)) < 1e-12);
}

TEST_CASE("partial trace factors products exactly") {
    std::mt19937_64 rng(9);
    const DensityMatrix a = random_density_matrix(4, rng);
    const DensityMatrix b = random_density_matrix(2, rng);
    const HermitianOp prod(kron(a.matrix(), b.matrix()));
    CHECK(qmtest::matrix_dev(partial_trace(prod, {1, 2}, 3).matrix(), a.matrix()) < 1e-12);
    CHECK(qmtest::matrix_dev(partial_trace(prod, {3}, 3).matrix(), b.matrix()) < 1e-12);
}

TEST_CASE("partial trace of GHZ keeps the classical mixture") {
    ComplexVector ghz = ComplexVector::Zero(8);
    ghz(0) = ghz(7) = 1.0 / std::sqrt(2.0);
    const DensityMatrix rho = DensityMatrix::pure(ghz);
    const HermitianOp r12 = partial_trace(rho.op(), {1, 2}, 3);
    ComplexMatrix want = ComplexMatrix::Zero(4, 4);
    want(0, 0) = want(3, 3) = 0.5;
    CHECK(qmtest::matrix_dev(r12.matrix(), want) < 1e-12);
    CHECK(r12.trace_real() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("partial trace rejects bad indices") {
    const HermitianOp bell(qmtest::bell_pair_matrix());
    CHECK_THROWS(partial_trace(bell, {3}, 2));
    CHECK_THROWS(partial_trace(bell, {2, 1}, 2));
}

TEST_CASE("local pauli set: canonical order, dedup, coverage") {
    const LocalPauliSet s(3, {{1, 2}, {2, 3}});
    CHECK(s.size() == 27);  // 9 singles on {1},{2},{3}? no: singles on 1,2,3 within the two pairs
    // Members supported on {2} are generated by both subsets but appear once.
    int on_2 = 0;
    for (const auto& p : s.members())
        if (p.support() == std::vector<int>{2}) ++on_2;
    CHECK(on_2 == 3);
    // Canonical order sorts by support then word.
    for (int i = 1; i < s.size(); ++i) {
        const auto a = std::make_pair(s.members()[size_t(i - 1)].support(),
                                      s.members()[size_t(i - 1)].letters);
        const auto b =
            std::make_pair(s.members()[size_t(i)].support(), s.members()[size_t(i)].letters);
        CHECK(a < b);
    }
    // d <= 4^k m - 1
    CHECK(s.size() <= 16 * 2 - 1);
}

TEST_CASE("every local pauli has unit operator norm") {
    const LocalPauliSet s(3, {{1, 3}, {2, 3}});
    for (const auto& p : s.members()) {
        const auto ev = eig_hermitian(pauli_matrix(p)).eigenvalues;
        CHECK(ev.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
        CHECK(ev.cwiseAbs().minCoeff() == doctest::Approx(1.0));
    }
}

TEST_CASE("marginals_to_alpha on mixed and pure inputs") {
    const LocalPauliSet s(2, {{1}});
    std::vector<SubsetMarginal> mixed{{std::vector<int>{1},
                                       HermitianOp(0.5 * ComplexMatrix::Identity(2, 2))}};
    const AlphaVector a0 = marginals_to_alpha(mixed, s);
    CHECK(a0.values.cwiseAbs().maxCoeff() < 1e-14);

    ComplexMatrix up = ComplexMatrix::Zero(2, 2);
    up(0, 0) = 1.0;
    const LocalPauliSet s1(1, {{1}});
    std::vector<SubsetMarginal> pure{{std::vector<int>{1}, HermitianOp(up)}};
    const AlphaVector a1 = marginals_to_alpha(pure, s1);
    // Members are X, Y, Z in canonical order; only <Z> = 1.
    CHECK(a1.values(0) == doctest::Approx(0.0));
    CHECK(a1.values(1) == doctest::Approx(0.0));
    CHECK(a1.values(2) == doctest::Approx(1.0));
}

TEST_CASE("alpha from consistent marginals equals direct expectations") {
    std::mt19937_64 rng(21);
    DensityMatrix sigma;
    const ConsistencyInstance inst =
        qmtest::planted_instance(4, {{1, 2}, {2, 3}, {3, 4}}, 0.1, rng, &sigma);
    std::vector<std::vector<int>> subsets;
    for (const auto& mg : inst.marginals) subsets.push_back(mg.subset);
    const LocalPauliSet s(4, subsets);
    const AlphaVector a = marginals_to_alpha(inst.marginals, s);
    const AlphaVector direct = state_to_alpha(sigma, s);
    CHECK((a.values - direct.values).cwiseAbs().maxCoeff() < 1e-10);
    for (int i = 0; i < a.size(); ++i) CHECK(std::abs(a.values(i)) <= 1.0 + 1e-12);
}

TEST_CASE("alpha round trip is the identity") {
    std::mt19937_64 rng(23);
    const LocalPauliSet s(3, {{1, 2}, {2, 3}});
    std::normal_distribution<double> g(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        AlphaVector alpha;
        alpha.values.resize(s.size());
        for (int i = 0; i < s.size(); ++i) alpha.values(i) = g(rng);
        alpha.values *= (1.0 / std::sqrt(double(s.size()))) / std::max(1.0, alpha.values.norm());
        const auto marginals = alpha_to_marginals(alpha, s);
        const AlphaVector back = marginals_to_alpha(marginals, s);
        CHECK((back.values - alpha.values).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("alpha outside the body yields flagged non-PSD marginals") {
    const LocalPauliSet s(1, {{1}});
    AlphaVector alpha;
    alpha.values = RealVector::Zero(3);
    alpha.values(2) = 2.0;  // <Z> = 2
    const auto marg = alpha_to_marginals(alpha, s);
    CHECK(marg[0].rho.matrix()(0, 0).real() == doctest::Approx(1.5));
    CHECK(marg[0].rho.matrix()(1, 1).real() == doctest::Approx(-0.5));
    CHECK_FALSE(marg[0].is_positive_semidefinite());
    CHECK(marg[0].rho.trace_real() == doctest::Approx(1.0));
}

TEST_CASE("pauli reconstruction identity on small states") {
    std::mt19937_64 rng(31);
    for (int n = 1; n <= 3; ++n) {
        const Eigen::Index dim = Eigen::Index(1) << n;
        const DensityMatrix sigma = random_density_matrix(dim, rng);
        ComplexMatrix rec = ComplexMatrix::Zero(dim, dim);
        const char letters[4] = {'I', 'X', 'Y', 'Z'};
        size_t count = 1;
        for (int i = 0; i < n; ++i) count *= 4;
        for (size_t code = 0; code < count; ++code) {
            std::string w(static_cast<size_t>(n), 'I');
            size_t rest = code;
            for (int i = 0; i < n; ++i) {
                w[static_cast<size_t>(i)] = letters[rest % 4];
                rest /= 4;
            }
            const HermitianOp p = pauli_matrix(PauliString(w));
            rec += expectation(p, sigma) * p.matrix();
        }
        rec /= static_cast<double>(dim);
        CHECK(qmtest::matrix_dev(rec, sigma.matrix()) < 1e-10);
    }
}

TEST_CASE("partial trace is trace preserving and linear") {
    std::mt19937_64 rng(33);
    const DensityMatrix a = random_density_matrix(8, rng);
    const DensityMatrix b = random_density_matrix(8, rng);
    const HermitianOp ta = partial_trace(a.op(), {1, 3}, 3);
    CHECK(ta.trace_real() == doctest::Approx(1.0).epsilon(1e-10));
    ComplexMatrix mix = 0.3 * a.matrix() + 0.7 * b.matrix();
    const HermitianOp tmix = partial_trace(HermitianOp(std::move(mix)), {1, 3}, 3);
    const ComplexMatrix want =
        0.3 * ta.matrix() + 0.7 * partial_trace(b.op(), {1, 3}, 3).matrix();
    CHECK(qmtest::matrix_dev(tmix.matrix(), want) < 1e-12);
}

TEST_CASE("intersection disagreement detects conflicting marginals") {
    ConsistencyInstance inst = qmtest::bell_triple_instance();
    // Both bell marginals agree on qubit 2 (I/2 each).
    CHECK(intersection_disagreement(inst.marginals, 3) < 1e-12);

    ComplexMatrix up = ComplexMatrix::Zero(2, 2);
    up(0, 0) = 1.0;
    ComplexMatrix down = ComplexMatrix::Zero(2, 2);
    down(1, 1) = 1.0;
    std::vector<SubsetMarginal> bad{{std::vector<int>{1}, HermitianOp(up)},
                                    {std::vector<int>{1}, HermitianOp(down)}};
    CHECK(intersection_disagreement(bad, 1) == doctest::Approx(2.0));
}

TEST_CASE("qudit basis reduces to paulis at d = 2") {
    const QuditObservableBasis b = qudit_basis(2);
    REQUIRE(b.members.size() == 3);
    CHECK(qmtest::matrix_dev(b.members[0].matrix(), pauli_matrix(PauliString("X")).matrix()) <
          1e-14);
    CHECK(qmtest::matrix_dev(b.members[1].matrix(), pauli_matrix(PauliString("Y")).matrix()) <
          1e-14);
    CHECK(qmtest::matrix_dev(b.members[2].matrix(), pauli_matrix(PauliString("Z")).matrix()) <
          1e-14);
}

TEST_CASE("qudit basis d = 3: member count and Z normalizations") {
    const QuditObservableBasis b = qudit_basis(3);
    CHECK(b.members.size() == 8);
    double z0z0 = 0.0, z1z1 = 0.0;
    for (size_t i = 0; i < b.members.size(); ++i) {
        if (b.labels[i] == "Z0")
            z0z0 = (b.members[i].matrix() * b.members[i].matrix()).trace().real();
        if (b.labels[i] == "Z1")
            z1z1 = (b.members[i].matrix() * b.members[i].matrix()).trace().real();
    }
    CHECK(z0z0 == doctest::Approx(2.0));
    CHECK(z1z1 == doctest::Approx(1.5));
}

TEST_CASE("qudit basis: exhaustive orthogonality and unit norms") {
    for (int d = 2; d <= 5; ++d) {
        const QuditObservableBasis b = qudit_basis(d);
        CHECK(static_cast<int>(b.members.size()) == d * d - 1);
        for (size_t i = 0; i < b.members.size(); ++i) {
            CHECK(operator_norm(b.members[i]) == doctest::Approx(1.0));
            CHECK(b.members[i].trace_real() == doctest::Approx(0.0).epsilon(1e-12));
            for (size_t j = i + 1; j < b.members.size(); ++j) {
                const double cross =
                    (b.members[i].matrix() * b.members[j].matrix()).trace().real();
                CHECK(std::abs(cross) < 1e-12);
            }
        }
    }
    CHECK_THROWS_AS(qudit_basis(1), capacity_error);
    CHECK_THROWS_AS(qudit_basis(9), capacity_error);
}
