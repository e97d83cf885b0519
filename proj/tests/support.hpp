#pragma once

// Shared generators and independent oracles for the test suites.

#include "qmarginal/consistency.hpp"
#include "qmarginal/density.hpp"
#include "qmarginal/fermion.hpp"
#include "qmarginal/localham.hpp"

#include <random>

namespace qmtest {

using namespace qmarginal;

inline HermitianOp random_hermitian(Eigen::Index dim, std::mt19937_64& rng,
                                    double norm_cap = 1.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
    HermitianOp h(0.5 * (m + m.adjoint().eval()), 1.0);
    const double nrm = operator_norm(h);
    if (nrm > norm_cap) h = HermitianOp((h.matrix() * (norm_cap / nrm)).eval());
    return h;
}

inline std::vector<std::vector<int>> random_pair_subsets(int n, int m, std::mt19937_64& rng) {
    std::vector<std::vector<int>> all;
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) all.push_back({i, j});
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(static_cast<size_t>(std::min<int>(m, static_cast<int>(all.size()))));
    return all;
}

inline LocalHamInstance random_two_local(int n, int m, std::mt19937_64& rng) {
    LocalHamInstance inst;
    inst.n = n;
    for (const auto& c : random_pair_subsets(n, m, rng))
        inst.terms.push_back({c, random_hermitian(4, rng)});
    inst.a = -1.0;
    inst.b = 1.0;
    return inst;
}

/// Marginals of a freshly sampled full-rank state on the given subsets.
inline ConsistencyInstance planted_instance(int n, std::vector<std::vector<int>> subsets,
                                            double beta, std::mt19937_64& rng,
                                            DensityMatrix* planted = nullptr) {
    ConsistencyInstance inst;
    inst.n = n;
    inst.beta = beta;
    inst.max_subset_size = kMaxQubits;
    const DensityMatrix sigma = random_density_matrix(Eigen::Index(1) << n, rng);
    for (auto& c : subsets) {
        HermitianOp rho = partial_trace(sigma.op(), c, n);
        inst.marginals.push_back({std::move(c), std::move(rho)});
    }
    if (planted) *planted = sigma;
    return inst;
}

inline ComplexMatrix bell_pair_matrix() {
    ComplexVector phi = ComplexVector::Zero(4);
    phi(0) = 1.0 / std::sqrt(2.0);
    phi(3) = 1.0 / std::sqrt(2.0);
    return phi * phi.adjoint();
}

inline ConsistencyInstance bell_triple_instance(double beta = 0.1) {
    ConsistencyInstance inst;
    inst.n = 3;
    inst.beta = beta;
    inst.marginals.push_back({{1, 2}, HermitianOp(bell_pair_matrix())});
    inst.marginals.push_back({{2, 3}, HermitianOp(bell_pair_matrix())});
    return inst;
}

/// Shift one marginal toward a low-weight eigenvector by the requested trace
/// distance while staying positive semidefinite.
inline void perturb_marginal(ConsistencyInstance& inst, size_t index, double trace_distance,
                             std::mt19937_64& rng) {
    (void)rng;
    HermitianOp& rho = inst.marginals[index].rho;
    const EigenDecomposition ed = eig_hermitian(rho);
    const ComplexVector low = ed.eigenvectors.col(0);
    const double lam = ed.eigenvalues(0);
    // rho' = (1-q) rho + q |low><low| has trace distance q (1 - lam) approx.
    const double q = trace_distance / std::max(1e-6, 1.0 - lam);
    rho = HermitianOp(((1.0 - q) * rho.matrix() + q * (low * low.adjoint())).eval());
}

/// First-quantized Slater state in (C^M)^{tensor N}: the antisymmetrized
/// product of the given orbitals.  Independent oracle for the 2-RDM tests.
inline ComplexVector first_quantized_slater(const std::vector<int>& occ, int modes) {
    const int n = static_cast<int>(occ.size());
    Eigen::Index dim = 1;
    for (int i = 0; i < n; ++i) dim *= modes;
    ComplexVector psi = ComplexVector::Zero(dim);
    std::vector<int> perm(occ.begin(), occ.end());
    std::sort(perm.begin(), perm.end());
    // Sum over permutations with parity signs.
    std::vector<int> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    do {
        int inversions = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (idx[static_cast<size_t>(i)] > idx[static_cast<size_t>(j)]) ++inversions;
        Eigen::Index pos = 0;
        for (int p = 0; p < n; ++p)
            pos = pos * modes + (perm[static_cast<size_t>(idx[static_cast<size_t>(p)])] - 1);
        psi(pos) += (inversions % 2 == 0 ? 1.0 : -1.0);
    } while (std::next_permutation(idx.begin(), idx.end()));
    psi.normalize();
    return psi;
}

/// First-quantized 2-RDM of a state on (C^M)^{tensor N}, projected onto the
/// antisymmetric pair basis |phi_{ij}> = (|ij> - |ji>)/sqrt(2).
inline ComplexMatrix first_quantized_two_rdm(const ComplexVector& psi, int modes, int particles) {
    std::vector<int> keep{1, 2};
    const HermitianOp rho12 =
        partial_trace(HermitianOp((psi * psi.adjoint()).eval()), keep, particles, modes);
    const auto pairs = pair_basis(modes);
    const Eigen::Index dp = static_cast<Eigen::Index>(pairs.size());
    ComplexMatrix basis(static_cast<Eigen::Index>(modes) * modes, dp);
    basis.setZero();
    for (Eigen::Index p = 0; p < dp; ++p) {
        const auto [i, j] = pairs[static_cast<size_t>(p)];
        basis((i - 1) * modes + (j - 1), p) = 1.0 / std::sqrt(2.0);
        basis((j - 1) * modes + (i - 1), p) = -1.0 / std::sqrt(2.0);
    }
    return basis.adjoint() * rho12.matrix() * basis;
}

inline double matrix_dev(const ComplexMatrix& a, const ComplexMatrix& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace qmtest
