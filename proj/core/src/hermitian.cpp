#include "qmarginal/hermitian.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qmarginal {

EigenDecomposition eig_hermitian(const HermitianOp& a) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix());
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("eig_hermitian: eigensolver failed to converge");
    // SelfAdjointEigenSolver already returns ascending eigenvalues.
    return EigenDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

HermitianOp expm_hermitian(const HermitianOp& a) {
    const EigenDecomposition ed = eig_hermitian(a);
    const double lmax = ed.eigenvalues(ed.eigenvalues.size() - 1);
    if (lmax > kExpmOverflowEig)
        throw std::range_error("expm_hermitian: top eigenvalue " + std::to_string(lmax) +
                               " exceeds exp() range; shift the spectrum first");
    RealVector ex = ed.eigenvalues.array().exp();
    ComplexMatrix m = ed.eigenvectors * ex.asDiagonal() * ed.eigenvectors.adjoint();
    return HermitianOp(std::move(m));
}

double trace_norm(const HermitianOp& a) {
    return eig_hermitian(a).eigenvalues.cwiseAbs().sum();
}

std::pair<double, ComplexVector> min_eigenvalue(const HermitianOp& a) {
    const EigenDecomposition ed = eig_hermitian(a);
    return {ed.eigenvalues(0), ed.eigenvectors.col(0)};
}

double frobenius_norm(const ComplexMatrix& m) { return m.norm(); }

double operator_norm(const HermitianOp& a) {
    return eig_hermitian(a).eigenvalues.cwiseAbs().maxCoeff();
}

}  // namespace qmarginal
