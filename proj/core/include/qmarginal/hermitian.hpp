#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace qmarginal {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kHermiticityTol = 1e-12;
inline constexpr double kExpmOverflowEig = 700.0;

struct hermiticity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct dimension_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense Hermitian operator.  Construction symmetrizes (A + A^dag)/2 to absorb
/// 1-ulp accumulation noise and rejects matrices whose asymmetry exceeds the
/// hermiticity tolerance relative to the largest entry.
class HermitianOp {
  public:
    HermitianOp() = default;

    explicit HermitianOp(ComplexMatrix m, double tol = kHermiticityTol) {
        if (m.rows() != m.cols() || m.rows() < 1)
            throw dimension_error("HermitianOp: matrix must be square, dim >= 1");
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
        if (asym > tol * scale * 2.0)
            throw hermiticity_error("HermitianOp: asymmetry " + std::to_string(asym) +
                                    " exceeds tolerance");
        mat_ = 0.5 * (m + m.adjoint().eval());
    }

    Eigen::Index dim() const { return mat_.rows(); }
    const ComplexMatrix& matrix() const { return mat_; }

    double trace_real() const { return mat_.trace().real(); }

    static HermitianOp zero(Eigen::Index dim) {
        return HermitianOp(ComplexMatrix::Zero(dim, dim));
    }
    static HermitianOp identity(Eigen::Index dim) {
        return HermitianOp(ComplexMatrix::Identity(dim, dim));
    }

  private:
    ComplexMatrix mat_;
};

struct EigenDecomposition {
    RealVector eigenvalues;      // ascending
    ComplexMatrix eigenvectors;  // unitary, columns are eigenvectors
};

/// Full spectral decomposition, eigenvalues ascending.
EigenDecomposition eig_hermitian(const HermitianOp& a);

/// exp(A) through the spectral decomposition; positive definite by construction.
/// Throws a range error when the top eigenvalue would overflow exp().
HermitianOp expm_hermitian(const HermitianOp& a);

/// Sum of absolute eigenvalues (the l1 / trace norm).
double trace_norm(const HermitianOp& a);

/// Smallest eigenvalue and a normalized eigenvector for it.
std::pair<double, ComplexVector> min_eigenvalue(const HermitianOp& a);

/// Frobenius norm of a raw complex matrix.
double frobenius_norm(const ComplexMatrix& m);

/// Operator (spectral) norm of a Hermitian operator.
double operator_norm(const HermitianOp& a);

}  // namespace qmarginal
