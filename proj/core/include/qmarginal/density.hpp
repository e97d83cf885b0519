#pragma once

#include "qmarginal/hermitian.hpp"
#include "qmarginal/pauli.hpp"

#include <random>
#include <vector>

namespace qmarginal {

inline constexpr double kStateEigTol = 1e-9;
inline constexpr double kStateTraceTol = 1e-9;

/// Positive semidefinite, unit trace operator.  The checked constructor
/// verifies both; `unchecked` skips validation for iterates that are states
/// by construction (convex mixtures of projectors).
class DensityMatrix {
  public:
    DensityMatrix() = default;

    explicit DensityMatrix(HermitianOp op, double eig_tol = kStateEigTol,
                           double trace_tol = kStateTraceTol);

    static DensityMatrix unchecked(HermitianOp op) {
        DensityMatrix d;
        d.op_ = std::move(op);
        return d;
    }

    static DensityMatrix maximally_mixed(Eigen::Index dim);
    static DensityMatrix pure(const ComplexVector& psi);

    Eigen::Index dim() const { return op_.dim(); }
    const HermitianOp& op() const { return op_; }
    const ComplexMatrix& matrix() const { return op_.matrix(); }

  private:
    HermitianOp op_;
};

/// A marginal: a unit-trace Hermitian operator attached to a sorted 1-based
/// qubit subset.  PSD is not enforced here; targets reconstructed from
/// out-of-body expectation vectors are legitimately non-PSD.
struct SubsetMarginal {
    std::vector<int> subset;  // strictly increasing, 1-based
    HermitianOp rho;

    bool is_positive_semidefinite(double tol = kStateEigTol) const;
};

/// Trace out every site not in `keep` (1-based, strictly increasing).
/// `local_dim` is the per-site dimension (2 for qubits).
HermitianOp partial_trace(const HermitianOp& rho, const std::vector<int>& keep, int n,
                          int local_dim = 2);

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep, int n,
                            int local_dim = 2);

/// Tr(obs * rho); the imaginary residue must stay below 1e-10.
double expectation(const HermitianOp& obs, const DensityMatrix& rho);
double expectation(const HermitianOp& obs, const HermitianOp& rho);

/// von Neumann entropy -Tr(rho log rho), natural log.
double entropy(const DensityMatrix& rho);

/// Full-rank random state: normalized G G^dag with G of iid standard complex
/// Gaussian entries (Wishart ensemble).
DensityMatrix random_density_matrix(Eigen::Index dim, std::mt19937_64& rng);

/// Haar-ish random pure state (normalized complex Gaussian vector).
DensityMatrix random_pure_state(Eigen::Index dim, std::mt19937_64& rng);

ComplexVector random_state_vector(Eigen::Index dim, std::mt19937_64& rng);

/// Kronecker product helpers (qubit 1 = leftmost factor).
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Embed an operator acting on `subset` (1-based, sorted) into the n-site
/// space, identity elsewhere.
HermitianOp embed(const HermitianOp& op, const std::vector<int>& subset, int n,
                  int local_dim = 2);

/// Allocation-free variants for solver hot loops.
ComplexMatrix partial_trace_raw(const ComplexMatrix& rho, const std::vector<int>& keep, int n,
                                int local_dim = 2);
void add_embedded(const ComplexMatrix& op, const std::vector<int>& subset, int n, Complex scale,
                  ComplexMatrix& target, int local_dim = 2);

}  // namespace qmarginal
