#pragma once

#include "qmarginal/consistency.hpp"
#include "qmarginal/density.hpp"
#include "qmarginal/localham.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace qmarginal {

inline constexpr int kMaxFockModes = 12;

/// Occupied-mode subset with its lexicographic rank inside the fixed-particle
/// sector.  Modes are 1-based; Slater basis states carry a +1 sign convention
/// (creation operators applied in descending mode order onto the vacuum).
struct FockIndex {
    int modes = 0;
    std::vector<int> occupied;  // strictly increasing

    int rank() const;
    static FockIndex from_rank(int modes, int particles, int rank);
};

/// All occupation subsets of the (M, N) sector in lexicographic order.
std::vector<std::vector<int>> sector_basis(int modes, int particles);
Eigen::Index sector_dim(int modes, int particles);

/// Pairs {i<j} in lexicographic order; the pair basis indexing every 2-RDM.
std::vector<std::pair<int, int>> pair_basis(int modes);
int pair_rank(int i, int j, int modes);

/// Dense annihilation operator on the full 2^M Fock space (mode 1 = leftmost
/// occupation bit).
ComplexMatrix annihilation_matrix(int mode, int modes);

/// Apply a_i to a sector-N state vector; returns the sector-(N-1) vector.
ComplexVector annihilate(int mode, const ComplexVector& state, int modes, int particles);

struct AnticommutatorReport {
    double max_aa = 0.0;        // ||{a_i, a_j}||
    double max_adad = 0.0;      // ||{a_i^dag, a_j^dag}||
    double max_mixed_dev = 0.0; // ||{a_i, a_j^dag} - delta_ij I||
};

AnticommutatorReport anticommutators_check(int modes);

/// Two-particle reduced density matrix in the pair basis, trace 1.
struct TwoRDM {
    int modes = 0;
    ComplexMatrix mat;  // dim C(M,2)
};

/// rho(I,J) = (2 / (N(N-1))) Tr(a_J^dag a_I sigma) for a sector-N state sigma
/// given as a density matrix on the sector basis.
TwoRDM two_rdm(const ComplexMatrix& sigma_sector, int modes, int particles);
TwoRDM two_rdm(const ComplexVector& state_sector, int modes, int particles);

/// Sector-N matrix of the pair hop a_J^dag a_I.
ComplexMatrix pair_hop_on_sector(std::pair<int, int> create, std::pair<int, int> annihilate,
                                 int modes, int particles);

enum class FermionObsKind { X, Y, Z };

struct FermionObservable {
    FermionObsKind kind;
    std::pair<int, int> left;   // I
    std::pair<int, int> right;  // J (unused for Z)
};

/// Complete 2-particle observable family: X_IJ = a_I^dag a_J + a_J^dag a_I,
/// Y_IJ = -i a_I^dag a_J + i a_J^dag a_I for I < J, and Z_I = a_I^dag a_I for
/// every pair except the lexicographically last one.
struct FermionObservableSet {
    int modes = 0;
    std::vector<FermionObservable> members;
    std::vector<ComplexMatrix> sector2;  // members restricted to the 2-particle sector
    std::pair<int, int> last_pair;

    int size() const { return static_cast<int>(members.size()); }
};

FermionObservableSet build_observables(int modes);  // modes <= 8

ComplexMatrix observable_on_sector(const FermionObservable& obs, int modes, int particles);

/// Member with the largest expectation gap between two pair states, and the gap.
std::pair<int, double> distinguishing_observable(const FermionObservableSet& s, const TwoRDM& rho,
                                                 const TwoRDM& rho_prime);

/// Expansion of a pair state over the observable family around Z_L, matching
/// sigma = Z_L + sum alpha_Z (Z_I - Z_L) + 1/2 sum alpha_X X + 1/2 sum alpha_Y Y.
ComplexMatrix pair_state_from_expectations(const FermionObservableSet& s, const RealVector& alpha);
RealVector pair_state_expectations(const FermionObservableSet& s, const ComplexMatrix& rho);

/// Qubit Hamiltonian embedded into 2n fermionic modes: H_A simulates the Pauli
/// algebra on single-occupancy pairs, H_B penalizes double/zero occupancy with
/// eigenvalues 0, 2, ..., 2n, and the full operator is H_A + penalty * H_B.
struct FermionizedHamiltonian {
    int qubits = 0;
    int modes = 0;
    HermitianOp h_a;
    HermitianOp h_b;
    HermitianOp h_total;
    double penalty = 0.0;

    /// Eigenvalues of h_total restricted to the null space of h_b (ascending).
    RealVector restricted_spectrum() const;
};

FermionizedHamiltonian spin_to_fermion(const LocalHamInstance& qubit_ham);

/// Jordan-Wigner annihilation operator as a dense qubit matrix, with signs
/// matching the Fock-space convention of `annihilation_matrix`.
ComplexMatrix jordan_wigner(int mode, int modes);

struct NRepInstance {
    int modes = 0;
    int particles = 0;
    TwoRDM rho;
    double beta = 0.0;
};

struct NRepReport {
    Verdict verdict = Verdict::UNDECIDED;
    double residual = 0.0;  // trace-norm distance of the best iterate's 2-RDM
    double certified_objective_lower = 0.0;
    double no_threshold = 0.0;
    int iterations = 0;
    std::optional<ComplexMatrix> witness_sector;  // sector-N density matrix
};

/// Frank-Wolfe feasibility over sector-N density matrices minimizing the
/// Frobenius distance of the induced 2-RDM to the target.
NRepReport nrep_oracle(const NRepInstance& inst, double tol, const SolveOptions& opts = {});

/// Particle-hole change of coordinates on observable expectations.
struct ParticleHoleMap {
    int modes = 0;
    RealMatrix map;        // alpha_hole = map * alpha_particle + offset
    RealVector offset;
    double min_singular_value = 0.0;
};

ParticleHoleMap particle_hole_map(int modes);  // modes <= 8

/// Hole observables a_I a_J^dag (+ h.c. variants) restricted to the
/// 2-particle sector, ordered like the particle family.
std::vector<ComplexMatrix> hole_observables_on_sector2(const FermionObservableSet& s);

/// Unitary W = (a_M + a_M^dag) ... (a_1 + a_1^dag) exchanging particles and
/// holes on the full Fock space.
ComplexMatrix particle_hole_unitary(int modes);

}  // namespace qmarginal
