#pragma once

#include "qmarginal/consistency.hpp"
#include "qmarginal/density.hpp"

namespace qmarginal {

/// Observables with target expectation values; {I, T_1, ..., T_r} must be
/// linearly independent (Gram-matrix rank check at tolerance 1e-8).
struct ObservableSet {
    std::vector<HermitianOp> observables;
    RealVector targets;

    int size() const { return static_cast<int>(observables.size()); }
    void validate() const;
};

/// log Tr exp(sum_i theta_i T_i), computed through a spectral shift so that
/// large coefficients cannot overflow.  Convex in theta.
double log_partition(const RealVector& theta, const ObservableSet& obs);

/// Component i is Tr(T_i rho(theta)) with rho(theta) the normalized Gibbs state.
RealVector grad_log_partition(const RealVector& theta, const ObservableSet& obs);

DensityMatrix gibbs_state(const RealVector& theta, const ObservableSet& obs);

enum class GibbsStatus { CONVERGED, DIVERGING, MAXITER };

const char* to_string(GibbsStatus s);

struct GibbsFitResult {
    RealVector theta;
    DensityMatrix state;
    double residual = 0.0;  // max_i |<T_i> - t_i|
    GibbsStatus status = GibbsStatus::MAXITER;
    int iterations = 0;
};

struct GibbsFitOptions {
    double tol = 1e-8;
    int max_iterations = 300;
    double divergence_radius = 200.0;
    double fd_step = 1e-5;
};

/// Damped Newton on the convex potential log Z(theta) - theta . t (targets
/// translated to zero), with a finite-difference Hessian for r <= 100 and
/// backtracking gradient descent beyond.
GibbsFitResult fit_gibbs(const ObservableSet& obs, const GibbsFitOptions& opts = {});

struct GibbsConsistencyResult {
    GibbsFitResult fit;
    LocalPauliSet s;
    /// Local generators: M_j = sum of theta_P P over members covered by
    /// subset j, as an operator on that subset.
    std::vector<HermitianOp> local_terms;
    double marginal_residual = 0.0;  // max trace-norm mismatch to the inputs
};

/// Fits a Gibbs state whose marginals reproduce the instance: observables are
/// the local Pauli words of the instance's subsets, targets their expectations.
GibbsConsistencyResult gibbs_consistent_state(const ConsistencyInstance& inst,
                                              const GibbsFitOptions& opts = {});

}  // namespace qmarginal
