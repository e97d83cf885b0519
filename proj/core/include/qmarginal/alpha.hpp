#pragma once

#include "qmarginal/density.hpp"
#include "qmarginal/pauli.hpp"

#include <vector>

namespace qmarginal {

/// Expectation-value coordinates indexed by the members of a LocalPauliSet.
struct AlphaVector {
    RealVector values;

    int size() const { return static_cast<int>(values.size()); }
};

struct coverage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// alpha_P = Tr((P restricted to C_i) rho_i) read off the first covering subset.
AlphaVector marginals_to_alpha(const std::vector<SubsetMarginal>& marginals,
                               const LocalPauliSet& s);

/// rho_i = 2^{-|C_i|} (I + sum_{P in S_i} alpha_P P|_{C_i}).  Unit-trace Hermitian
/// by construction; PSD only when alpha lies in the consistent body.
std::vector<SubsetMarginal> alpha_to_marginals(const AlphaVector& alpha, const LocalPauliSet& s);

/// Largest trace-norm mismatch between overlapping marginals on their intersections.
double intersection_disagreement(const std::vector<SubsetMarginal>& marginals, int n);

/// Expectation vector of a global state over the members of S.
AlphaVector state_to_alpha(const DensityMatrix& sigma, const LocalPauliSet& s);

}  // namespace qmarginal
