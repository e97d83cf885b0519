#pragma once

#include "qmarginal/hermitian.hpp"

#include <string>
#include <vector>

namespace qmarginal {

/// Single-qudit observable basis generalizing the Pauli matrices:
///   X_ij = |j><i| + |i><j|                         (0 <= i < j <= d-1)
///   Y_ij = i|j><i| - i|i><j|                       (0 <= i < j <= d-1)
///   Z_i  = (1/(i+1)) sum_{a<=i} |a><a| - |i+1><i+1| (0 <= i <= d-2)
/// d^2 - 1 operators, pairwise Hilbert-Schmidt orthogonal, operator norm 1.
struct QuditObservableBasis {
    int d = 0;
    std::vector<HermitianOp> members;
    std::vector<std::string> labels;  // "X01", "Y12", "Z0", ...
};

QuditObservableBasis qudit_basis(int d);

}  // namespace qmarginal
