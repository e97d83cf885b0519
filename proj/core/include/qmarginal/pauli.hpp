#pragma once

#include "qmarginal/hermitian.hpp"

#include <string>
#include <vector>

namespace qmarginal {

inline constexpr int kMaxQubits = 12;

/// Word over {I,X,Y,Z}; position i (0-based) is the letter on qubit i+1.
struct PauliString {
    std::string letters;

    PauliString() = default;
    explicit PauliString(std::string w);

    int qubits() const { return static_cast<int>(letters.size()); }

    /// 1-based indices of qubits where the letter is not I.
    std::vector<int> support() const;

    bool is_identity() const;

    /// Letters restricted to the 1-based index set C (which must contain the support).
    PauliString restrict_to(const std::vector<int>& subset) const;

    bool operator==(const PauliString& o) const = default;
};

/// Dense 2^n matrix of the Pauli word, qubit 1 = leftmost tensor factor.
HermitianOp pauli_matrix(const PauliString& p);

/// 2x2 single-qubit Pauli matrix for letter in {I,X,Y,Z}.
ComplexMatrix pauli_letter_matrix(char letter);

/// All Pauli words supported inside some subset C_i, identity excluded,
/// deduplicated and canonically ordered (lexicographic on support set, then word).
/// Each member records the first subset that covers it.
class LocalPauliSet {
  public:
    LocalPauliSet() = default;
    LocalPauliSet(int n, std::vector<std::vector<int>> subsets);

    int qubits() const { return n_; }
    int size() const { return static_cast<int>(members_.size()); }
    const std::vector<PauliString>& members() const { return members_; }
    const std::vector<std::vector<int>>& subsets() const { return subsets_; }
    /// Index into subsets() of the first subset covering member i.
    int covering_subset(int i) const { return cover_[i]; }
    /// All member indices whose support lies inside subset j.
    const std::vector<int>& members_in_subset(int j) const { return per_subset_[j]; }

  private:
    int n_ = 0;
    std::vector<std::vector<int>> subsets_;
    std::vector<PauliString> members_;
    std::vector<int> cover_;
    std::vector<std::vector<int>> per_subset_;
};

}  // namespace qmarginal
