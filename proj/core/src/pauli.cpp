#include "qmarginal/pauli.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace qmarginal {

PauliString::PauliString(std::string w) : letters(std::move(w)) {
    for (char c : letters)
        if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
            throw std::invalid_argument("PauliString: letters must be I, X, Y or Z");
}

std::vector<int> PauliString::support() const {
    std::vector<int> s;
    for (int i = 0; i < qubits(); ++i)
        if (letters[static_cast<size_t>(i)] != 'I') s.push_back(i + 1);
    return s;
}

bool PauliString::is_identity() const {
    return letters.find_first_not_of('I') == std::string::npos;
}

PauliString PauliString::restrict_to(const std::vector<int>& subset) const {
    std::string w;
    w.reserve(subset.size());
    for (int q : subset) {
        if (q < 1 || q > qubits())
            throw std::out_of_range("PauliString::restrict_to: index out of range");
        w.push_back(letters[static_cast<size_t>(q - 1)]);
    }
    for (int q : support())
        if (!std::binary_search(subset.begin(), subset.end(), q))
            throw std::invalid_argument("PauliString::restrict_to: subset misses support");
    return PauliString(w);
}

ComplexMatrix pauli_letter_matrix(char letter) {
    ComplexMatrix m(2, 2);
    const Complex i01(0.0, 1.0);
    switch (letter) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, -i01, i01, 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: throw std::invalid_argument("pauli_letter_matrix: bad letter");
    }
    return m;
}

HermitianOp pauli_matrix(const PauliString& p) {
    const int n = p.qubits();
    if (n < 1) throw dimension_error("pauli_matrix: empty word");
    if (n > kMaxQubits)
        throw capacity_error("pauli_matrix: " + std::to_string(n) + " qubits exceeds cap");
    ComplexMatrix m = pauli_letter_matrix(p.letters[0]);
    for (int i = 1; i < n; ++i) {
        ComplexMatrix next = pauli_letter_matrix(p.letters[static_cast<size_t>(i)]);
        ComplexMatrix out(m.rows() * 2, m.cols() * 2);
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                out.block(r * 2, c * 2, 2, 2) = m(r, c) * next;
        m = std::move(out);
    }
    return HermitianOp(std::move(m));
}

namespace {

void check_subset(const std::vector<int>& c, int n) {
    if (c.empty()) throw std::invalid_argument("subset must be nonempty");
    for (size_t i = 0; i < c.size(); ++i) {
        if (c[i] < 1 || c[i] > n) throw std::out_of_range("subset index out of range");
        if (i > 0 && c[i] <= c[i - 1])
            throw std::invalid_argument("subset indices must be strictly increasing");
    }
}

}  // namespace

LocalPauliSet::LocalPauliSet(int n, std::vector<std::vector<int>> subsets)
    : n_(n), subsets_(std::move(subsets)) {
    if (n < 1 || n > kMaxQubits) throw capacity_error("LocalPauliSet: qubit count out of range");
    for (const auto& c : subsets_) check_subset(c, n);

    // Enumerate non-identity words per subset; canonical key = (support, word).
    std::map<std::pair<std::vector<int>, std::string>, std::pair<PauliString, int>> canon;
    const char letters[4] = {'I', 'X', 'Y', 'Z'};
    for (int si = 0; si < static_cast<int>(subsets_.size()); ++si) {
        const auto& c = subsets_[si];
        const size_t k = c.size();
        size_t count = 1;
        for (size_t i = 0; i < k; ++i) count *= 4;
        for (size_t code = 1; code < count; ++code) {  // code 0 is the identity
            std::string w(static_cast<size_t>(n), 'I');
            size_t rest = code;
            for (size_t i = 0; i < k; ++i) {
                w[static_cast<size_t>(c[i] - 1)] = letters[rest % 4];
                rest /= 4;
            }
            PauliString p(w);
            auto key = std::make_pair(p.support(), p.letters);
            auto it = canon.find(key);
            if (it == canon.end())
                canon.emplace(std::move(key), std::make_pair(std::move(p), si));
            else if (si < it->second.second)
                it->second.second = si;
        }
    }
    members_.reserve(canon.size());
    cover_.reserve(canon.size());
    for (auto& [key, val] : canon) {
        members_.push_back(std::move(val.first));
        cover_.push_back(val.second);
    }
    // Re-resolve first cover: the map kept the smallest generating subset, but a
    // member generated by subset 2 may also fit inside subset 0.
    per_subset_.assign(subsets_.size(), {});
    for (int mi = 0; mi < size(); ++mi) {
        const auto supp = members_[static_cast<size_t>(mi)].support();
        for (int si = 0; si < static_cast<int>(subsets_.size()); ++si) {
            const bool inside = std::includes(subsets_[static_cast<size_t>(si)].begin(),
                                              subsets_[static_cast<size_t>(si)].end(),
                                              supp.begin(), supp.end());
            if (inside) {
                per_subset_[static_cast<size_t>(si)].push_back(mi);
                if (si < cover_[static_cast<size_t>(mi)]) cover_[static_cast<size_t>(mi)] = si;
            }
        }
    }
}

}  // namespace qmarginal
