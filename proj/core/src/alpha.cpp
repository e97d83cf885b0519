#include "qmarginal/alpha.hpp"

#include <algorithm>

namespace qmarginal {

namespace {

// Maps each spec subset to the index of the marginal carrying it.
int marginal_for_subset(const std::vector<SubsetMarginal>& marginals,
                        const std::vector<int>& subset) {
    for (int i = 0; i < static_cast<int>(marginals.size()); ++i)
        if (marginals[static_cast<size_t>(i)].subset == subset) return i;
    throw coverage_error("no marginal for required subset");
}

}  // namespace

AlphaVector marginals_to_alpha(const std::vector<SubsetMarginal>& marginals,
                               const LocalPauliSet& s) {
    AlphaVector alpha;
    alpha.values.resize(s.size());
    for (int i = 0; i < s.size(); ++i) {
        const PauliString& p = s.members()[static_cast<size_t>(i)];
        const auto& cover = s.subsets()[static_cast<size_t>(s.covering_subset(i))];
        const int mi = marginal_for_subset(marginals, cover);
        const HermitianOp op = pauli_matrix(p.restrict_to(cover));
        alpha.values(i) = expectation(op, marginals[static_cast<size_t>(mi)].rho);
    }
    return alpha;
}

std::vector<SubsetMarginal> alpha_to_marginals(const AlphaVector& alpha, const LocalPauliSet& s) {
    if (alpha.size() != s.size())
        throw dimension_error("alpha_to_marginals: coordinate count mismatch");
    std::vector<SubsetMarginal> out;
    out.reserve(s.subsets().size());
    for (int si = 0; si < static_cast<int>(s.subsets().size()); ++si) {
        const auto& c = s.subsets()[static_cast<size_t>(si)];
        const Eigen::Index dim = Eigen::Index(1) << c.size();
        ComplexMatrix m = ComplexMatrix::Identity(dim, dim);
        for (int mi : s.members_in_subset(si)) {
            const PauliString& p = s.members()[static_cast<size_t>(mi)];
            m += alpha.values(mi) * pauli_matrix(p.restrict_to(c)).matrix();
        }
        m /= static_cast<double>(dim);
        out.push_back(SubsetMarginal{c, HermitianOp(std::move(m))});
    }
    return out;
}

double intersection_disagreement(const std::vector<SubsetMarginal>& marginals, int n) {
    double worst = 0.0;
    for (size_t i = 0; i < marginals.size(); ++i) {
        for (size_t j = i + 1; j < marginals.size(); ++j) {
            std::vector<int> common;
            std::set_intersection(marginals[i].subset.begin(), marginals[i].subset.end(),
                                  marginals[j].subset.begin(), marginals[j].subset.end(),
                                  std::back_inserter(common));
            if (common.empty()) continue;
            const int ni = static_cast<int>(marginals[i].subset.size());
            const int nj = static_cast<int>(marginals[j].subset.size());
            // Re-index `common` within each subset (positions are 1-based).
            std::vector<int> pos_i, pos_j;
            for (int q : common) {
                pos_i.push_back(1 + static_cast<int>(std::lower_bound(marginals[i].subset.begin(),
                                                                      marginals[i].subset.end(), q) -
                                                     marginals[i].subset.begin()));
                pos_j.push_back(1 + static_cast<int>(std::lower_bound(marginals[j].subset.begin(),
                                                                      marginals[j].subset.end(), q) -
                                                     marginals[j].subset.begin()));
            }
            const HermitianOp ri = partial_trace(marginals[i].rho, pos_i, ni);
            const HermitianOp rj = partial_trace(marginals[j].rho, pos_j, nj);
            worst = std::max(worst, trace_norm(HermitianOp(ri.matrix() - rj.matrix())));
        }
    }
    (void)n;
    return worst;
}

AlphaVector state_to_alpha(const DensityMatrix& sigma, const LocalPauliSet& s) {
    AlphaVector alpha;
    alpha.values.resize(s.size());
    for (int i = 0; i < s.size(); ++i)
        alpha.values(i) = expectation(pauli_matrix(s.members()[static_cast<size_t>(i)]), sigma);
    return alpha;
}

}  // namespace qmarginal
