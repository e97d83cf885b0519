#include "qmarginal/qudit.hpp"

namespace qmarginal {

QuditObservableBasis qudit_basis(int d) {
    if (d < 2 || d > 8) throw capacity_error("qudit_basis: d must be in [2,8]");
    QuditObservableBasis basis;
    basis.d = d;
    const Complex iu(0.0, 1.0);
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            ComplexMatrix x = ComplexMatrix::Zero(d, d);
            x(j, i) = 1.0;
            x(i, j) = 1.0;
            basis.members.emplace_back(std::move(x));
            basis.labels.push_back("X" + std::to_string(i) + std::to_string(j));

            ComplexMatrix y = ComplexMatrix::Zero(d, d);
            y(j, i) = iu;
            y(i, j) = -iu;
            basis.members.emplace_back(std::move(y));
            basis.labels.push_back("Y" + std::to_string(i) + std::to_string(j));
        }
    }
    for (int i = 0; i + 1 < d; ++i) {
        ComplexMatrix z = ComplexMatrix::Zero(d, d);
        for (int a = 0; a <= i; ++a) z(a, a) = 1.0 / static_cast<double>(i + 1);
        z(i + 1, i + 1) = -1.0;
        basis.members.emplace_back(std::move(z));
        basis.labels.push_back("Z" + std::to_string(i));
    }
    return basis;
}

}  // namespace qmarginal
