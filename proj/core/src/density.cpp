#include "qmarginal/density.hpp"

#include <cmath>
#include <stdexcept>

namespace qmarginal {

namespace {

Eigen::Index ipow(int base, int exp) {
    Eigen::Index r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

// Strides for 1-based sites, site 1 = most significant digit.
std::vector<Eigen::Index> site_strides(int n, int q) {
    std::vector<Eigen::Index> s(static_cast<size_t>(n));
    Eigen::Index acc = 1;
    for (int site = n; site >= 1; --site) {
        s[static_cast<size_t>(site - 1)] = acc;
        acc *= q;
    }
    return s;
}

std::vector<int> complement(const std::vector<int>& keep, int n) {
    std::vector<int> rest;
    size_t j = 0;
    for (int s = 1; s <= n; ++s) {
        if (j < keep.size() && keep[j] == s) {
            ++j;
        } else {
            rest.push_back(s);
        }
    }
    return rest;
}

// Offset of digit pattern `code` (base q) laid out on `sites` (most significant first).
Eigen::Index place_digits(Eigen::Index code, const std::vector<int>& sites,
                          const std::vector<Eigen::Index>& strides, int q) {
    Eigen::Index off = 0;
    for (size_t j = sites.size(); j-- > 0;) {
        off += (code % q) * strides[static_cast<size_t>(sites[j] - 1)];
        code /= q;
    }
    return off;
}

void check_sites(const std::vector<int>& sites, int n) {
    if (sites.empty()) throw std::invalid_argument("site list must be nonempty");
    for (size_t i = 0; i < sites.size(); ++i) {
        if (sites[i] < 1 || sites[i] > n) throw std::out_of_range("site index out of range");
        if (i > 0 && sites[i] <= sites[i - 1])
            throw std::invalid_argument("site indices must be strictly increasing");
    }
}

}  // namespace

DensityMatrix::DensityMatrix(HermitianOp op, double eig_tol, double trace_tol) : op_(std::move(op)) {
    const double tr = op_.trace_real();
    if (std::abs(tr - 1.0) > trace_tol)
        throw std::invalid_argument("DensityMatrix: trace " + std::to_string(tr) + " != 1");
    const double lmin = eig_hermitian(op_).eigenvalues(0);
    if (lmin < -eig_tol)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(lmin));
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
    return unchecked(HermitianOp(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim)));
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
    const double nrm = psi.norm();
    if (nrm < 1e-14) throw std::invalid_argument("DensityMatrix::pure: zero vector");
    ComplexVector u = psi / nrm;
    return unchecked(HermitianOp(u * u.adjoint()));
}

bool SubsetMarginal::is_positive_semidefinite(double tol) const {
    return eig_hermitian(rho).eigenvalues(0) >= -tol;
}

ComplexMatrix partial_trace_raw(const ComplexMatrix& m, const std::vector<int>& keep, int n,
                                int local_dim) {
    check_sites(keep, n);
    const int q = local_dim;
    if (m.rows() != ipow(q, n)) throw dimension_error("partial_trace: dim mismatch");
    const auto strides = site_strides(n, q);
    const auto rest = complement(keep, n);
    const Eigen::Index dk = ipow(q, static_cast<int>(keep.size()));
    const Eigen::Index dr = ipow(q, static_cast<int>(rest.size()));

    std::vector<Eigen::Index> keep_off(static_cast<size_t>(dk));
    for (Eigen::Index a = 0; a < dk; ++a) keep_off[static_cast<size_t>(a)] = place_digits(a, keep, strides, q);
    std::vector<Eigen::Index> rest_off(static_cast<size_t>(dr));
    for (Eigen::Index t = 0; t < dr; ++t) rest_off[static_cast<size_t>(t)] = place_digits(t, rest, strides, q);

    ComplexMatrix out = ComplexMatrix::Zero(dk, dk);
    for (Eigen::Index a = 0; a < dk; ++a)
        for (Eigen::Index b = 0; b < dk; ++b) {
            Complex acc(0, 0);
            for (Eigen::Index t = 0; t < dr; ++t)
                acc += m(keep_off[static_cast<size_t>(a)] + rest_off[static_cast<size_t>(t)],
                         keep_off[static_cast<size_t>(b)] + rest_off[static_cast<size_t>(t)]);
            out(a, b) = acc;
        }
    return out;
}

HermitianOp partial_trace(const HermitianOp& rho, const std::vector<int>& keep, int n,
                          int local_dim) {
    return HermitianOp(partial_trace_raw(rho.matrix(), keep, n, local_dim));
}

void add_embedded(const ComplexMatrix& op, const std::vector<int>& subset, int n, Complex scale,
                  ComplexMatrix& target, int local_dim) {
    check_sites(subset, n);
    const int q = local_dim;
    const Eigen::Index dk = op.rows();
    if (dk != ipow(q, static_cast<int>(subset.size())))
        throw dimension_error("add_embedded: operator dim does not match subset");
    if (target.rows() != ipow(q, n)) throw dimension_error("add_embedded: target dim mismatch");
    const auto strides = site_strides(n, q);
    const auto rest = complement(subset, n);
    const Eigen::Index dr = ipow(q, static_cast<int>(rest.size()));

    std::vector<Eigen::Index> rest_off(static_cast<size_t>(dr));
    for (Eigen::Index t = 0; t < dr; ++t) rest_off[static_cast<size_t>(t)] = place_digits(t, rest, strides, q);

    for (Eigen::Index a = 0; a < dk; ++a) {
        const Eigen::Index oa = place_digits(a, subset, strides, q);
        for (Eigen::Index b = 0; b < dk; ++b) {
            const Complex v = scale * op(a, b);
            if (v == Complex(0, 0)) continue;
            const Eigen::Index ob = place_digits(b, subset, strides, q);
            for (Eigen::Index t = 0; t < dr; ++t)
                target(oa + rest_off[static_cast<size_t>(t)], ob + rest_off[static_cast<size_t>(t)]) += v;
        }
    }
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& keep, int n,
                            int local_dim) {
    return DensityMatrix::unchecked(partial_trace(rho.op(), keep, n, local_dim));
}

double expectation(const HermitianOp& obs, const HermitianOp& rho) {
    if (obs.dim() != rho.dim()) throw dimension_error("expectation: dim mismatch");
    const Complex tr = (obs.matrix().transpose().cwiseProduct(rho.matrix())).sum();
    if (std::abs(tr.imag()) > 1e-10)
        throw std::runtime_error("expectation: imaginary residue " + std::to_string(tr.imag()));
    return tr.real();
}

double expectation(const HermitianOp& obs, const DensityMatrix& rho) {
    return expectation(obs, rho.op());
}

double entropy(const DensityMatrix& rho) {
    const RealVector ev = eig_hermitian(rho.op()).eigenvalues;
    double s = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > 1e-14) s -= ev(i) * std::log(ev(i));
    return s;
}

DensityMatrix random_density_matrix(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexMatrix m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = Complex(g(rng), g(rng));
    ComplexMatrix w = m * m.adjoint();
    w /= w.trace().real();
    return DensityMatrix::unchecked(HermitianOp(std::move(w)));
}

ComplexVector random_state_vector(Eigen::Index dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexVector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(g(rng), g(rng));
    v.normalize();
    return v;
}

DensityMatrix random_pure_state(Eigen::Index dim, std::mt19937_64& rng) {
    return DensityMatrix::pure(random_state_vector(dim, rng));
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    return out;
}

HermitianOp embed(const HermitianOp& op, const std::vector<int>& subset, int n, int local_dim) {
    check_sites(subset, n);
    const int q = local_dim;
    if (op.dim() != ipow(q, static_cast<int>(subset.size())))
        throw dimension_error("embed: operator dim does not match subset");
    const auto strides = site_strides(n, q);
    const auto rest = complement(subset, n);
    const Eigen::Index dk = op.dim();
    const Eigen::Index dr = ipow(q, static_cast<int>(rest.size()));

    ComplexMatrix out = ComplexMatrix::Zero(ipow(q, n), ipow(q, n));
    const ComplexMatrix& m = op.matrix();
    for (Eigen::Index a = 0; a < dk; ++a) {
        const Eigen::Index oa = place_digits(a, subset, strides, q);
        for (Eigen::Index b = 0; b < dk; ++b) {
            const Eigen::Index ob = place_digits(b, subset, strides, q);
            if (m(a, b) == Complex(0, 0)) continue;
            for (Eigen::Index t = 0; t < dr; ++t) {
                const Eigen::Index ot = place_digits(t, rest, strides, q);
                out(oa + ot, ob + ot) += m(a, b);
            }
        }
    }
    return HermitianOp(std::move(out));
}

}  // namespace qmarginal
