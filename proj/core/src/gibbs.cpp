#include "qmarginal/gibbs.hpp"

#include <cmath>

namespace qmarginal {

namespace {

ComplexMatrix field_matrix(const RealVector& theta, const ObservableSet& obs) {
    const Eigen::Index dim = obs.observables.front().dim();
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    for (int i = 0; i < obs.size(); ++i) m += theta(i) * obs.observables[size_t(i)].matrix();
    return m;
}

struct GibbsEval {
    double psi;
    DensityMatrix rho;
};

GibbsEval eval_gibbs(const RealVector& theta, const ObservableSet& obs) {
    const EigenDecomposition ed = eig_hermitian(HermitianOp(field_matrix(theta, obs)));
    const double lmax = ed.eigenvalues(ed.eigenvalues.size() - 1);
    RealVector ex = (ed.eigenvalues.array() - lmax).exp();
    const double z = ex.sum();
    ComplexMatrix rho = ed.eigenvectors * (ex / z).asDiagonal() * ed.eigenvectors.adjoint();
    return {lmax + std::log(z), DensityMatrix::unchecked(HermitianOp(std::move(rho)))};
}

}  // namespace

void ObservableSet::validate() const {
    if (observables.empty()) throw std::invalid_argument("ObservableSet: empty");
    if (targets.size() != size()) throw dimension_error("ObservableSet: target count");
    const Eigen::Index dim = observables.front().dim();
    for (const auto& t : observables)
        if (t.dim() != dim) throw dimension_error("ObservableSet: mixed dimensions");
    // Gram matrix of {I, T_1, ..., T_r} under the Hilbert-Schmidt inner product.
    const int r = size();
    RealMatrix gram(r + 1, r + 1);
    const auto ip = [&](const ComplexMatrix& a, const ComplexMatrix& b) {
        return (a.adjoint() * b).trace().real();
    };
    const ComplexMatrix id = ComplexMatrix::Identity(dim, dim);
    gram(0, 0) = ip(id, id);
    for (int i = 0; i < r; ++i) {
        gram(0, i + 1) = ip(id, observables[size_t(i)].matrix());
        gram(i + 1, 0) = gram(0, i + 1);
        for (int j = i; j < r; ++j) {
            gram(i + 1, j + 1) = ip(observables[size_t(i)].matrix(), observables[size_t(j)].matrix());
            gram(j + 1, i + 1) = gram(i + 1, j + 1);
        }
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(gram);
    if (es.eigenvalues().minCoeff() < 1e-8 * std::max(1.0, es.eigenvalues().maxCoeff()))
        throw std::invalid_argument("ObservableSet: observables not linearly independent");
}

double log_partition(const RealVector& theta, const ObservableSet& obs) {
    if (theta.size() != obs.size()) throw dimension_error("log_partition: theta size");
    return eval_gibbs(theta, obs).psi;
}

RealVector grad_log_partition(const RealVector& theta, const ObservableSet& obs) {
    if (theta.size() != obs.size()) throw dimension_error("grad_log_partition: theta size");
    const GibbsEval ev = eval_gibbs(theta, obs);
    RealVector g(obs.size());
    for (int i = 0; i < obs.size(); ++i) g(i) = expectation(obs.observables[size_t(i)], ev.rho);
    return g;
}

DensityMatrix gibbs_state(const RealVector& theta, const ObservableSet& obs) {
    return eval_gibbs(theta, obs).rho;
}

const char* to_string(GibbsStatus s) {
    switch (s) {
        case GibbsStatus::CONVERGED: return "CONVERGED";
        case GibbsStatus::DIVERGING: return "DIVERGING";
        default: return "MAXITER";
    }
}

GibbsFitResult fit_gibbs(const ObservableSet& obs, const GibbsFitOptions& opts) {
    obs.validate();
    const int r = obs.size();

    // Translated potential: psi(theta) - theta . t, gradient <T_i> - t_i.
    const auto potential = [&](const RealVector& th) {
        return log_partition(th, obs) - th.dot(obs.targets);
    };
    const auto gradient = [&](const RealVector& th) {
        return RealVector(grad_log_partition(th, obs) - obs.targets);
    };

    RealVector theta = RealVector::Zero(r);
    double value = potential(theta);
    GibbsFitResult out;

    for (int it = 0; it < opts.max_iterations; ++it) {
        out.iterations = it + 1;
        const RealVector g = gradient(theta);
        const double gmax = g.cwiseAbs().maxCoeff();
        if (gmax <= opts.tol) {
            out.theta = theta;
            out.state = gibbs_state(theta, obs);
            out.residual = gmax;
            out.status = GibbsStatus::CONVERGED;
            return out;
        }
        if (theta.norm() > opts.divergence_radius) {
            out.theta = theta;
            out.state = gibbs_state(theta, obs);
            out.residual = gmax;
            out.status = GibbsStatus::DIVERGING;
            return out;
        }

        RealVector step;
        if (r <= 100) {
            RealMatrix hess(r, r);
            for (int j = 0; j < r; ++j) {
                RealVector tp = theta, tm = theta;
                tp(j) += opts.fd_step;
                tm(j) -= opts.fd_step;
                hess.col(j) = (gradient(tp) - gradient(tm)) / (2.0 * opts.fd_step);
            }
            hess = 0.5 * (hess + hess.transpose().eval());
            double damping = 1e-10;
            while (true) {
                step = (hess + damping * RealMatrix::Identity(r, r)).ldlt().solve(-g);
                if (step.dot(-g) > 0) break;  // descent direction
                damping = damping == 0 ? 1e-10 : damping * 100;
                if (damping > 1e6) {
                    step = -g;
                    break;
                }
            }
        } else {
            step = -g;
        }

        double alpha = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
            const RealVector cand = theta + alpha * step;
            const double vc = potential(cand);
            if (vc < value - 1e-14) {
                theta = cand;
                value = vc;
                moved = true;
                break;
            }
        }
        if (!moved) {
            // Flat to numerical precision around a non-stationary point: treat
            // as converged-to-machine-limit and report the residual honestly.
            break;
        }
    }
    const RealVector g = gradient(theta);
    out.theta = theta;
    out.state = gibbs_state(theta, obs);
    out.residual = g.cwiseAbs().maxCoeff();
    out.status = theta.norm() > opts.divergence_radius ? GibbsStatus::DIVERGING
                                                       : GibbsStatus::MAXITER;
    return out;
}

GibbsConsistencyResult gibbs_consistent_state(const ConsistencyInstance& inst,
                                              const GibbsFitOptions& opts) {
    inst.validate();
    std::vector<std::vector<int>> subsets;
    for (const auto& mg : inst.marginals) subsets.push_back(mg.subset);
    GibbsConsistencyResult out;
    out.s = LocalPauliSet(inst.n, std::move(subsets));

    ObservableSet obs;
    for (const auto& p : out.s.members()) obs.observables.push_back(pauli_matrix(p));
    obs.targets = marginals_to_alpha(inst.marginals, out.s).values;

    out.fit = fit_gibbs(obs, opts);

    for (int si = 0; si < static_cast<int>(out.s.subsets().size()); ++si) {
        const auto& c = out.s.subsets()[size_t(si)];
        const Eigen::Index ld = Eigen::Index(1) << c.size();
        ComplexMatrix m = ComplexMatrix::Zero(ld, ld);
        for (int mi : out.s.members_in_subset(si)) {
            if (out.s.covering_subset(mi) != si) continue;  // assign each P once
            m += out.fit.theta(mi) *
                 pauli_matrix(out.s.members()[size_t(mi)].restrict_to(c)).matrix();
        }
        out.local_terms.emplace_back(std::move(m));
    }

    double worst = 0.0;
    for (const auto& mg : inst.marginals) {
        const HermitianOp got = partial_trace(out.fit.state.op(), mg.subset, inst.n);
        worst = std::max(worst, trace_norm(HermitianOp(got.matrix() - mg.rho.matrix())));
    }
    out.marginal_residual = worst;
    return out;
}

}  // namespace qmarginal
