#include "qmarginal/consistency.hpp"

#include <algorithm>
#include <cmath>

namespace qmarginal {

int ConsistencyInstance::k() const {
    size_t k = 0;
    for (const auto& m : marginals) k = std::max(k, m.subset.size());
    return static_cast<int>(k);
}

void ConsistencyInstance::validate() const {
    if (n < 1 || n > kMaxConsistencyQubits)
        throw capacity_error("ConsistencyInstance: n out of range");
    if (marginals.empty()) throw std::invalid_argument("ConsistencyInstance: no marginals");
    if (beta < kMinGapParameter)
        throw std::invalid_argument("ConsistencyInstance: beta below floor");
    for (const auto& m : marginals) {
        if (m.subset.empty() || static_cast<int>(m.subset.size()) > max_subset_size)
            throw std::invalid_argument("ConsistencyInstance: subset size out of range");
        for (size_t i = 0; i < m.subset.size(); ++i) {
            if (m.subset[i] < 1 || m.subset[i] > n)
                throw std::out_of_range("ConsistencyInstance: subset index out of range");
            if (i > 0 && m.subset[i] <= m.subset[i - 1])
                throw std::invalid_argument("ConsistencyInstance: subset not increasing");
        }
        if (m.rho.dim() != (Eigen::Index(1) << m.subset.size()))
            throw dimension_error("ConsistencyInstance: marginal dim mismatch");
        if (std::abs(m.rho.trace_real() - 1.0) > 1e-8)
            throw std::invalid_argument("ConsistencyInstance: marginal trace != 1");
    }
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::YES: return "YES";
        case Verdict::NO: return "NO";
        default: return "UNDECIDED";
    }
}

FeasibilityReport solve_consistency_exact(const ConsistencyInstance& inst,
                                          const SolveOptions& opts) {
    inst.validate();
    const int n = inst.n;
    const Eigen::Index dim = Eigen::Index(1) << n;
    const int m = static_cast<int>(inst.marginals.size());
    const int k = inst.k();
    const double no_threshold =
        std::pow(inst.beta / (2.0 * std::pow(4.0, k)), 2);

    ComplexMatrix sigma = opts.initial
                              ? *opts.initial
                              : ComplexMatrix(ComplexMatrix::Identity(dim, dim) / double(dim));

    FeasibilityReport rep;
    rep.no_threshold = no_threshold;
    rep.subset_residuals.assign(static_cast<size_t>(m), 0.0);

    double best_lower = 0.0;
    double best_res = std::numeric_limits<double>::infinity();
    ComplexMatrix best_sigma = sigma;

    ComplexMatrix grad(dim, dim);
    std::vector<ComplexMatrix> deltas(static_cast<size_t>(m));
    std::vector<double> res_i(static_cast<size_t>(m));

    for (int t = 0; t < opts.max_iterations; ++t) {
        rep.iterations = t + 1;
        double f = 0.0;
        for (int i = 0; i < m; ++i) {
            const auto& mg = inst.marginals[static_cast<size_t>(i)];
            deltas[static_cast<size_t>(i)] =
                partial_trace_raw(sigma, mg.subset, n) - mg.rho.matrix();
            f += deltas[static_cast<size_t>(i)].squaredNorm();
            res_i[static_cast<size_t>(i)] =
                trace_norm(HermitianOp(deltas[static_cast<size_t>(i)]));
        }
        const double res = *std::max_element(res_i.begin(), res_i.end());
        rep.objective = f;
        if (opts.objective_trace) opts.objective_trace->push_back(f);
        if (res < best_res) {
            best_res = res;
            best_sigma = sigma;
            rep.subset_residuals = res_i;
        }

        if (res <= opts.tol) {
            rep.verdict = Verdict::YES;
            rep.residual = res;
            rep.subset_residuals = res_i;
            rep.witness = DensityMatrix::unchecked(HermitianOp(sigma));
            rep.certified_objective_lower = best_lower;
            return rep;
        }

        grad.setZero();
        for (int i = 0; i < m; ++i)
            add_embedded(deltas[static_cast<size_t>(i)],
                         inst.marginals[static_cast<size_t>(i)].subset, n, Complex(2.0, 0.0),
                         grad);

        const auto [lmin, u] = min_eigenvalue(HermitianOp(grad));
        const double g_sigma = (grad.transpose().cwiseProduct(sigma)).sum().real();
        const double gap = g_sigma - lmin;  // <G, sigma - v>, the duality gap bound
        best_lower = std::max(best_lower, f - gap);

        if (best_lower > no_threshold) {
            rep.verdict = Verdict::NO;
            rep.residual = best_res;
            rep.certified_objective_lower = best_lower;
            rep.certificate_direction = HermitianOp(grad);
            rep.witness = DensityMatrix::unchecked(HermitianOp(best_sigma));
            return rep;
        }

        // Frank-Wolfe step toward the projector on the minimizing eigenvector.
        const ComplexMatrix vertex = u * u.adjoint();
        double step;
        if (opts.line_search) {
            double denom = 0.0;
            for (int i = 0; i < m; ++i) {
                const auto& mg = inst.marginals[static_cast<size_t>(i)];
                ComplexMatrix v_marg = partial_trace_raw(vertex, mg.subset, n);
                ComplexMatrix ad = v_marg - (deltas[static_cast<size_t>(i)] + mg.rho.matrix());
                denom += ad.squaredNorm();
            }
            step = denom > 0 ? std::clamp(gap / (2.0 * denom), 0.0, 1.0) : (gap > 0 ? 1.0 : 0.0);
            if (step == 0.0) break;  // stationary
        } else {
            step = 2.0 / (t + 2.0);
        }
        sigma = ((1.0 - step) * sigma + step * vertex).eval();
    }

    rep.verdict = Verdict::UNDECIDED;
    rep.residual = best_res;
    rep.certified_objective_lower = best_lower;
    rep.witness = DensityMatrix::unchecked(HermitianOp(best_sigma));
    return rep;
}

FeasibilityReport classify_instance(const ConsistencyInstance& inst, const SolveOptions& opts) {
    FeasibilityReport rep = solve_consistency_exact(inst, opts);
    rep.intersection_gap = intersection_disagreement(inst.marginals, inst.n);
    return rep;
}

bool kprime_membership(const AlphaVector& alpha, const LocalPauliSet& s, double delta,
                       const SolveOptions& opts, KPrimeMembershipStats* stats) {
    const double d_used = std::max(delta, kMinGapParameter);
    const double beta = d_used / std::sqrt(static_cast<double>(std::max(1, s.size())));

    ConsistencyInstance inst;
    inst.n = s.qubits();
    inst.marginals = alpha_to_marginals(alpha, s);
    inst.beta = std::max(beta, kMinGapParameter);
    inst.max_subset_size = kMaxQubits;

    SolveOptions po = opts;
    po.tol = beta / 2.0;  // the decision threshold; no need to solve past it
    FeasibilityReport rep = solve_consistency_exact(inst, po);
    const bool yes = rep.residual <= beta / 2.0;
    if (stats) {
        stats->beta_used = inst.beta;
        stats->delta_requested = delta;
        stats->delta_clamped = delta < kMinGapParameter;
        stats->residual = rep.residual;
        stats->iterations = rep.iterations;
    }
    return yes;
}

RealVector projection_metric_weights(const LocalPauliSet& s) {
    RealVector w = RealVector::Zero(s.size());
    for (int si = 0; si < static_cast<int>(s.subsets().size()); ++si) {
        const double scale = 1.0 / double(Eigen::Index(1) << s.subsets()[static_cast<size_t>(si)].size());
        for (int mi : s.members_in_subset(si)) w(mi) += scale;
    }
    return w;
}

namespace {

// Project the eigenvalue vector onto the probability simplex.
RealVector simplex_projection(const RealVector& v) {
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0;
    double theta = 0.0;
    int rho = 0;
    double cum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        cum += u[static_cast<size_t>(i)];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[static_cast<size_t>(i)] - t > 0) {
            rho = static_cast<int>(i + 1);
            theta = t;
        }
    }
    (void)css;
    (void)rho;
    RealVector out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = std::max(v(i) - theta, 0.0);
    return out;
}

ComplexMatrix project_to_states(const ComplexMatrix& m) {
    const EigenDecomposition ed = eig_hermitian(HermitianOp(0.5 * (m + m.adjoint().eval())));
    const RealVector lam = simplex_projection(ed.eigenvalues);
    return ed.eigenvectors * lam.asDiagonal() * ed.eigenvectors.adjoint();
}

}  // namespace

ProjectionResult project_onto_consistent_set(const AlphaVector& target, const LocalPauliSet& s,
                                             const SolveOptions& opts) {
    const int n = s.qubits();
    const Eigen::Index dim = Eigen::Index(1) << n;
    const auto marginals = alpha_to_marginals(target, s);
    const int m = static_cast<int>(marginals.size());

    // Projected gradient with spectral simplex projection; the optimality gap
    // certificate is the linear-minimization gap, valid at any feasible point.
    ComplexMatrix sigma = opts.initial
                              ? project_to_states(*opts.initial)
                              : ComplexMatrix(ComplexMatrix::Identity(dim, dim) / double(dim));
    double lips = 0.0;
    for (const auto& mg : marginals)
        lips += 2.0 * static_cast<double>(Eigen::Index(1) << (n - static_cast<int>(mg.subset.size())));
    const double eta = 1.0 / lips;

    ProjectionResult out;
    ComplexMatrix grad(dim, dim);
    std::vector<ComplexMatrix> deltas(static_cast<size_t>(m));
    double best_lower = 0.0;
    double f = 0.0;

    for (int t = 0; t < opts.max_iterations; ++t) {
        out.iterations = t + 1;
        f = 0.0;
        for (int i = 0; i < m; ++i) {
            deltas[static_cast<size_t>(i)] =
                partial_trace_raw(sigma, marginals[static_cast<size_t>(i)].subset, n) -
                marginals[static_cast<size_t>(i)].rho.matrix();
            f += deltas[static_cast<size_t>(i)].squaredNorm();
        }
        grad.setZero();
        for (int i = 0; i < m; ++i)
            add_embedded(deltas[static_cast<size_t>(i)], marginals[static_cast<size_t>(i)].subset,
                         n, Complex(2.0, 0.0), grad);

        const double lmin = eig_hermitian(HermitianOp(grad)).eigenvalues(0);
        const double g_sigma = (grad.transpose().cwiseProduct(sigma)).sum().real();
        const double gap = g_sigma - lmin;
        best_lower = std::max(best_lower, f - gap);
        if (gap <= opts.gap_tol || f <= opts.gap_tol) break;

        sigma = project_to_states(sigma - eta * grad);
    }

    out.sigma = DensityMatrix::unchecked(HermitianOp(sigma));
    out.projected = state_to_alpha(out.sigma, s);

    const RealVector w = projection_metric_weights(s);
    double fw = 0.0;
    for (int i = 0; i < s.size(); ++i)
        fw += w(i) * std::pow(out.projected.values(i) - target.values(i), 2);
    out.objective = fw;
    out.objective_gap = std::max(0.0, fw - best_lower);
    return out;
}

SupportFunctionBracket support_function_bracket(const LocalPauliSet& s, const RealVector& c,
                                                double gamma, double margin,
                                                const SupportFunctionOptions& opts) {
    const int d = s.size();
    if (c.size() != d) throw dimension_error("support_function_bracket: direction size");
    const RealVector w = projection_metric_weights(s);
    const double w_min = w.minCoeff();
    const double eta = opts.step > 0 ? opts.step : std::sqrt(static_cast<double>(d));
    // Body diameter in the weighted norm: coordinates live in [-1,1]^d.
    const double diam_w = 2.0 * std::sqrt(w.sum());

    SupportFunctionBracket br;
    br.lower = -std::numeric_limits<double>::infinity();
    br.upper = std::numeric_limits<double>::infinity();

    RealVector z = RealVector::Zero(d);
    SolveOptions po = opts.projection;
    std::optional<ComplexMatrix> warm;

    for (int t = 0; t < opts.max_ascent_steps; ++t) {
        AlphaVector y;
        y.values = z + eta * (c.array() / w.array()).matrix();
        po.initial = warm;
        ProjectionResult pr = project_onto_consistent_set(y, s, po);
        warm = pr.sigma.matrix();
        br.projections += 1;
        br.solver_iterations += pr.iterations;
        br.ascent_steps = t + 1;

        const RealVector pi = pr.projected.values;
        // pi is exactly feasible (expectations of an actual state), so c.pi is
        // a valid lower bound on the support function.
        const double lower_t = c.dot(pi);
        br.lower = std::max(br.lower, lower_t);

        // Fixed-point certificate.  For the exact projection p* of y:
        //   eta * c.(x - p*) <= <p* - z, x - p*>_W <= ||p* - z||_W * diam_W
        // for every feasible x, and the approximate projection pi deviates from
        // p* by at most sqrt(gap) in the W norm.
        const double e_w = std::sqrt(std::max(0.0, pr.objective_gap));
        const double move_w =
            std::sqrt((((pi - z).array().square()) * w.array()).sum());
        const double upper_t = lower_t + c.norm() * e_w / std::sqrt(w_min) +
                               (diam_w / eta) * (move_w + e_w);
        br.upper = std::min(br.upper, upper_t);

        br.last_point = pi;
        if (br.lower > gamma + margin || br.upper < gamma - margin) break;
        z = pi;
    }
    return br;
}

}  // namespace qmarginal
