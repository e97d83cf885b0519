#include "qmarginal/localham.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qmarginal {

namespace {

struct budget_exhausted {};

void check_subset_sorted(const std::vector<int>& c, int n) {
    if (c.empty()) throw std::invalid_argument("term subset must be nonempty");
    for (size_t i = 0; i < c.size(); ++i) {
        if (c[i] < 1 || c[i] > n) throw std::out_of_range("term subset index out of range");
        if (i > 0 && c[i] <= c[i - 1])
            throw std::invalid_argument("term subset not strictly increasing");
    }
}

}  // namespace

int LocalHamInstance::k() const {
    size_t k = 0;
    for (const auto& t : terms) k = std::max(k, t.subset.size());
    return static_cast<int>(k);
}

void LocalHamInstance::validate() const {
    if (n < 1 || n > kMaxConsistencyQubits)
        throw capacity_error("LocalHamInstance: n out of range");
    if (terms.empty()) throw std::invalid_argument("LocalHamInstance: no terms");
    if (b - a < 1e-6) throw std::invalid_argument("LocalHamInstance: threshold gap too small");
    for (const auto& t : terms) {
        check_subset_sorted(t.subset, n);
        if (t.op.dim() != (Eigen::Index(1) << t.subset.size()))
            throw dimension_error("LocalHamInstance: term dim mismatch");
        if (operator_norm(t.op) > 1.0 + 1e-9)
            throw std::invalid_argument("LocalHamInstance: term norm exceeds 1");
    }
}

HermitianOp assemble_hamiltonian(const LocalHamInstance& inst) {
    const Eigen::Index dim = Eigen::Index(1) << inst.n;
    ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
    for (const auto& t : inst.terms)
        add_embedded(t.op.matrix(), t.subset, inst.n, Complex(1.0, 0.0), h);
    return HermitianOp(std::move(h));
}

double ground_energy_exact(const LocalHamInstance& inst) {
    inst.validate();
    return min_eigenvalue(assemble_hamiltonian(inst)).first;
}

Verdict lh_classify_exact(const LocalHamInstance& inst) {
    const double e0 = ground_energy_exact(inst);
    if (e0 <= inst.a) return Verdict::YES;
    if (e0 >= inst.b) return Verdict::NO;
    return Verdict::UNDECIDED;
}

LhToWOptResult lh_to_wopt(const LocalHamInstance& inst) {
    inst.validate();
    const double m = static_cast<double>(inst.terms.size());
    if (std::abs(inst.a) > m + 1e-9 || std::abs(inst.b) > m + 1e-9)
        throw std::invalid_argument("lh_to_wopt: thresholds must satisfy |a|,|b| <= m");

    LhToWOptResult out;
    std::vector<std::vector<int>> subsets;
    for (const auto& t : inst.terms) subsets.push_back(t.subset);
    out.s = LocalPauliSet(inst.n, std::move(subsets));

    const int d = out.s.size();
    out.eta = RealVector::Zero(d);
    out.nu = 0.0;
    for (int i = 0; i < static_cast<int>(inst.terms.size()); ++i) {
        const auto& t = inst.terms[static_cast<size_t>(i)];
        const double scale = 1.0 / static_cast<double>(Eigen::Index(1) << t.subset.size());
        const double nu_i = scale * t.op.trace_real();
        out.nu += nu_i;
        out.term_nus.push_back(nu_i);
        double eta_i_sq = 0.0;
        for (int mi : out.s.members_in_subset(i)) {
            const PauliString& p = out.s.members()[static_cast<size_t>(mi)];
            const double coeff =
                scale * expectation(pauli_matrix(p.restrict_to(t.subset)), t.op);
            out.eta(mi) += coeff;
            eta_i_sq += coeff * coeff;
        }
        out.term_eta_norms.push_back(std::sqrt(eta_i_sq));
    }
    out.eta_norm = out.eta.norm();
    if (out.eta_norm < 1e-12)
        throw degenerate_instance_error(
            "lh_to_wopt: Hamiltonian proportional to the identity; compare nu = " +
            std::to_string(out.nu) + " to the thresholds directly");

    const double sqrt_d = std::sqrt(static_cast<double>(d));
    const double eps = (inst.b - inst.a) / (2.0 * out.eta_norm + m + 2.0 * sqrt_d * m);
    const double gamma =
        -((inst.a - out.nu + 2.0 * eps * sqrt_d * m) / out.eta_norm + eps);
    out.query.c = -out.eta / out.eta_norm;
    out.query.gamma = gamma;
    out.query.epsilon = eps;
    return out;
}

LhPipelineResult solve_lh_via_consistency(const LocalHamInstance& inst,
                                          const LhPipelineOptions& opts) {
    LhPipelineResult res;
    res.mapping = lh_to_wopt(inst);
    const int d = res.mapping.s.size();
    const double dd = static_cast<double>(d);
    const double sqrt_d = std::sqrt(dd);
    const double eps = res.mapping.query.epsilon;
    const double m = static_cast<double>(inst.terms.size());
    const int k = inst.k();

    // Precision ledger: body radii R = sqrt(d), r = 1/sqrt(d) around the origin.
    const double delta_theory = std::pow(eps, 3) / (442368.0 * std::pow(dd, 9));
    const double beta_theory = delta_theory / sqrt_d;
    const double beta_omega =
        std::pow(inst.b - inst.a, 3) /
        (55296000.0 * std::pow(4.0, 11.0 * k) * std::pow(m, 14));
    res.log.note("wopt_epsilon", eps);
    res.log.note("wopt_gamma", res.mapping.query.gamma);
    res.log.note("body_dim", dd);
    res.log.note("body_outer_radius", sqrt_d);
    res.log.note("body_inner_radius", 1.0 / sqrt_d);
    res.log.note("wmem_delta_theory", delta_theory);
    res.log.note("consistency_beta_theory", beta_theory);
    res.log.note("consistency_beta_omega_bound", beta_omega);
    res.log.note("consistency_beta_desk", std::max(delta_theory, kMinGapParameter) / sqrt_d);

    if (opts.engine == LhPipelineEngine::Projection) {
        res.bracket = support_function_bracket(res.mapping.s, res.mapping.query.c,
                                               res.mapping.query.gamma, 0.0, opts.support);
        res.consistency_solves = res.bracket.projections;
        res.log.note("support_lower", res.bracket.lower);
        res.log.note("support_upper", res.bracket.upper);
        res.log.oracle_queries = res.bracket.projections;
        if (res.bracket.lower > res.mapping.query.gamma)
            res.verdict = Verdict::YES;
        else if (res.bracket.upper < res.mapping.query.gamma)
            res.verdict = Verdict::NO;
        else
            res.verdict = Verdict::UNDECIDED;
        return res;
    }

    // Paper-constant chain over the weak membership oracle realized by the
    // consistency solver.
    ConvexBodyParams body{d, sqrt_d, 1.0 / sqrt_d, RealVector::Zero(d)};
    long long queries = 0;
    const MembershipOracle oracle = [&](const RealVector& y, double delta) {
        if (++queries > opts.max_membership_queries) throw budget_exhausted{};
        AlphaVector alpha;
        alpha.values = y;
        KPrimeMembershipStats stats;
        const bool ans = kprime_membership(alpha, res.mapping.s, delta, opts.membership_solve,
                                           &stats);
        return ans;
    };
    try {
        const WeakAnswer ans = wopt_via_wmem(body, oracle, res.mapping.query, &res.log);
        res.verdict = ans == WeakAnswer::YES ? Verdict::YES : Verdict::NO;
    } catch (const budget_exhausted&) {
        res.verdict = Verdict::UNDECIDED;
        res.log.note("membership_budget_exhausted", 1.0);
    }
    res.consistency_solves = queries;
    return res;
}

DualProgramState build_dual_program(const ConsistencyInstance& inst) {
    inst.validate();
    DualProgramState st;
    st.n = inst.n;
    std::vector<std::vector<int>> subsets;
    for (const auto& mg : inst.marginals) subsets.push_back(mg.subset);
    st.s = LocalPauliSet(inst.n, std::move(subsets));
    st.alpha = marginals_to_alpha(inst.marginals, st.s).values;

    const Eigen::Index dim = Eigen::Index(1) << inst.n;
    for (int i = 0; i < st.s.size(); ++i) {
        ComplexMatrix f = pauli_matrix(st.s.members()[static_cast<size_t>(i)]).matrix() -
                          st.alpha(i) * ComplexMatrix::Identity(dim, dim);
        st.f_ops.emplace_back(std::move(f));
    }
    const double dd = static_cast<double>(st.d());
    st.s_lo = 1.0 - 2.0 * dd;
    st.s_hi = 1.0 + 2.0 * dd;
    st.outer_radius = std::sqrt(dd + std::pow(1.0 + 2.0 * dd, 2));
    st.inner_radius = 1.0 / (4.0 * (dd + 1.0));
    return st;
}

HermitianOp dual_pencil(const DualProgramState& st, const RealVector& x) {
    const Eigen::Index dim = Eigen::Index(1) << st.n;
    ComplexMatrix f = ComplexMatrix::Identity(dim, dim);
    for (int i = 0; i < st.d(); ++i) f += x(i) * st.f_ops[static_cast<size_t>(i)].matrix();
    return HermitianOp(std::move(f));
}

double dual_primal_value(const DualProgramState& st, const RealVector& x) {
    const auto ed = eig_hermitian(dual_pencil(st, x));
    return ed.eigenvalues(ed.eigenvalues.size() - 1);
}

double dual_objective(const DualProgramState& st, const HermitianOp& z) {
    double acc = 0.0;
    for (const auto& f : st.f_ops) acc += std::abs(expectation(f, z));
    return 1.0 - acc;
}

DenseSdpResult solve_dual_program_dense(const DualProgramState& st, double tol) {
    const int d = st.d();
    const Eigen::Index dim = Eigen::Index(1) << st.n;
    const int nv = d + 1;  // (x, s)

    RealVector theta = RealVector::Zero(nv);
    theta(d) = 2.0;  // strictly feasible start: F(0) = I < 2I

    const double nu_total = static_cast<double>(dim) + 2.0 * d + 2.0;
    double t = 8.0;
    DenseSdpResult out;

    const auto pencil_gap = [&](const RealVector& th) -> ComplexMatrix {
        RealVector x = th.head(d);
        ComplexMatrix m = th(d) * ComplexMatrix::Identity(dim, dim) - dual_pencil(st, x).matrix();
        return m;
    };
    const auto feasible = [&](const RealVector& th) {
        for (int i = 0; i < d; ++i)
            if (std::abs(th(i)) >= 1.0) return false;
        if (th(d) <= st.s_lo || th(d) >= st.s_hi) return false;
        Eigen::LLT<ComplexMatrix> llt(pencil_gap(th));
        return llt.info() == Eigen::Success;
    };

    while (true) {
        for (int newton = 0; newton < 80; ++newton) {
            out.newton_steps += 1;
            ComplexMatrix m = pencil_gap(theta);
            ComplexMatrix minv = m.inverse();

            RealVector grad = RealVector::Zero(nv);
            RealMatrix hess = RealMatrix::Zero(nv, nv);

            // dM/dx_i = -F_i, dM/ds = I; barrier -logdet(M).
            std::vector<ComplexMatrix> minv_fi(static_cast<size_t>(d));
            for (int i = 0; i < d; ++i)
                minv_fi[static_cast<size_t>(i)] = minv * st.f_ops[static_cast<size_t>(i)].matrix();
            for (int i = 0; i < d; ++i) {
                grad(i) = minv_fi[static_cast<size_t>(i)].trace().real();
                grad(i) += 1.0 / (1.0 - theta(i)) - 1.0 / (1.0 + theta(i));
                for (int j = i; j < d; ++j) {
                    const double hij = (minv_fi[static_cast<size_t>(i)]
                                            .transpose()
                                            .cwiseProduct(minv_fi[static_cast<size_t>(j)])
                                            .sum())
                                           .real();
                    hess(i, j) = hij;
                    hess(j, i) = hij;
                }
                hess(i, i) += 1.0 / std::pow(1.0 - theta(i), 2) + 1.0 / std::pow(1.0 + theta(i), 2);
                const double his = -(minv_fi[static_cast<size_t>(i)] * minv).trace().real();
                hess(i, d) = his;
                hess(d, i) = his;
            }
            grad(d) = t - minv.trace().real() + 1.0 / (st.s_hi - theta(d)) -
                      1.0 / (theta(d) - st.s_lo);
            hess(d, d) = (minv * minv).trace().real() + 1.0 / std::pow(st.s_hi - theta(d), 2) +
                         1.0 / std::pow(theta(d) - st.s_lo, 2);

            RealVector step = hess.ldlt().solve(-grad);
            const double decrement = -grad.dot(step);
            if (!(decrement > 0) || decrement / 2.0 < 1e-14) break;

            double alpha = 1.0;
            while (alpha > 1e-14 && !feasible(theta + alpha * step)) alpha *= 0.5;
            const double f0 = t * theta(d);  // line search on the barrier value
            const auto barrier_value = [&](const RealVector& th) {
                ComplexMatrix mm = pencil_gap(th);
                Eigen::LLT<ComplexMatrix> llt(mm);
                double logdet = 0.0;
                for (Eigen::Index i = 0; i < dim; ++i)
                    logdet += 2.0 * std::log(std::abs(llt.matrixL()(i, i)));
                double v = t * th(d) - logdet;
                for (int i = 0; i < d; ++i)
                    v -= std::log(1.0 - th(i)) + std::log(1.0 + th(i));
                v -= std::log(st.s_hi - th(d)) + std::log(th(d) - st.s_lo);
                return v;
            };
            (void)f0;
            const double base = barrier_value(theta);
            while (alpha > 1e-14 && barrier_value(theta + alpha * step) > base - 1e-14) alpha *= 0.5;
            if (alpha <= 1e-14) break;
            theta += alpha * step;
        }
        if (nu_total / t < tol * 0.5) break;
        t *= 8.0;
        if (t > 1e16) break;
    }

    out.x_opt = theta.head(d);
    out.p_star = dual_primal_value(st, out.x_opt);
    ComplexMatrix minv = pencil_gap(theta).inverse();
    minv /= minv.trace().real();
    out.z_dual = HermitianOp(std::move(minv));
    out.dual_value = dual_objective(st, out.z_dual);
    return out;
}

LocalHamOracle exact_lh_oracle() {
    return [](const LocalHamInstance& inst) { return ground_energy_exact(inst) <= inst.a; };
}

LocalHamInstance negated_pencil_instance(const DualProgramState& st, const RealVector& x,
                                         double a, double b, double* scale_out) {
    if (x.size() != st.d()) throw dimension_error("negated_pencil_instance: x size");
    std::vector<ComplexMatrix> per_subset;
    for (const auto& c : st.s.subsets()) {
        const Eigen::Index ld = Eigen::Index(1) << c.size();
        per_subset.emplace_back(ComplexMatrix::Zero(ld, ld));
    }
    for (int i = 0; i < st.d(); ++i) {
        const int si = st.s.covering_subset(i);
        const auto& c = st.s.subsets()[size_t(si)];
        const Eigen::Index ld = Eigen::Index(1) << c.size();
        per_subset[size_t(si)] -=
            x(i) * (pauli_matrix(st.s.members()[size_t(i)].restrict_to(c)).matrix() -
                    st.alpha(i) * ComplexMatrix::Identity(ld, ld));
    }
    double scale = 1.0;
    for (const auto& m : per_subset)
        scale = std::max(scale, operator_norm(HermitianOp(m)) * 1.000001);
    LocalHamInstance inst;
    inst.n = st.n;
    inst.a = a;
    inst.b = b;
    for (size_t si = 0; si < per_subset.size(); ++si)
        inst.terms.push_back(
            {st.s.subsets()[si], HermitianOp((per_subset[si] / scale).eval())});
    ComplexMatrix mid = -ComplexMatrix::Identity(2, 2) / scale;
    inst.terms.push_back({{1}, HermitianOp(std::move(mid))});
    if (scale_out) *scale_out = scale;
    return inst;
}

namespace {

// Generic pencil minimization min over box of lambda_max(sum x_p F_p + I),
// reading every value through the Local Hamiltonian decision oracle by
// bisection.  F_p is given per coordinate as (subset, local operator).
struct PencilProgram {
    int n = 0;
    std::vector<std::vector<int>> subsets;          // one per distinct subset
    std::vector<std::vector<int>> coords_in_subset; // coordinate ids per subset
    std::vector<HermitianOp> local_ops;             // per coordinate, on its subset
    std::vector<int> coord_subset;                  // subset id per coordinate
    double box_lo = -1.0, box_hi = 1.0;
    bool require_stoquastic = false;
};

struct PencilMinimizer {
    const PencilProgram& prog;
    const LocalHamOracle& oracle;
    long long queries = 0;

    // Local terms of -F(x), grouped per subset, plus the -I term.
    LocalHamInstance negated_instance(const RealVector& x, double a, double b,
                                      double scale) const {
        LocalHamInstance inst;
        inst.n = prog.n;
        inst.a = a;
        inst.b = b;
        for (size_t j = 0; j < prog.subsets.size(); ++j) {
            const auto& c = prog.subsets[j];
            const Eigen::Index ld = Eigen::Index(1) << c.size();
            ComplexMatrix acc = ComplexMatrix::Zero(ld, ld);
            for (int p : prog.coords_in_subset[j])
                acc -= x(p) * prog.local_ops[static_cast<size_t>(p)].matrix();
            inst.terms.push_back({c, HermitianOp((acc / scale).eval())});
        }
        // The constant -I contribution, carried on the first site.
        ComplexMatrix mid = -ComplexMatrix::Identity(2, 2) / scale;
        inst.terms.push_back({{1}, HermitianOp(std::move(mid))});
        return inst;
    }

    double term_norm_bound(const RealVector& x) const {
        double worst = 1.0;
        for (size_t j = 0; j < prog.subsets.size(); ++j) {
            double acc = 0.0;
            for (int p : prog.coords_in_subset[j])
                acc += std::abs(x(p)) * operator_norm(prog.local_ops[static_cast<size_t>(p)]);
            worst = std::max(worst, acc);
        }
        return worst;
    }

    // lambda_max F(x) via oracle bisection on the ground energy of -F(x).
    double value(const RealVector& x, double acc) {
        const double scale = term_norm_bound(x) * 1.000001;
        double range = 1.0;
        for (size_t j = 0; j < prog.subsets.size(); ++j)
            for (int p : prog.coords_in_subset[j])
                range += std::abs(x(p)) * operator_norm(prog.local_ops[static_cast<size_t>(p)]);
        // Ground energy of -F(x) lies in [-range, range].
        double lo = -range, hi = range;
        const double gap = std::max(acc / 2.0, scale * 2e-6);
        while (hi - lo > std::max(acc, 2.5 * gap)) {
            const double mid = 0.5 * (lo + hi);
            LocalHamInstance q =
                negated_instance(x, (mid - gap / 2.0) / scale, (mid + gap / 2.0) / scale, scale);
            if (prog.require_stoquastic) {
                for (const auto& t : q.terms)
                    if (!is_stoquastic(t.op, 1e-9))
                        throw std::logic_error("pencil term lost stoquasticity");
            }
            ++queries;
            if (oracle(q))
                hi = mid + gap / 2.0;  // answer rules out ground >= mid + gap/2
            else
                lo = mid - gap / 2.0;
        }
        return -0.5 * (lo + hi);  // lambda_max F = -ground(-F)
    }
};

struct DescentResult {
    double best_value = 0.0;
    RealVector x_best;
    int steps = 0;
};

DescentResult minimize_pencil(PencilMinimizer& mini, int dim, double value_acc,
                              int max_steps) {
    const double lo = mini.prog.box_lo, hi = mini.prog.box_hi;
    RealVector x = RealVector::Zero(dim);
    for (int i = 0; i < dim; ++i) x(i) = std::clamp(0.0, lo, hi);
    double fx = mini.value(x, value_acc);
    DescentResult res{fx, x, 0};
    const double h = 5e-3;
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss(0.0, 1.0);
    int stall = 0;

    for (int it = 0; it < max_steps; ++it) {
        res.steps = it + 1;
        // Coordinate probes double as a finite-difference gradient.
        RealVector grad = RealVector::Zero(dim);
        double best_probe = fx;
        RealVector best_probe_x = x;
        for (int i = 0; i < dim; ++i) {
            RealVector xp = x, xm = x;
            xp(i) = std::clamp(x(i) + h, lo, hi);
            xm(i) = std::clamp(x(i) - h, lo, hi);
            const double fp = mini.value(xp, value_acc);
            const double fm = mini.value(xm, value_acc);
            grad(i) = (fp - fm) / (xp(i) - xm(i) + 1e-300);
            if (fp < best_probe) { best_probe = fp; best_probe_x = xp; }
            if (fm < best_probe) { best_probe = fm; best_probe_x = xm; }
        }

        // Line search along the projected negative gradient.
        bool improved = false;
        double step = 0.25;
        for (int ls = 0; ls < 18 && !improved; ++ls, step *= 0.5) {
            RealVector cand = x - step * grad;
            for (int i = 0; i < dim; ++i) cand(i) = std::clamp(cand(i), lo, hi);
            const double fc = mini.value(cand, value_acc);
            if (fc < fx - value_acc / 4.0) {
                x = cand;
                fx = fc;
                improved = true;
            }
        }
        if (!improved && best_probe < fx - value_acc / 4.0) {
            x = best_probe_x;
            fx = best_probe;
            improved = true;
        }
        if (!improved) {
            // Random kick out of a possible kink.
            for (int tries = 0; tries < 6 && !improved; ++tries) {
                RealVector dir(dim);
                for (int i = 0; i < dim; ++i) dir(i) = gauss(rng);
                dir.normalize();
                double s = 0.1;
                for (int ls = 0; ls < 8 && !improved; ++ls, s *= 0.5) {
                    RealVector cand = x - s * dir;
                    for (int i = 0; i < dim; ++i) cand(i) = std::clamp(cand(i), lo, hi);
                    const double fc = mini.value(cand, value_acc);
                    if (fc < fx - value_acc / 4.0) {
                        x = cand;
                        fx = fc;
                        improved = true;
                    }
                }
            }
        }
        if (fx < res.best_value) {
            res.best_value = fx;
            res.x_best = x;
        }
        if (!improved && ++stall >= 2) break;
        if (improved) stall = 0;
    }
    return res;
}

}  // namespace

Verdict consistency_to_lh(const ConsistencyInstance& inst, const LocalHamOracle& oracle,
                          ConsistencyToLhReport* report) {
    const DualProgramState st = build_dual_program(inst);
    const int d = st.d();

    PencilProgram prog;
    prog.n = st.n;
    prog.box_lo = -1.0;
    prog.box_hi = 1.0;
    for (int si = 0; si < static_cast<int>(st.s.subsets().size()); ++si) {
        prog.subsets.push_back(st.s.subsets()[static_cast<size_t>(si)]);
        prog.coords_in_subset.emplace_back();
    }
    prog.local_ops.reserve(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) {
        const int si = st.s.covering_subset(i);
        const auto& c = st.s.subsets()[static_cast<size_t>(si)];
        const PauliString& p = st.s.members()[static_cast<size_t>(i)];
        const Eigen::Index ld = Eigen::Index(1) << c.size();
        ComplexMatrix local = pauli_matrix(p.restrict_to(c)).matrix() -
                              st.alpha(i) * ComplexMatrix::Identity(ld, ld);
        prog.local_ops.emplace_back(std::move(local));
        prog.coord_subset.push_back(si);
        prog.coords_in_subset[static_cast<size_t>(si)].push_back(i);
    }

    PencilMinimizer mini{prog, oracle};
    const double beta = inst.beta;
    const double acc = std::min(1e-4, beta / 40.0);
    DescentResult res = minimize_pencil(mini, d, acc, 120);

    Verdict v;
    if (res.best_value <= 1.0 - beta / 2.0)
        v = Verdict::NO;  // p* < 1, so no globally consistent state exists
    else
        v = Verdict::YES;
    if (report) {
        report->verdict = v;
        report->best_primal = res.best_value;
        report->x_best = res.x_best;
        report->oracle_queries = mini.queries;
        report->descent_steps = res.steps;
        report->beta = beta;
    }
    return v;
}

bool is_stoquastic(const HermitianOp& h, double tol) {
    const ComplexMatrix& m = h.matrix();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (i == j) continue;
            if (m(i, j).real() > tol || std::abs(m(i, j).imag()) > tol) return false;
        }
    return true;
}

StoquasticFlag stoquastic_flags(const LocalHamInstance& inst, double tol) {
    StoquasticFlag f;
    for (const auto& t : inst.terms) f.per_term.push_back(is_stoquastic(t.op, tol));
    f.sum = is_stoquastic(assemble_hamiltonian(inst), tol);
    return f;
}

StoqConsistencyReport stoquastic_consistency_oracle(const ConsistencyInstance& inst, double tol,
                                                    const SolveOptions& opts) {
    inst.validate();
    if (inst.n > 8) throw capacity_error("stoquastic_consistency_oracle: n > 8");
    for (const auto& mg : inst.marginals)
        if (mg.rho.matrix().imag().cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("stoquastic_consistency_oracle: marginals must be real");

    const int n = inst.n;
    const Eigen::Index dim = Eigen::Index(1) << n;
    const int m = static_cast<int>(inst.marginals.size());
    const int k = inst.k();
    const double no_threshold = std::pow(inst.beta / (2.0 * std::pow(4.0, k)), 2);

    ComplexMatrix sigma = ComplexMatrix::Identity(dim, dim) / double(dim);
    StoqConsistencyReport rep;
    double best_lower = 0.0;
    double best_viol = std::numeric_limits<double>::infinity();
    ComplexMatrix best_sigma = sigma;

    ComplexMatrix grad(dim, dim);
    for (int t = 0; t < opts.max_iterations; ++t) {
        rep.iterations = t + 1;
        double f = 0.0;
        double viol = 0.0;
        grad.setZero();
        std::vector<RealMatrix> hinges(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) {
            const auto& mg = inst.marginals[static_cast<size_t>(i)];
            RealMatrix shortfall =
                mg.rho.matrix().real() -
                partial_trace_raw(sigma, mg.subset, n).real();
            RealMatrix hinge = shortfall.cwiseMax(0.0);
            hinges[static_cast<size_t>(i)] = hinge;
            f += hinge.squaredNorm();
            viol = std::max(viol, hinge.maxCoeff());
            add_embedded((-2.0 * hinge).cast<Complex>(), mg.subset, n, Complex(1.0, 0.0), grad);
        }
        if (viol < best_viol) {
            best_viol = viol;
            best_sigma = sigma;
        }
        if (viol <= tol) {
            rep.verdict = Verdict::YES;
            rep.max_violation = viol;
            rep.witness = DensityMatrix::unchecked(HermitianOp(sigma));
            rep.certified_objective_lower = best_lower;
            return rep;
        }

        const auto [lmin, u] = min_eigenvalue(HermitianOp(grad));
        const double g_sigma = (grad.transpose().cwiseProduct(sigma)).sum().real();
        const double gap = g_sigma - lmin;
        best_lower = std::max(best_lower, f - gap);
        if (best_lower > no_threshold) {
            rep.verdict = Verdict::NO;
            rep.max_violation = best_viol;
            rep.certified_objective_lower = best_lower;
            return rep;
        }

        // Ternary line search on the convex 1-D slice.
        const ComplexMatrix vertex = u * u.adjoint();
        std::vector<RealMatrix> marg_s(static_cast<size_t>(m)), marg_v(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) {
            const auto& mg = inst.marginals[static_cast<size_t>(i)];
            marg_s[static_cast<size_t>(i)] = partial_trace_raw(sigma, mg.subset, n).real();
            marg_v[static_cast<size_t>(i)] = partial_trace_raw(vertex, mg.subset, n).real();
        }
        const auto f_at = [&](double g) {
            double acc = 0.0;
            for (int i = 0; i < m; ++i) {
                RealMatrix sh = inst.marginals[static_cast<size_t>(i)].rho.matrix().real() -
                                ((1.0 - g) * marg_s[static_cast<size_t>(i)] +
                                 g * marg_v[static_cast<size_t>(i)]);
                acc += sh.cwiseMax(0.0).squaredNorm();
            }
            return acc;
        };
        double a = 0.0, bnd = 1.0;
        for (int it = 0; it < 60; ++it) {
            const double m1 = a + (bnd - a) / 3.0, m2 = bnd - (bnd - a) / 3.0;
            if (f_at(m1) <= f_at(m2))
                bnd = m2;
            else
                a = m1;
        }
        const double step = 0.5 * (a + bnd);
        if (step <= 1e-16) break;
        sigma = ((1.0 - step) * sigma + step * vertex).eval();
    }
    rep.verdict = Verdict::UNDECIDED;
    rep.max_violation = best_viol;
    rep.certified_objective_lower = best_lower;
    rep.witness = DensityMatrix::unchecked(HermitianOp(best_sigma));
    return rep;
}

StoqLhResult stoq_lh_to_stoq_consistency(const LocalHamInstance& inst) {
    inst.validate();
    const StoquasticFlag flags = stoquastic_flags(inst);
    for (bool ok : flags.per_term)
        if (!ok) throw std::invalid_argument("stoq_lh_to_stoq_consistency: non-stoquastic term");

    // Shift each term entrywise nonpositive; the optimum then takes every
    // rho_i equal to the corresponding marginal of sigma, so the program value
    // is the ground energy of the shifted Hamiltonian.
    double shift_total = 0.0;
    LocalHamInstance shifted = inst;
    for (auto& t : shifted.terms) {
        const double dmax = t.op.matrix().real().diagonal().maxCoeff();
        ComplexMatrix m = t.op.matrix() - dmax * ComplexMatrix::Identity(t.op.dim(), t.op.dim());
        // Norm can exceed 1 after shifting; the assembled minimization below
        // does not depend on the per-term bound, so rescale thresholds instead.
        t.op = HermitianOp(std::move(m), 1e-9);
        shift_total += dmax;
    }

    const Eigen::Index dim = Eigen::Index(1) << inst.n;
    ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
    for (const auto& t : shifted.terms)
        add_embedded(t.op.matrix(), t.subset, inst.n, Complex(1.0, 0.0), h);
    const auto [e0, ground] = min_eigenvalue(HermitianOp(std::move(h)));

    StoqLhResult out;
    out.energy_estimate = e0 + shift_total;

    // Wiring check: the minimizing marginals must pass the stoquastic
    // dominance oracle (they dominate themselves).
    ConsistencyInstance check;
    check.n = inst.n;
    check.beta = std::max(1e-3, kMinGapParameter);
    check.max_subset_size = kMaxQubits;
    const ComplexMatrix rho_g = ground * ground.adjoint();
    for (const auto& t : inst.terms) {
        ComplexMatrix mg = partial_trace_raw(rho_g, t.subset, inst.n).real().cast<Complex>();
        check.marginals.push_back({t.subset, HermitianOp(std::move(mg))});
    }
    out.oracle_check = stoquastic_consistency_oracle(check, 1e-7).verdict;

    if (out.energy_estimate <= inst.a)
        out.verdict = Verdict::YES;
    else if (out.energy_estimate >= inst.b)
        out.verdict = Verdict::NO;
    else
        out.verdict = Verdict::UNDECIDED;
    return out;
}

Verdict stoq_consistency_to_stoq_lh(const ConsistencyInstance& inst,
                                    const LocalHamOracle& oracle, StoqDualReport* report) {
    inst.validate();
    for (const auto& mg : inst.marginals)
        if (mg.rho.matrix().imag().cwiseAbs().maxCoeff() > 1e-12)
            throw std::invalid_argument("stoq_consistency_to_stoq_lh: marginals must be real");

    PencilProgram prog;
    prog.n = inst.n;
    prog.box_lo = 0.0;
    prog.box_hi = 1.0;
    prog.require_stoquastic = true;
    int coord = 0;
    for (int si = 0; si < static_cast<int>(inst.marginals.size()); ++si) {
        const auto& mg = inst.marginals[static_cast<size_t>(si)];
        prog.subsets.push_back(mg.subset);
        prog.coords_in_subset.emplace_back();
        const Eigen::Index ld = mg.rho.dim();
        for (Eigen::Index s = 0; s < ld; ++s)
            for (Eigen::Index tt = s; tt < ld; ++tt) {
                ComplexMatrix x = ComplexMatrix::Zero(ld, ld);
                x(s, tt) += 0.5;
                x(tt, s) += 0.5;
                const double target = mg.rho.matrix()(s, tt).real();
                x -= target * ComplexMatrix::Identity(ld, ld);
                prog.local_ops.emplace_back(std::move(x));
                prog.coord_subset.push_back(si);
                prog.coords_in_subset[static_cast<size_t>(si)].push_back(coord++);
            }
    }

    PencilMinimizer mini{prog, oracle};
    const double beta = inst.beta;
    const double acc = std::min(1e-4, beta / 40.0);
    DescentResult res = minimize_pencil(mini, coord, acc, 120);

    const Verdict v = res.best_value <= 1.0 - beta / 2.0 ? Verdict::NO : Verdict::YES;
    if (report) {
        report->verdict = v;
        report->best_primal = res.best_value;
        report->oracle_queries = mini.queries;
    }
    return v;
}

}  // namespace qmarginal
