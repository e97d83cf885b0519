#include "qmarginal/verifier.hpp"

#include <cmath>

namespace qmarginal {

VerifierParams VerifierParams::from_instance(const ConsistencyInstance& inst) {
    inst.validate();
    const double four_k = std::pow(4.0, inst.k());
    const double m = static_cast<double>(inst.marginals.size());
    VerifierParams p;
    p.epsilon = 0.5 * inst.beta / four_k;
    p.registers_theoretical = static_cast<long long>(
        std::ceil((16.0 / (p.epsilon * p.epsilon)) * std::log(8.0 * four_k * m / p.epsilon)));
    p.yes_rejection_bound = 0.25 * p.epsilon / (four_k * m);
    p.no_rejection_bound = 0.5 * p.epsilon / (four_k * m);
    return p;
}

WitnessState WitnessState::make_product(DensityMatrix sigma, int registers) {
    WitnessState w;
    w.product = true;
    w.per_register = std::move(sigma);
    w.registers = registers;
    return w;
}

WitnessState WitnessState::make_entangled(DensityMatrix joint, int registers, int n) {
    WitnessState w;
    w.product = false;
    w.registers = registers;
    if (joint.dim() != (Eigen::Index(1) << (registers * n)))
        throw dimension_error("WitnessState: joint dim does not match r registers of n qubits");
    if (registers * n > 13)
        throw capacity_error("WitnessState: dense entangled witness capped at 13 total qubits");
    w.joint = std::move(joint);
    return w;
}

double wilson_halfwidth(double p_hat, long long trials, double z) {
    const double n = static_cast<double>(trials);
    const double denom = 1.0 + z * z / n;
    return z * std::sqrt(p_hat * (1.0 - p_hat) / n + z * z / (4.0 * n * n)) / denom;
}

namespace {

// All Pauli words on a subset, as words over the subset's own qubits.
std::vector<PauliString> subset_words(size_t k) {
    const char letters[4] = {'I', 'X', 'Y', 'Z'};
    size_t count = 1;
    for (size_t i = 0; i < k; ++i) count *= 4;
    std::vector<PauliString> out;
    out.reserve(count);
    for (size_t code = 0; code < count; ++code) {
        std::string w(k, 'I');
        size_t rest = code;
        for (size_t i = 0; i < k; ++i) {
            w[i] = letters[rest % 4];
            rest /= 4;
        }
        out.emplace_back(std::move(w));
    }
    return out;
}

struct ChoicePrep {
    double target = 0.0;            // Tr(Q rho_i)
    double product_mean = 0.0;      // Tr(Q sigma_marg) for product witnesses
    std::vector<ComplexMatrix> projectors_plus;  // per register, entangled case
};

}  // namespace

VerifierRun run_consistency_verifier(const ConsistencyInstance& inst, const WitnessState& witness,
                                     long long trials, std::mt19937_64& rng) {
    inst.validate();
    if (trials < 1) throw std::invalid_argument("run_consistency_verifier: trials < 1");
    const VerifierParams params = VerifierParams::from_instance(inst);
    const int n = inst.n;
    const int r = witness.registers;
    const int m = static_cast<int>(inst.marginals.size());

    // Per (i, word) preparation.
    std::vector<std::vector<ChoicePrep>> prep(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        const auto& mg = inst.marginals[size_t(i)];
        const auto words = subset_words(mg.subset.size());
        prep[size_t(i)].resize(words.size());
        HermitianOp sigma_marg;
        if (witness.product)
            sigma_marg = partial_trace(witness.per_register.op(), mg.subset, n);
        for (size_t w = 0; w < words.size(); ++w) {
            ChoicePrep& cp = prep[size_t(i)][w];
            const HermitianOp q = pauli_matrix(words[w]);
            cp.target = expectation(q, mg.rho);
            if (witness.product) {
                cp.product_mean = expectation(q, sigma_marg);
            } else {
                // Projector onto the +1 eigenspace of Q on register j.
                const Eigen::Index qdim = q.dim();
                const ComplexMatrix plus =
                    0.5 * (ComplexMatrix::Identity(qdim, qdim) + q.matrix());
                for (int j = 0; j < r; ++j) {
                    std::vector<int> sites;
                    for (int s : mg.subset) sites.push_back(j * n + s);
                    cp.projectors_plus.push_back(
                        embed(HermitianOp(plus), sites, r * n).matrix());
                }
            }
        }
    }

    std::uniform_int_distribution<int> pick_i(0, m - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    long long accepted = 0;
    for (long long t = 0; t < trials; ++t) {
        const int i = pick_i(rng);
        const auto& words = prep[size_t(i)];
        const int q = static_cast<int>(rng() % words.size());
        const ChoicePrep& cp = words[size_t(q)];

        double sum = 0.0;
        if (witness.product) {
            const double p_plus = 0.5 * (1.0 + cp.product_mean);
            for (int j = 0; j < r; ++j) sum += unif(rng) < p_plus ? 1.0 : -1.0;
        } else {
            ComplexMatrix tau = witness.joint.matrix();
            for (int j = 0; j < r; ++j) {
                const ComplexMatrix& pp = cp.projectors_plus[size_t(j)];
                const double p_plus =
                    std::clamp((pp.transpose().cwiseProduct(tau)).sum().real(), 0.0, 1.0);
                const bool up = unif(rng) < p_plus;
                ComplexMatrix proj =
                    up ? pp
                       : ComplexMatrix(ComplexMatrix::Identity(tau.rows(), tau.cols()) - pp);
                const double norm = up ? p_plus : 1.0 - p_plus;
                if (norm < 1e-15) {
                    tau.setZero();  // unreachable branch of an exact projector
                } else {
                    tau = (proj * tau * proj / norm).eval();
                }
                sum += up ? 1.0 : -1.0;
            }
        }
        const double y = sum / static_cast<double>(r);
        if (std::abs(y - cp.target) <= params.epsilon) ++accepted;
    }

    VerifierRun run;
    run.trials = trials;
    run.registers_used = r;
    run.params = params;
    run.acceptance = static_cast<double>(accepted) / static_cast<double>(trials);
    run.rejection = 1.0 - run.acceptance;
    run.wilson = wilson_halfwidth(run.rejection, trials);
    return run;
}

std::vector<MarkovCheck> markov_soundness_experiment(const ConsistencyInstance& inst,
                                                     const std::vector<WitnessState>& witnesses,
                                                     long long trials, std::mt19937_64& rng) {
    const int n = inst.n;
    std::vector<MarkovCheck> out;
    for (const auto& w : witnesses) {
        MarkovCheck chk;
        chk.run = run_consistency_verifier(inst, w, trials, rng);
        chk.above_bound =
            chk.run.rejection >= chk.run.params.no_rejection_bound - 3.0 * chk.run.wilson;

        // Exact identity E(Y) = Tr((Q x I) tau*) with tau* the register average.
        const int r = w.registers;
        double worst = 0.0;
        HermitianOp tau_star;
        if (w.product) {
            tau_star = w.per_register.op();
        } else {
            ComplexMatrix acc =
                ComplexMatrix::Zero(Eigen::Index(1) << n, Eigen::Index(1) << n);
            for (int j = 0; j < r; ++j) {
                std::vector<int> keep;
                for (int s = 1; s <= n; ++s) keep.push_back(j * n + s);
                acc += partial_trace(w.joint.op(), keep, r * n).matrix();
            }
            tau_star = HermitianOp((acc / double(r)).eval());
        }
        for (const auto& mg : inst.marginals) {
            const auto words = subset_words(mg.subset.size());
            for (const auto& word : words) {
                const HermitianOp q = pauli_matrix(word);
                // E(Y) computed register by register.
                double mean = 0.0;
                if (w.product) {
                    mean = expectation(q, partial_trace(w.per_register.op(), mg.subset, n));
                } else {
                    for (int j = 0; j < r; ++j) {
                        std::vector<int> sites;
                        for (int s : mg.subset) sites.push_back(j * n + s);
                        mean += expectation(embed(q, sites, r * n),
                                            w.joint.op());
                    }
                    mean /= double(r);
                }
                const double via_tau_star =
                    expectation(q, partial_trace(tau_star, mg.subset, n));
                worst = std::max(worst, std::abs(mean - via_tau_star));
            }
        }
        chk.mean_identity_dev = worst;
        out.push_back(std::move(chk));
    }
    return out;
}

SwapTestRun swap_test(const DensityMatrix& nu, const DensityMatrix& eta, long long trials,
                      std::mt19937_64& rng) {
    if (nu.dim() != eta.dim()) throw dimension_error("swap_test: dimension mismatch");
    SwapTestRun run;
    run.trials = trials;
    run.exact_p0 =
        0.5 + 0.5 * (nu.matrix().transpose().cwiseProduct(eta.matrix())).sum().real();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    long long zeros = 0;
    for (long long t = 0; t < trials; ++t)
        if (unif(rng) < run.exact_p0) ++zeros;
    run.freq0 = static_cast<double>(zeros) / static_cast<double>(trials);
    run.wilson = wilson_halfwidth(run.freq0, trials);
    return run;
}

}  // namespace qmarginal
