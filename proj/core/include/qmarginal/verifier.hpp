#pragma once

#include "qmarginal/consistency.hpp"
#include "qmarginal/density.hpp"

#include <random>

namespace qmarginal {

/// Protocol parameters: epsilon = (1/2) beta / 4^k and the register count
/// r = ceil((16/eps^2) ln(8 * 4^k m / eps)).  Recomputed from the instance.
struct VerifierParams {
    double epsilon = 0.0;
    long long registers_theoretical = 0;
    double yes_rejection_bound = 0.0;  // (1/4) eps / (4^k m)
    double no_rejection_bound = 0.0;   // (1/2) eps / (4^k m)

    static VerifierParams from_instance(const ConsistencyInstance& inst);
};

/// Witness on r registers of n qubits: either r independent copies of a
/// per-register state, or an explicit joint density matrix.
struct WitnessState {
    bool product = true;
    DensityMatrix per_register;  // product case, dim 2^n
    DensityMatrix joint;         // entangled case, dim 2^(r n)
    int registers = 0;

    static WitnessState make_product(DensityMatrix sigma, int registers);
    static WitnessState make_entangled(DensityMatrix joint, int registers, int n);
};

double wilson_halfwidth(double p_hat, long long trials, double z = 1.0);

struct VerifierRun {
    double acceptance = 0.0;
    double rejection = 0.0;
    double wilson = 0.0;  // one-z halfwidth of the rejection frequency
    long long trials = 0;
    int registers_used = 0;
    VerifierParams params;
};

/// Samples the protocol: pick (i, Q) uniformly, measure Q on every register
/// (exact Born distribution; sequential conditioning for entangled witnesses),
/// accept when the empirical mean sits within epsilon of Tr(Q rho_i).
VerifierRun run_consistency_verifier(const ConsistencyInstance& inst, const WitnessState& witness,
                                     long long trials, std::mt19937_64& rng);

struct MarkovCheck {
    VerifierRun run;
    bool above_bound = false;     // rejection >= no_rejection_bound - 3 widths
    double mean_identity_dev = 0.0;  // max |E(Y) - Tr((Q x I) tau*)| over (i, Q)
};

/// Runs the verifier on each adversarial witness of a NO instance and checks
/// the Markov rejection bound plus the averaged-register mean identity.
std::vector<MarkovCheck> markov_soundness_experiment(const ConsistencyInstance& inst,
                                                     const std::vector<WitnessState>& witnesses,
                                                     long long trials, std::mt19937_64& rng);

struct SwapTestRun {
    double freq0 = 0.0;
    double exact_p0 = 0.0;  // 1/2 + 1/2 Tr(nu eta)
    double wilson = 0.0;
    long long trials = 0;
};

SwapTestRun swap_test(const DensityMatrix& nu, const DensityMatrix& eta, long long trials,
                      std::mt19937_64& rng);

}  // namespace qmarginal
