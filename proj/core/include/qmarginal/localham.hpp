#pragma once

#include "qmarginal/consistency.hpp"
#include "qmarginal/oracle_geometry.hpp"

#include <functional>

namespace qmarginal {

struct LocalHamTerm {
    std::vector<int> subset;  // 1-based, strictly increasing
    HermitianOp op;           // operator norm <= 1
};

struct LocalHamInstance {
    int n = 0;
    std::vector<LocalHamTerm> terms;
    double a = 0.0;
    double b = 0.0;

    int k() const;
    void validate() const;
};

HermitianOp assemble_hamiltonian(const LocalHamInstance& inst);

/// Smallest eigenvalue of the assembled Hamiltonian (n <= 10).
double ground_energy_exact(const LocalHamInstance& inst);

/// Exact-diagonalization classification against the (a, b) thresholds.
Verdict lh_classify_exact(const LocalHamInstance& inst);

struct degenerate_instance_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mapping of a Local Hamiltonian instance onto a weak-optimization query over
/// the body of consistent local-Pauli expectation vectors.
struct LhToWOptResult {
    LocalPauliSet s;
    WOptQuery query;           // c = -eta/||eta||, gamma, epsilon
    RealVector eta;            // objective coefficients per member of s
    double eta_norm = 0.0;
    double nu = 0.0;           // identity component of the energy
    std::vector<double> term_eta_norms;
    std::vector<double> term_nus;
};

LhToWOptResult lh_to_wopt(const LocalHamInstance& inst);

enum class LhPipelineEngine {
    /// Projected-ascent support-function bracketing; every projection is one
    /// consistency solve.  Sound bracket, desk-scale fast.
    Projection,
    /// Paper-constant perceptron/cone chain over the weak membership oracle.
    /// Correct but its iteration counts are astronomical except at tiny
    /// dimensions; budget exhaustion reports UNDECIDED.
    SimpleReduction,
};

struct LhPipelineOptions {
    LhPipelineEngine engine = LhPipelineEngine::Projection;
    SupportFunctionOptions support;
    SolveOptions membership_solve;
    long long max_membership_queries = 20000;
};

struct LhPipelineResult {
    Verdict verdict = Verdict::UNDECIDED;
    ReductionLog log;
    SupportFunctionBracket bracket;
    long long consistency_solves = 0;
    LhToWOptResult mapping;
};

/// End-to-end Local Hamiltonian decision through the consistency machinery.
LhPipelineResult solve_lh_via_consistency(const LocalHamInstance& inst,
                                          const LhPipelineOptions& opts = {});

/// Dual-program data for the reverse reduction: observables F_P = P - alpha_P I
/// and the matrix pencil F(x) = sum x_P F_P + I over x in [-1,1]^d.
struct DualProgramState {
    LocalPauliSet s;
    RealVector alpha;                 // target expectations
    std::vector<HermitianOp> f_ops;   // full-space F_P, 2^n dimensional
    double s_lo = 0.0, s_hi = 0.0;    // allowed objective interval [1-2d, 1+2d]
    double outer_radius = 0.0;        // sqrt(d + (1+2d)^2)
    double inner_radius = 0.0;        // 1/(4(d+1)) around (0,...,0,2)
    int n = 0;

    int d() const { return static_cast<int>(f_ops.size()); }
};

DualProgramState build_dual_program(const ConsistencyInstance& inst);

HermitianOp dual_pencil(const DualProgramState& st, const RealVector& x);

/// lambda_max F(x): the primal objective at x.
double dual_primal_value(const DualProgramState& st, const RealVector& x);

/// Dual objective g(Z) = 1 - sum_P |Tr(Z F_P)| for a unit-trace PSD Z;
/// a lower bound on the primal optimum by weak duality.
double dual_objective(const DualProgramState& st, const HermitianOp& z);

/// Dense log-barrier Newton solve of min { s : F(x) <= s I } over the box;
/// returns the primal optimum, the minimizer, and a feasible dual witness.
struct DenseSdpResult {
    double p_star = 0.0;
    RealVector x_opt;
    double dual_value = 0.0;  // g at the barrier's dual candidate
    HermitianOp z_dual;
    int newton_steps = 0;
};

DenseSdpResult solve_dual_program_dense(const DualProgramState& st, double tol = 1e-9);

/// The pencil -F(x) packaged as a Local Hamiltonian instance: terms grouped per
/// subset and rescaled so every term norm is at most 1; a and b are thresholds
/// in the rescaled units.
LocalHamInstance negated_pencil_instance(const DualProgramState& st, const RealVector& x,
                                         double a, double b, double* scale_out = nullptr);

/// Decision oracle contract for Local Hamiltonian: true iff the instance has an
/// eigenvalue <= a (the YES case).
using LocalHamOracle = std::function<bool(const LocalHamInstance&)>;

LocalHamOracle exact_lh_oracle();

struct ConsistencyToLhReport {
    Verdict verdict = Verdict::UNDECIDED;
    double best_primal = 0.0;   // best lambda_max F(x) found
    RealVector x_best;
    long long oracle_queries = 0;
    int descent_steps = 0;
    double beta = 0.0;
};

/// Reverse reduction: decides consistency through a Local Hamiltonian decision
/// oracle by minimizing lambda_max F(x) over the box, with every value read
/// off the oracle by bisection.  p* >= 1 means consistent, p* <= 1 - beta
/// inconsistent.
Verdict consistency_to_lh(const ConsistencyInstance& inst,
                          const LocalHamOracle& oracle = exact_lh_oracle(),
                          ConsistencyToLhReport* report = nullptr);

/// Entrywise test in the standard basis.
struct StoquasticFlag {
    std::vector<bool> per_term;
    bool sum = false;
};

bool is_stoquastic(const HermitianOp& h, double tol = 1e-12);
StoquasticFlag stoquastic_flags(const LocalHamInstance& inst, double tol = 1e-12);

/// Feasibility of "exists sigma whose marginals dominate rho_i entrywise";
/// squared-hinge penalty Frank-Wolfe over real density matrices.
struct StoqConsistencyReport {
    Verdict verdict = Verdict::UNDECIDED;
    double max_violation = 0.0;
    double certified_objective_lower = 0.0;
    int iterations = 0;
    std::optional<DensityMatrix> witness;
};

StoqConsistencyReport stoquastic_consistency_oracle(const ConsistencyInstance& inst, double tol,
                                                    const SolveOptions& opts = {});

/// Stoquastic Local Hamiltonian -> stoquastic consistency program: shifts the
/// terms entrywise nonpositive, minimizes the linear objective over dominated
/// marginals, and checks the minimizer through the oracle.
struct StoqLhResult {
    Verdict verdict = Verdict::UNDECIDED;
    double energy_estimate = 0.0;
    Verdict oracle_check = Verdict::UNDECIDED;
};

StoqLhResult stoq_lh_to_stoq_consistency(const LocalHamInstance& inst);

/// Stoquastic consistency -> stoquastic Local Hamiltonian via the nonnegative
/// dual pencil: F_p built from symmetrized matrix units, x restricted to
/// [0,1]^d, -F(x) checked stoquastic before every oracle call.
struct StoqDualReport {
    Verdict verdict = Verdict::UNDECIDED;
    double best_primal = 0.0;
    long long oracle_queries = 0;
};

Verdict stoq_consistency_to_stoq_lh(const ConsistencyInstance& inst,
                                    const LocalHamOracle& oracle = exact_lh_oracle(),
                                    StoqDualReport* report = nullptr);

}  // namespace qmarginal
