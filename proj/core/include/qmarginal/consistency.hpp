#pragma once

#include "qmarginal/alpha.hpp"
#include "qmarginal/density.hpp"
#include "qmarginal/pauli.hpp"

#include <optional>
#include <vector>

namespace qmarginal {

inline constexpr int kMaxConsistencyQubits = 10;
inline constexpr double kMinGapParameter = 1e-6;

struct ConsistencyInstance {
    int n = 0;
    std::vector<SubsetMarginal> marginals;
    double beta = 0.0;
    int max_subset_size = 2;

    int k() const;
    void validate() const;
};

enum class Verdict { YES, NO, UNDECIDED };

const char* to_string(Verdict v);

struct FeasibilityReport {
    Verdict verdict = Verdict::UNDECIDED;
    /// Achieved max-over-subsets trace-norm residual of the best iterate.
    double residual = 0.0;
    std::vector<double> subset_residuals;
    std::optional<DensityMatrix> witness;
    /// Certified lower bound on the minimum of the squared-Frobenius objective.
    double certified_objective_lower = 0.0;
    /// NO fires when certified_objective_lower exceeds this.
    double no_threshold = 0.0;
    /// Gradient operator at the certifying iterate (dual direction) on NO.
    std::optional<HermitianOp> certificate_direction;
    int iterations = 0;
    double objective = 0.0;
    double intersection_gap = 0.0;
};

struct SolveOptions {
    double tol = 1e-6;
    int max_iterations = 5000;
    /// Exact line search on the quadratic objective; false uses 2/(t+2).
    bool line_search = true;
    /// Projection backend only: stop once the certified optimality gap of the
    /// squared-distance objective falls below this.
    double gap_tol = 1e-10;
    std::optional<ComplexMatrix> initial;
    /// When set, receives the objective value at every iteration.
    std::vector<double>* objective_trace = nullptr;
};

/// Frank-Wolfe feasibility solve: minimize sum_i ||Tr_rest(sigma) - rho_i||_F^2
/// over density matrices.  The linear step is one extreme eigenvector of the
/// gradient.  YES when the l1 residual reaches tol, NO when the duality-gap
/// lower bound certifies min f > (beta / (2*4^k))^2, UNDECIDED at the cap.
FeasibilityReport solve_consistency_exact(const ConsistencyInstance& inst,
                                          const SolveOptions& opts = {});

/// Wraps the solver and adds the intersection-agreement diagnostic.
FeasibilityReport classify_instance(const ConsistencyInstance& inst,
                                    const SolveOptions& opts = {});

/// Weak membership oracle for the body of consistent expectation vectors:
/// converts alpha to marginals, solves, and answers YES iff the achieved
/// residual is at most beta/2 with beta = delta/sqrt(d).  delta below the
/// solver's domain floor is clamped to it.
struct KPrimeMembershipStats {
    double beta_used = 0.0;
    double delta_requested = 0.0;
    bool delta_clamped = false;
    double residual = 0.0;
    int iterations = 0;
};

bool kprime_membership(const AlphaVector& alpha, const LocalPauliSet& s, double delta,
                       const SolveOptions& opts = {}, KPrimeMembershipStats* stats = nullptr);

/// Least-squares projection of a target expectation vector onto the consistent
/// body, in the subset-weighted metric the solver minimizes.
struct ProjectionResult {
    AlphaVector projected;
    DensityMatrix sigma;
    double objective = 0.0;       // weighted squared distance at the iterate
    double objective_gap = 0.0;   // certified optimality gap of the solve
    int iterations = 0;
};

ProjectionResult project_onto_consistent_set(const AlphaVector& target, const LocalPauliSet& s,
                                             const SolveOptions& opts = {});

/// Diagonal of the metric the projection minimizes: w_P = sum over covering
/// subsets of 2^{-|C_i|}.
RealVector projection_metric_weights(const LocalPauliSet& s);

/// Two-sided bracket of the support function h(c) = max { c.alpha : alpha
/// consistent }, computed by projected ascent where every projection is one
/// consistency solve.  Stops as soon as the bracket clears `gamma` by
/// `margin`, or when the budget runs out.
struct SupportFunctionBracket {
    double lower = 0.0;
    double upper = 0.0;
    int ascent_steps = 0;
    long long solver_iterations = 0;
    int projections = 0;
    RealVector last_point;  // final feasible iterate (a consistent alpha)
};

struct SupportFunctionOptions {
    int max_ascent_steps = 4000;
    double step = 0.0;  // 0: default sqrt(d)
    SolveOptions projection;
};

SupportFunctionBracket support_function_bracket(const LocalPauliSet& s, const RealVector& c,
                                                double gamma, double margin,
                                                const SupportFunctionOptions& opts = {});

}  // namespace qmarginal
