#pragma once

#include "qmarginal/hermitian.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qmarginal {

/// Geometry record of a convex body K: S(p, r) <= K <= S(0, R).
struct ConvexBodyParams {
    int dim = 0;
    double outer_radius = 0.0;  // R
    double inner_radius = 0.0;  // r
    RealVector center;          // p

    void validate() const;
};

/// Weak membership callback: must answer YES on S(K,-delta) and NO outside
/// S(K,delta); answers in the shell are unconstrained.
using MembershipOracle = std::function<bool(const RealVector& point, double delta)>;

struct ReductionLog {
    long long oracle_queries = 0;
    std::vector<std::pair<std::string, double>> params;

    void note(const std::string& key, double value) { params.emplace_back(key, value); }
    std::optional<double> get(const std::string& key) const {
        for (auto it = params.rbegin(); it != params.rend(); ++it)
            if (it->first == key) return it->second;
        return std::nullopt;
    }
};

enum class SeparationTag { INSIDE, CUT };

struct SeparationAnswer {
    SeparationTag tag = SeparationTag::INSIDE;
    RealVector cut_normal;  // unit vector when tag == CUT
};

struct WOptQuery {
    RealVector c;        // unit objective direction
    double gamma = 0.0;  // threshold
    double epsilon = 0.0;
};

enum class WeakAnswer { YES, NO };

struct convergence_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One-sided membership from two-sided membership: answers NO outright when
/// ||y - p|| >= 2R, otherwise queries the inner oracle at the point pulled
/// toward the center, with delta' = r * delta / (4R).
bool wmem1_via_wmem(const ConvexBodyParams& body, const MembershipOracle& oracle,
                    const RealVector& y, double delta, ReductionLog* log = nullptr);

/// Cone-separation from one-sided membership: iterative regular-simplex search.
/// On CUT the normal c satisfies c.x <= c.y + delta + beta * ||x - y|| for all
/// x in K.
SeparationAnswer wsep_cone_via_wmem1(const ConvexBodyParams& body,
                                     const MembershipOracle& one_sided, const RealVector& y,
                                     double delta, double beta_slope,
                                     ReductionLog* log = nullptr);

/// Weak separation from weak membership (slope beta = eps / 4R, cone at
/// delta = eps/2); immediately cuts along y/||y|| when ||y|| > R.
SeparationAnswer wsep_via_wmem(const ConvexBodyParams& body, const MembershipOracle& oracle,
                               const RealVector& y, double eps, ReductionLog* log = nullptr);

/// Weak optimization from weak separation: the perceptron walk over
/// K intersected with {c.x >= gamma}, step eps - 2*delta, delta = eps/3.
WeakAnswer wopt_via_wsep(const ConvexBodyParams& body,
                         const std::function<SeparationAnswer(const RealVector&, double)>& sep,
                         const WOptQuery& q, ReductionLog* log = nullptr,
                         std::vector<RealVector>* z_trace = nullptr);

/// Full composition WOPT -> WSEP -> WMEM^1 -> WMEM.  The required membership
/// precision r^3 eps^3 / (442368 d^5 R^5) is recorded in the log.
WeakAnswer wopt_via_wmem(const ConvexBodyParams& body, const MembershipOracle& oracle,
                         const WOptQuery& q, ReductionLog* log = nullptr,
                         std::vector<RealVector>* z_trace = nullptr);

/// Starred variant: maps the no-slack optimization problem to the interior one
/// at eps' = eps * r / 4R, then runs the composition; a starred membership
/// oracle is already a valid weak membership oracle.
WeakAnswer wopt_star_via_wmem_star(const ConvexBodyParams& body, const MembershipOracle& star,
                                   const WOptQuery& q, ReductionLog* log = nullptr);

}  // namespace qmarginal
