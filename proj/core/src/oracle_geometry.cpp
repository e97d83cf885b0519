#include "qmarginal/oracle_geometry.hpp"

#include <cmath>

namespace qmarginal {

namespace {

double clamp_unit_interval(double x, const char* name, ReductionLog* log) {
    if (x > 0.0 && x < 1.0) return x;
    const double clamped = std::min(std::max(x, 1e-12), 1.0 - 1e-12);
    if (log) log->note(std::string(name) + "_clamped_from", x);
    return clamped;
}

bool query(const MembershipOracle& oracle, const RealVector& y, double delta, ReductionLog* log) {
    if (log) log->oracle_queries += 1;
    return oracle(y, delta);
}

}  // namespace

void ConvexBodyParams::validate() const {
    if (dim < 1) throw dimension_error("ConvexBodyParams: dim < 1");
    if (!(inner_radius > 0.0) || inner_radius > outer_radius)
        throw std::invalid_argument("ConvexBodyParams: need 0 < r <= R");
    if (center.size() != dim) throw dimension_error("ConvexBodyParams: center size");
}

bool wmem1_via_wmem(const ConvexBodyParams& body, const MembershipOracle& oracle,
                    const RealVector& y, double delta, ReductionLog* log) {
    body.validate();
    const double R = body.outer_radius;
    const double delta_prime = body.inner_radius * delta / (4.0 * R);
    if (log) log->note("wmem1_delta_prime", delta_prime);
    if ((y - body.center).norm() >= 2.0 * R) return false;
    const RealVector pulled = (1.0 - delta / (4.0 * R)) * y + (delta / (4.0 * R)) * body.center;
    return query(oracle, pulled, delta_prime, log);
}

SeparationAnswer wsep_cone_via_wmem1(const ConvexBodyParams& body,
                                     const MembershipOracle& one_sided, const RealVector& y,
                                     double delta, double beta_slope, ReductionLog* log) {
    body.validate();
    const int d = body.dim;
    if (d < 2) throw dimension_error("wsep_cone_via_wmem1: need dim >= 2");
    const double R = body.outer_radius;
    const double r = body.inner_radius;
    delta = clamp_unit_interval(delta, "cone_delta", log);
    const double beta = clamp_unit_interval(beta_slope, "cone_beta", log);

    const double dd = static_cast<double>(d);
    const double delta1 = r * delta / (R + r);
    const double r1 = r * delta1 / (4.0 * dd * R);
    const double eps1 = beta * beta * r1 / (16.0 * dd * dd * dd * dd);
    const double sin_a = 1.0 / std::sqrt(1.0 + 16.0 * std::pow(dd, 4) / (beta * beta));
    const double cos_a = 1.0 / std::sqrt(1.0 + beta * beta / (16.0 * std::pow(dd, 4)));
    if (log) {
        log->note("cone_delta1", delta1);
        log->note("cone_r1", r1);
        log->note("cone_epsilon1", eps1);
        log->note("cone_alpha", std::atan2(sin_a, cos_a));
    }

    if (query(one_sided, y, eps1, log)) return {SeparationTag::INSIDE, {}};

    // Binary search between y (outside) and the center (inside).
    RealVector v_out = y;
    RealVector v_in = body.center;
    const double target = delta1 / (2.0 * dd);
    int steps = 0;
    while ((v_out - v_in).norm() > target) {
        if (++steps > 64)
            throw convergence_failure("wsep_cone_via_wmem1: binary search exceeded 64 steps");
        const RealVector mid = 0.5 * (v_out + v_in);
        if (query(one_sided, mid, eps1, log))
            v_in = mid;
        else
            v_out = mid;
    }

    const RealVector origin =
        ((r - r1) * v_in + (r1 + eps1) * body.center) / (r + eps1);
    RealVector v = v_out - origin;

    // Iteration budget: ||v|| shrinks by cos(alpha) per round, from below
    // delta1 down to r1 at worst.
    const double log_shrink = -0.5 * std::log1p(-sin_a * sin_a);
    const double cap_d = std::log(std::max(delta1 / r1, 2.0)) / std::max(log_shrink, 1e-300) + 8.0;
    const long long cap = cap_d > 9e17 ? (long long)9e17 : (long long)cap_d;

    // Regular simplex directions from the standard basis, rotated so the
    // all-ones direction aligns with v, then scaled to put the center at
    // cos^2(a) v with vertex angle a.
    const double inv_sqrt_d = 1.0 / std::sqrt(dd);
    RealVector u_hat = RealVector::Constant(d, inv_sqrt_d);

    long long iter = 0;
    while (true) {
        if (++iter > cap)
            throw convergence_failure("wsep_cone_via_wmem1: simplex loop exceeded iteration cap");
        const double vn = v.norm();
        if (vn < 1e-300)
            throw convergence_failure("wsep_cone_via_wmem1: search direction collapsed");
        RealVector v_hat = v / vn;

        // Rotation Q = A + I - P within span(u_hat, v_hat); skipped when the
        // two directions nearly coincide, reflection when nearly opposite.
        RealVector w = v_hat - (v_hat.dot(u_hat)) * u_hat;
        const double wn = w.norm();
        const bool skip_rotation = (u_hat - v_hat).norm() <= 1e-8;
        const bool reflect = !skip_rotation && wn < 1e-12;
        RealVector w_hat = wn > 1e-12 ? RealVector(w / wn) : RealVector(RealVector::Zero(d));
        const double a_coef = v_hat.dot(u_hat);  // cos of the rotation angle
        const double b_coef = wn;

        const double radial = std::sqrt(dd) * cos_a * cos_a * vn;
        const double lateral = sin_a * cos_a * vn / std::sqrt(1.0 - 1.0 / dd);

        bool all_inside = true;
        RealVector vertex(d), rotated(d);
        for (int i = 0; i < d; ++i) {
            RealVector e = RealVector::Zero(d);
            e(i) = 1.0;
            if (skip_rotation) {
                rotated = e;
            } else if (reflect) {
                rotated = e - 2.0 * u_hat.dot(e) * u_hat;
            } else {
                const double ue = u_hat.dot(e);
                const double we = w_hat.dot(e);
                rotated = e + ue * v_hat + we * (-b_coef * u_hat + a_coef * w_hat) -
                          ue * u_hat - we * w_hat;
            }
            const double along = v_hat.dot(rotated);
            vertex = radial * along * v_hat + lateral * (rotated - along * v_hat);
            if (!query(one_sided, vertex + origin, eps1, log)) {
                v = vertex;
                all_inside = false;
                break;
            }
        }
        if (all_inside) {
            if (log) log->note("cone_iterations", static_cast<double>(iter));
            return {SeparationTag::CUT, v / v.norm()};
        }
    }
}

SeparationAnswer wsep_via_wmem(const ConvexBodyParams& body, const MembershipOracle& oracle,
                               const RealVector& y, double eps, ReductionLog* log) {
    body.validate();
    const double R = body.outer_radius;
    const double r = body.inner_radius;
    const double dd = static_cast<double>(body.dim);
    eps = clamp_unit_interval(eps, "wsep_eps", log);

    if (log) {
        log->note("wsep_beta_slope", eps / (4.0 * R));
        log->note("wmem_delta_bound",
                  std::pow(r, 3) * std::pow(eps, 3) / (16384.0 * std::pow(dd, 5) * std::pow(R, 5)));
    }
    if (y.norm() > R) return {SeparationTag::CUT, y / y.norm()};

    const MembershipOracle one_sided = [&](const RealVector& pt, double dlt) {
        return wmem1_via_wmem(body, oracle, pt, dlt, log);
    };
    return wsep_cone_via_wmem1(body, one_sided, y, eps / 2.0, eps / (4.0 * R), log);
}

WeakAnswer wopt_via_wsep(const ConvexBodyParams& body,
                         const std::function<SeparationAnswer(const RealVector&, double)>& sep,
                         const WOptQuery& q, ReductionLog* log,
                         std::vector<RealVector>* z_trace) {
    body.validate();
    if (std::abs(q.c.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("wopt_via_wsep: objective direction must be unit");
    const double eps = q.epsilon;
    const double delta = eps / 3.0;
    const double step = eps - 2.0 * delta;
    const double R = body.outer_radius;
    const double cap_d = std::ceil(R * R / (step * step));
    const long long cap = cap_d > 9e17 ? (long long)9e17 : (long long)cap_d;
    if (log) {
        log->note("perceptron_delta", delta);
        log->note("perceptron_cap", cap_d);
    }

    RealVector z = RealVector::Zero(body.dim);
    if (z_trace) z_trace->push_back(z);
    for (long long t = 0; t < cap; ++t) {
        // Separation for K' = K intersect {c.x >= gamma}.
        SeparationAnswer ans = sep(z, delta);
        RealVector s;
        if (ans.tag == SeparationTag::CUT) {
            s = ans.cut_normal;
        } else if (q.c.dot(z) < q.gamma) {
            s = -q.c;
        } else {
            if (log) log->note("perceptron_iterations", static_cast<double>(t + 1));
            return WeakAnswer::YES;
        }
        z -= step * s;
        if (z_trace) z_trace->push_back(z);
    }
    if (log) log->note("perceptron_iterations", cap_d);
    return WeakAnswer::NO;
}

WeakAnswer wopt_via_wmem(const ConvexBodyParams& body, const MembershipOracle& oracle,
                         const WOptQuery& q, ReductionLog* log,
                         std::vector<RealVector>* z_trace) {
    const double dd = static_cast<double>(body.dim);
    if (log)
        log->note("wmem_delta_bound_composite",
                  std::pow(body.inner_radius, 3) * std::pow(q.epsilon, 3) /
                      (442368.0 * std::pow(dd, 5) * std::pow(body.outer_radius, 5)));
    const auto sep = [&](const RealVector& y, double d_sep) {
        return wsep_via_wmem(body, oracle, y, d_sep, log);
    };
    return wopt_via_wsep(body, sep, q, log, z_trace);
}

WeakAnswer wopt_star_via_wmem_star(const ConvexBodyParams& body, const MembershipOracle& star,
                                   const WOptQuery& q, ReductionLog* log) {
    body.validate();
    const double shift = q.epsilon / (4.0 * body.outer_radius);
    const double eps_mapped = q.epsilon * body.inner_radius / (4.0 * body.outer_radius);
    if (log) {
        log->note("star_shift_delta", shift);
        log->note("star_epsilon_mapped", eps_mapped);
    }
    WOptQuery mapped{q.c, q.gamma, eps_mapped};
    // A starred membership oracle answers YES on all of K, hence on S(K,-delta),
    // so it already satisfies the weak membership contract.
    return wopt_via_wmem(body, star, mapped, log);
}

}  // namespace qmarginal
