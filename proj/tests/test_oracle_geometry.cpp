#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qmarginal/oracle_geometry.hpp"
#include "support.hpp"

using namespace qmarginal;

namespace {

ConvexBodyParams ball_body(int d) {
    return {d, 1.0, 1.0, RealVector::Zero(d)};
}

MembershipOracle ball_oracle() {
    return [](const RealVector& y, double) { return y.norm() <= 1.0; };
}

ConvexBodyParams box_body(int d) {
    return {d, std::sqrt(double(d)), 1.0, RealVector::Zero(d)};
}

MembershipOracle box_oracle() {
    return [](const RealVector& y, double) { return y.cwiseAbs().maxCoeff() <= 1.0; };
}

// Adversarial wrapper that flips every answer for points within the
// delta-shell of the ball boundary.
MembershipOracle ball_oracle_shell_flipped() {
    return [](const RealVector& y, double delta) {
        const bool inside = y.norm() <= 1.0;
        if (std::abs(y.norm() - 1.0) < delta) return !inside;
        return inside;
    };
}

RealVector unit(std::mt19937_64& rng, int d) {
    std::normal_distribution<double> g(0.0, 1.0);
    RealVector v(d);
    for (int i = 0; i < d; ++i) v(i) = g(rng);
    v.normalize();
    return v;
}

}  // namespace

TEST_CASE("one-sided membership: interior, far point, logged precision") {
    const auto body = ball_body(3);
    ReductionLog log;
    RealVector origin = RealVector::Zero(3);
    CHECK(wmem1_via_wmem(body, ball_oracle(), origin, 0.1, &log));
    CHECK(log.get("wmem1_delta_prime").value() == doctest::Approx(1.0 * 0.1 / 4.0));

    RealVector far = RealVector::Zero(3);
    far(0) = 3.0;  // ||y - p|| >= 2R rejects without a query
    const long long before = log.oracle_queries;
    CHECK_FALSE(wmem1_via_wmem(body, ball_oracle(), far, 0.1, &log));
    CHECK(log.oracle_queries == before);
}

TEST_CASE("cone separation: inside answer and radial cut on the ball") {
    const auto body = ball_body(2);
    const MembershipOracle one_sided = [&](const RealVector& y, double d) {
        return wmem1_via_wmem(body, ball_oracle(), y, d);
    };
    ReductionLog log;
    RealVector inside = RealVector::Zero(2);
    inside(0) = 0.2;
    CHECK(wsep_cone_via_wmem1(body, one_sided, inside, 0.05, 0.1, &log).tag ==
          SeparationTag::INSIDE);

    RealVector outside = RealVector::Zero(2);
    outside(0) = 2.0;
    const SeparationAnswer ans = wsep_cone_via_wmem1(body, one_sided, outside, 0.05, 0.1, &log);
    REQUIRE(ans.tag == SeparationTag::CUT);
    CHECK(ans.cut_normal.norm() == doctest::Approx(1.0));
    CHECK(ans.cut_normal(0) >= 0.9);

    // Iteration bound from the run parameters.
    const double d1 = log.get("cone_delta1").value();
    const double r1 = log.get("cone_r1").value();
    const double iters = log.get("cone_iterations").value();
    const double bound = std::log(d1 / r1) / (0.5 * 0.1 * 0.1 / (17.0 * 16.0));
    CHECK(iters < bound);
    // Paper parameter formulas at (R = r = 1, d = 2, delta = 0.05, beta = 0.1).
    CHECK(d1 == doctest::Approx(0.05 / 2.0));
    CHECK(r1 == doctest::Approx(d1 / 8.0));
    CHECK(log.get("cone_epsilon1").value() == doctest::Approx(0.1 * 0.1 * r1 / (16.0 * 16.0)));
}

TEST_CASE("weak separation: norm guard, interior, achieved precision log") {
    const auto body = ball_body(2);
    ReductionLog log;
    RealVector far = RealVector::Zero(2);
    far(0) = 2.0;  // ||y|| > R cuts along y directly
    const SeparationAnswer cut = wsep_via_wmem(body, ball_oracle(), far, 0.1, &log);
    REQUIRE(cut.tag == SeparationTag::CUT);
    CHECK((cut.cut_normal - far / far.norm()).norm() < 1e-12);

    RealVector deep = RealVector::Zero(2);
    CHECK(wsep_via_wmem(body, ball_oracle(), deep, 0.1, &log).tag == SeparationTag::INSIDE);

    const double eps = 0.1;
    CHECK(log.get("wmem_delta_bound").value() ==
          doctest::Approx(std::pow(eps, 3) / (16384.0 * 32.0)));
    CHECK(log.get("wsep_beta_slope").value() == doctest::Approx(eps / 4.0));
}

TEST_CASE("weak separation cuts are valid on sampled interior points") {
    std::mt19937_64 rng(17);
    const auto body = ball_body(3);
    const double eps = 0.25;
    for (int rep = 0; rep < 3; ++rep) {
        RealVector y = unit(rng, 3) * 1.4;
        const SeparationAnswer ans = wsep_via_wmem(body, ball_oracle(), y, eps);
        REQUIRE(ans.tag == SeparationTag::CUT);
        for (int s = 0; s < 2000; ++s) {
            RealVector x = unit(rng, 3);
            x *= std::pow(std::uniform_real_distribution<double>(0, 1)(rng), 1.0 / 3.0);
            CHECK(ans.cut_normal.dot(x) <= ans.cut_normal.dot(y) + eps + 1e-9);
        }
    }
}

TEST_CASE("perceptron on the ball: YES, NO, cap and progress") {
    const auto body = ball_body(2);
    // Exact separation oracle for the ball.
    const auto sep = [](const RealVector& y, double) -> SeparationAnswer {
        if (y.norm() <= 1.0) return {SeparationTag::INSIDE, {}};
        return {SeparationTag::CUT, y / y.norm()};
    };
    WOptQuery yes{RealVector::Zero(2), 0.5, 0.1};
    yes.c(0) = 1.0;
    ReductionLog log;
    std::vector<RealVector> trace;
    CHECK(wopt_via_wsep(body, sep, yes, &log, &trace) == WeakAnswer::YES);
    CHECK(log.get("perceptron_cap").value() == doctest::Approx(std::ceil(9.0 / (0.1 * 0.1))));
    CHECK(log.get("perceptron_delta").value() == doctest::Approx(0.1 / 3.0));

    // Progress property against the promised feasible point.
    RealVector feasible = RealVector::Zero(2);
    feasible(0) = 0.7;
    const double step2 = std::pow(0.1 - 2.0 * 0.1 / 3.0, 2);
    for (size_t t = 0; t + 1 < trace.size(); ++t) {
        const double before = (trace[t] - feasible).squaredNorm();
        const double after = (trace[t + 1] - feasible).squaredNorm();
        CHECK(after <= before - step2 + 1e-12);
    }

    WOptQuery no{RealVector::Zero(2), 1.5, 0.1};
    no.c(0) = 1.0;
    ReductionLog nolog;
    CHECK(wopt_via_wsep(body, sep, no, &nolog) == WeakAnswer::NO);
    CHECK(nolog.get("perceptron_iterations").value() ==
          doctest::Approx(nolog.get("perceptron_cap").value()));
}

TEST_CASE("full composition on the sphere matches the analytic support function") {
    std::mt19937_64 rng(29);
    const auto body = ball_body(2);
    const double eps = 0.45;
    ReductionLog log;
    int checked = 0;
    for (int rep = 0; rep < 20; ++rep) {
        WOptQuery q{unit(rng, 2), 0.0, eps};
        const bool want_yes = rep % 2 == 0;
        // Support function of the unit ball is 1; promise-respecting gammas.
        q.gamma = want_yes ? 1.0 - 2.6 * eps : 1.0 + 2.2 * eps;
        const WeakAnswer ans = wopt_via_wmem(body, ball_oracle(), q, &log);
        CHECK((ans == WeakAnswer::YES) == want_yes);
        ++checked;
    }
    CHECK(checked == 20);
    CHECK(log.get("wmem_delta_bound_composite").value() ==
          doctest::Approx(std::pow(eps, 3) / (442368.0 * 32.0)));
}

TEST_CASE("full composition on the box matches vertex enumeration") {
    std::mt19937_64 rng(31);
    const auto body = box_body(2);
    const double eps = 0.6;
    for (int rep = 0; rep < 8; ++rep) {
        WOptQuery q{unit(rng, 2), 0.0, eps};
        // Support function of the box is sum |c_i| (the best vertex).
        const double h = q.c.cwiseAbs().sum();
        const bool want_yes = rep % 2 == 0;
        q.gamma = want_yes ? h - 2.8 * eps : h + 2.2 * eps;
        const WeakAnswer ans = wopt_via_wmem(body, box_oracle(), q, nullptr);
        CHECK((ans == WeakAnswer::YES) == want_yes);
    }
}

TEST_CASE("starred optimization: shift log and ball agreement") {
    std::mt19937_64 rng(37);
    const auto body = ball_body(2);
    const double eps = 0.9;
    ReductionLog log;
    WOptQuery q{unit(rng, 2), 1.0 - 2.0 * (eps / 4.0) * 2.0, eps};
    const WeakAnswer star = wopt_star_via_wmem_star(body, ball_oracle(), q, &log);
    CHECK(log.get("star_shift_delta").value() == doctest::Approx(eps / 4.0));
    CHECK(log.get("star_epsilon_mapped").value() == doctest::Approx(eps / 4.0));

    // The starred semantics on the symmetric ball: YES iff some x in K has
    // c.x >= gamma + eps; h = 1 so gamma = 1 - 2eps is a YES instance.
    WOptQuery yes{unit(rng, 2), 1.0 - 2.0 * eps, eps};
    CHECK(wopt_star_via_wmem_star(body, ball_oracle(), yes, nullptr) == WeakAnswer::YES);
    WOptQuery no{unit(rng, 2), 1.0 + 2.0 * eps, eps};
    CHECK(wopt_star_via_wmem_star(body, ball_oracle(), no, nullptr) == WeakAnswer::NO);
    (void)star;
}

TEST_CASE("starred and plain composition agree on box queries inside the promise") {
    std::mt19937_64 rng(41);
    const auto body = box_body(2);
    const double eps = 0.9;
    for (int rep = 0; rep < 20; ++rep) {
        WOptQuery q{unit(rng, 2), 0.0, eps};
        const double h = q.c.cwiseAbs().sum();
        const bool want_yes = rep % 2 == 0;
        // Promise gap wide enough for both the plain and the shifted run.
        q.gamma = want_yes ? h - 3.2 * eps : h + 2.6 * eps;
        const WeakAnswer a = wopt_star_via_wmem_star(body, box_oracle(), q, nullptr);
        const WeakAnswer b = wopt_via_wmem(body, box_oracle(), q, nullptr);
        CHECK(a == b);
        CHECK((a == WeakAnswer::YES) == want_yes);
    }
}

TEST_CASE("promise robustness: shell-flipped oracle leaves answers unchanged") {
    std::mt19937_64 rng(43);
    const auto body = ball_body(2);
    const double eps = 0.5;
    for (int rep = 0; rep < 6; ++rep) {
        WOptQuery q{unit(rng, 2), 0.0, eps};
        q.gamma = rep % 2 == 0 ? 1.0 - 2.6 * eps : 1.0 + 2.2 * eps;
        const WeakAnswer plain = wopt_via_wmem(body, ball_oracle(), q, nullptr);
        const WeakAnswer flipped = wopt_via_wmem(body, ball_oracle_shell_flipped(), q, nullptr);
        CHECK(plain == flipped);
    }
}

TEST_CASE("degenerate slope and precision inputs are clamped with a note") {
    const auto body = ball_body(2);
    ReductionLog log;
    RealVector y = RealVector::Zero(2);
    y(0) = 0.0;
    CHECK(wsep_cone_via_wmem1(
              body,
              [&](const RealVector& p, double d) {
                  return wmem1_via_wmem(body, ball_oracle(), p, d);
              },
              y, 1.5, 0.1, &log)
              .tag == SeparationTag::INSIDE);
    CHECK(log.get("cone_delta_clamped_from").has_value());
}
