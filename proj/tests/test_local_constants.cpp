#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ltlab/constants.hpp"
#include "ltlab/errors.hpp"
#include "ltlab/local_constants.hpp"

using namespace ltlab;

namespace {

struct Pair {
    DomainMask omega;
    DomainMask tilde;
};

Pair interval_pair(double L) {
    const auto box = BoxSpec::cube(1, -4.0 * L, 4.0 * L, 256);
    return {DomainMask::from_predicate(box, [&](const Point& x) { return std::abs(x[0]) < 0.5 * L; }),
            DomainMask::from_predicate(box, [&](const Point& x) { return std::abs(x[0]) < 1.0 * L; })};
}

OptimizerParams quick() {
    OptimizerParams p;
    p.max_iters = 300;
    return p;
}

}  // namespace

TEST_CASE("zero margin is rejected") {
    const auto box = BoxSpec::cube(1, -4.0, 4.0, 256);
    const auto om = DomainMask::from_predicate(box, [](const Point& x) { return std::abs(x[0]) < 1.0; });
    CHECK_THROWS_WITH_AS(estimate_local_constant(1.0, 0.1, om, om, quick(), gn_reference_1d().value),
                         "Ω must be compactly contained", ConfigError);
    const double m = grid_margin(interval_pair(1.0).omega, interval_pair(1.0).tilde);
    CHECK(m > 0.4);
    CHECK(m <= 0.5);
}

TEST_CASE("local constant scales as L^{-2s}") {
    const double gn = gn_reference_1d().value;
    const auto base = interval_pair(1.0);
    const double c1 = estimate_local_constant(1.0, 0.1, base.omega, base.tilde, quick(), gn).value;
    CHECK(c1 > 0.0);
    for (double L : {2.0, 4.0}) {
        const auto p = interval_pair(L);
        const double cL = estimate_local_constant(1.0, 0.1, p.omega, p.tilde, quick(), gn).value;
        CHECK(cL / c1 == doctest::Approx(std::pow(L, -2.0)).epsilon(0.05));
    }
}

TEST_CASE("local constant is non-increasing in delta") {
    const double gn = gn_reference_1d().value;
    const auto p = interval_pair(1.0);
    double prev = 1e300;
    for (double delta : {0.1, 0.4, 0.7, 0.95}) {
        const auto r = estimate_local_constant(1.0, delta, p.omega, p.tilde, quick(), gn);
        CHECK(r.value >= 0.0);
        CHECK(r.value <= prev * (1.0 + 1e-6));
        prev = r.value;
    }
}

TEST_CASE("LUP-I algebra on constant densities") {
    // Constant rho: P = M^{1+2s/d} / V^{2s/d}, so the balance forces C = 1.
    for (int d = 1; d <= 3; ++d)
        for (double s : {0.5, 1.0}) {
            const double V = 2.0, M = 0.7, q = 2.0 * s / d;
            const double P = std::pow(M, 1.0 + q) / std::pow(V, q);
            CHECK(lup1_required_constant(0.0, P, M, V, s, d) == doctest::Approx(1.0).epsilon(1e-12));
        }
}

TEST_CASE("LUP-I estimate") {
    OptimizerParams p = quick();
    const auto r = estimate_lup1_constant(1.0, 1, p, false, 1.0, 500);
    CHECK(r.value >= 1.0);
    CHECK(r.holdout_samples == 500);
    CHECK(r.holdout_violations == 0);
    const auto r2 = estimate_lup1_constant(1.0, 1, p, false, 2.0, 100);
    CHECK(r2.value == doctest::Approx(r.value).epsilon(0.02));

    SUBCASE("constant function is optimal in d = 2 and 3 for s = 1") {
        for (int d : {2, 3}) {
            const auto rd = estimate_lup1_constant(1.0, d, p, false, 1.0, 50);
            CHECK(rd.value == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(rd.holdout_violations == 0);
        }
    }
}

TEST_CASE("trial dictionary") {
    const auto p = interval_pair(1.0);
    const auto dict = build_trial_dictionary(p.tilde.box, p.tilde, 0.25);
    CHECK(dict.basis.size() > 5);
    for (const auto& f : dict.basis) CHECK(f.finite());
}
