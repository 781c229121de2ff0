#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ltlab/constants.hpp"
#include "ltlab/errors.hpp"
#include "ltlab/gn_solver.hpp"
#include "ltlab/nbody.hpp"

using namespace ltlab;

namespace {

GridFunction gaussian(const BoxSpec& box, double sigma, const Point& c = {0.0, 0.0, 0.0}) {
    return GridFunction::sample(box, [&](const Point& x) {
        double r2 = 0.0;
        for (int k = 0; k < box.d; ++k) r2 += (x[k] - c[k]) * (x[k] - c[k]);
        return cplx(std::exp(-r2 / (2.0 * sigma * sigma)), 0.0);
    });
}

double max_diff(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

// GN minimiser for s = 1, d = 1, embedded into a wide box for separation sweeps.
const GridFunction& gn_bump() {
    static const GridFunction u = [] {
        OptimizerParams p;
        p.restarts = 1;
        p.max_iters = 1500;
        auto r = minimize_gn(1.0, 1, BoxSpec::centered(1, 40.0, 512), p);
        return embed(r.minimizer, BoxSpec::centered(1, 320.0, 4096));
    }();
    return u;
}

}  // namespace

TEST_CASE("state validation") {
    const auto box = BoxSpec::centered(1, 8.0, 16);
    CHECK_THROWS_AS(NBodyState(4, box, std::vector<cplx>(65536, 0.0)).validate(), ConfigError);
    CHECK_THROWS_AS(NBodyState(2, box, std::vector<cplx>(255, 0.0)).validate(), ConfigError);
    CHECK_THROWS_AS(NBodyState(2, box, std::vector<cplx>(256, 0.0)).validate(), ConfigError);
    QuotientParams q;
    q.hardy = true;
    q.s = 0.5;
    CHECK_THROWS_AS(q.validate(1), ConfigError);
    CHECK_NOTHROW(q.validate(2));
}

TEST_CASE("densities of product and random states") {
    const auto box = BoxSpec::centered(1, 20.0, 128);
    auto u = gaussian(box, 1.0, {-5.0, 0, 0});
    auto v = gaussian(box, 0.7, {5.0, 0, 0});
    u.normalize();
    v.normalize();
    const auto rho_uu = density(to_tensor(ProductState({u, u})));
    for (std::size_t i = 0; i < box.size(); ++i)
        CHECK(rho_uu.values[i].real() == doctest::Approx(2.0 * std::norm(u.values[i])).epsilon(1e-10).scale(1e-12));
    const auto rho_uv = density(ProductState({u, v}));
    for (std::size_t i = 0; i < box.size(); ++i)
        CHECK(rho_uv.values[i].real() ==
              doctest::Approx(std::norm(u.values[i]) + std::norm(v.values[i])).epsilon(1e-10).scale(1e-12));

    std::mt19937_64 rng(4);
    const auto ubox = BoxSpec::cube(1, 0.0, 1.0, 64);
    for (int t = 0; t < 10; ++t) {
        const int N = 2 + t % 2;
        const auto st = random_state(N, ubox, rng);
        const auto rho = density(st);
        double total = 0.0;
        for (const auto& z : rho.values) {
            CHECK(z.real() >= -1e-12);
            total += z.real();
        }
        CHECK(total * ubox.cell_volume() == doctest::Approx(N).epsilon(1e-8));
    }
}

TEST_CASE("kinetic energy of plane waves and tensorization") {
    const auto box = BoxSpec::centered(1, 2.0 * M_PI, 32);
    const int k1 = 3, k2 = -5;
    std::vector<cplx> vals(box.size() * box.size());
    for (std::size_t i = 0; i < box.size(); ++i)
        for (std::size_t j = 0; j < box.size(); ++j) {
            const double x = box.position(i)[0], y = box.position(j)[0];
            vals[i * box.size() + j] = std::exp(cplx(0.0, k1 * x + k2 * y)) / (2.0 * M_PI);
        }
    NBodyState pw(2, box, vals);
    pw.normalize();
    for (double s : {0.5, 1.0, 1.5})
        CHECK(kinetic_expectation(pw, s) == doctest::Approx(std::pow(3.0, 2 * s) + std::pow(5.0, 2 * s)).epsilon(1e-10));

    const auto gbox = BoxSpec::centered(1, 20.0, 128);
    auto u = gaussian(gbox, 1.3, {1.0, 0, 0});
    u.normalize();
    const ProductState uu({u, u});
    CHECK(kinetic_expectation(uu, 0.75) == doctest::Approx(2.0 * seminorm_global(u, 0.75).value).epsilon(1e-12));
}

TEST_CASE("product and tensor evaluations agree") {
    const auto box = BoxSpec::centered(1, 20.0, 128);
    auto u = gaussian(box, 1.0, {-2.0, 0, 0});
    auto v = gaussian(box, 1.5, {3.0, 0, 0});
    const ProductState ps({u, v});
    const NBodyState ts = to_tensor(ps);
    for (double s : {0.25, 0.4}) {
        CHECK(kinetic_expectation(ts, s) == doctest::Approx(kinetic_expectation(ps, s)).epsilon(1e-8));
        CHECK(hardy_expectation(ts, s) == doctest::Approx(hardy_expectation(ps, s)).epsilon(1e-8));
        CHECK(pair_interaction(ts, s) == doctest::Approx(pair_interaction(ps, s)).epsilon(1e-8));
    }
    CHECK(max_diff(density(ts), density(ps)) < 1e-12);
    QuotientParams q;
    q.s = 0.25;
    q.lambda = 2.0;
    q.hardy = true;
    CHECK(lt_quotient(ts, q).value == doctest::Approx(lt_quotient(ps, q).value).epsilon(1e-8));
}

TEST_CASE("hardy expectation is nonnegative at s = 1, d = 3") {
    std::mt19937_64 rng(21);
    const auto box = BoxSpec::centered(3, 12.0, 32);
    for (int t = 0; t < 10; ++t) {
        auto u = random_bump(box, rng, 2.0);
        auto v = random_bump(box, rng, 2.0);
        CHECK(hardy_expectation(ProductState({u, v}), 1.0) >= 0.0);
    }
    const auto small = BoxSpec::centered(3, 8.0, 8);
    for (int t = 0; t < 3; ++t) CHECK(hardy_expectation(random_state(2, small, rng), 1.0) >= 0.0);
}

TEST_CASE("quotient is affine in lambda") {
    std::mt19937_64 rng(9);
    const auto box = BoxSpec::cube(1, 0.0, 1.0, 64);
    for (int t = 0; t < 5; ++t) {
        const auto st = random_state(2, box, rng);
        QuotientParams q;
        q.s = 1.0;
        const auto q0 = lt_quotient(st, q);
        q.lambda = 1.0;
        const auto q1 = lt_quotient(st, q);
        q.lambda = 3.5;
        const auto q2 = lt_quotient(st, q);
        const double slope = q1.interaction / q1.denominator;
        CHECK(slope > 0.0);
        CHECK(q1.value - q0.value == doctest::Approx(slope).epsilon(1e-12));
        CHECK(q2.value - q0.value == doctest::Approx(3.5 * slope).epsilon(1e-12));
    }
}

TEST_CASE("separated GN bumps approach the GN constant") {
    const auto& u = gn_bump();
    const double gn = gn_quotient(u, 1.0);
    CHECK(gn == doctest::Approx(gn_reference_1d().value).epsilon(1e-3));
    QuotientParams q;
    q.s = 1.0;
    q.lambda = 1.0;
    double prev = 1e300;
    for (double D : {10.0, 20.0, 40.0, 80.0, 160.0}) {
        const auto st = trial_separated({u, u}, {Point{-0.5 * D, 0, 0}, Point{0.5 * D, 0, 0}}, u.box);
        const double val = lt_quotient(st, q).value;
        CHECK(val < prev);
        prev = val;
    }
    CHECK(prev == doctest::Approx(gn).epsilon(0.02));
    CHECK(prev >= gn);

    double chain = 0.0;
    for (double D : {20.0, 80.0}) {
        const auto st = trial_separated({u, u, u}, {Point{-D, 0, 0}, Point{0, 0, 0}, Point{D, 0, 0}}, u.box);
        chain = lt_quotient(st, q).value;
        CHECK(std::isfinite(chain));
    }
    CHECK(chain == doctest::Approx(gn).epsilon(0.02));
}

TEST_CASE("hardy pair scaling identities and resolution guard") {
    const auto box = BoxSpec::centered(3, 24.0, 64);
    const auto v = gaussian(box, 1.0);
    const double ell = 0.5;
    const auto vl = dilate_translate(v, ell, {2.0, -1.0, 0.5});
    const double p = gn_exponent(1.0, 3);
    CHECK(seminorm_global(vl, 1.0).value == doctest::Approx(ell * ell * seminorm_global(v, 1.0).value).epsilon(1e-6));
    CHECK(vl.integral_abs_pow(p) == doctest::Approx(ell * ell * v.integral_abs_pow(p)).epsilon(1e-6));

    const auto b2 = BoxSpec::centered(2, 16.0, 64);
    const auto g = gaussian(b2, 1.0);
    CHECK_THROWS_AS(trial_hardy_pair(g, g, {4.0, 0, 0}, 8.0), ConfigError);
    CHECK_NOTHROW(trial_hardy_pair(g, g, {4.0, 0, 0}, 0.8));
}

TEST_CASE("bosonic GN floor on random states") {
    std::mt19937_64 rng(13);
    const auto box = BoxSpec::cube(1, 0.0, 1.0, 64);
    const double floor = gn_reference_1d().value / std::pow(2.0, 2.0);
    QuotientParams q;
    q.s = 1.0;
    int violations = 0;
    for (int t = 0; t < 100; ++t)
        if (lt_quotient(random_state(2, box, rng), q).value < floor * (1.0 - 1e-6)) ++violations;
    CHECK(violations == 0);
}
