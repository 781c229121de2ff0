#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "ltlab/certifier.hpp"
#include "ltlab/constants.hpp"
#include "ltlab/errors.hpp"

using namespace ltlab;

namespace {

// Constants frozen from calibration runs at d = 1, s = 1 and d = 2, s = 3/4.
Calibration cal_1d() {
    Calibration c;
    c.s = 1.0;
    c.d = 1;
    c.gn = gn_reference_1d().value;
    c.lup1 = 1.568475156593827;
    return c;
}

Calibration cal_hardy_2d() {
    Calibration c;
    c.s = 0.75;
    c.d = 2;
    c.gn = 3.4995;
    c.hgn = 2.7773;
    c.lup1 = 2.153;
    c.lup1_hardy = 2.1644;
    return c;
}

CertifyParams params_1d() {
    CertifyParams p;
    p.s = 1.0;
    p.d = 1;
    p.delta = 0.1;
    return p;
}

GridFunction uniform(const BoxSpec& box, double mass) {
    return GridFunction::sample(box, [&](const Point&) { return cplx(mass / box.length(0), 0.0); });
}

}  // namespace

TEST_CASE("certificate factor examples") {
    const double gn = gn_reference_1d().value;
    CHECK(lup2_branch(0.1, 1.0, 1, gn) == doctest::Approx(0.81 / 1.21 * gn).epsilon(1e-14));
    CHECK(lup2_branch(0.1, 1.0, 1, gn) == doctest::Approx(1.65176).epsilon(5e-5));
    CHECK(lup2_branch(0.5, 1.0, 2, 1.0) == doctest::Approx(0.097631).epsilon(1e-5));
    CHECK(lup2_branch(1e-12, 1.0, 1, gn) == doctest::Approx(gn).epsilon(1e-5));
    CHECK(lup1_branch(0.1, 1.0, 1, 2.0) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(certificate_factor(0.1, 1.0, 1, 2.0, gn) == doctest::Approx(0.81 / 1.21 * gn).epsilon(1e-14));
    CHECK(certificate_factor(0.1, 1.0, 1, 10.0, gn) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("lambda threshold") {
    const double c = 1.5;
    const double a = lambda_threshold(0.1, 2, 1.0, 1, c, 0.0);
    CHECK(a == doctest::Approx(exclusion_conversion_constant(0.1, 2, 1.0, 1) * c * 0.1).epsilon(1e-14));
    CHECK(lambda_threshold(0.1, 2, 1.0, 1, c, 100.0) == doctest::Approx(exclusion_conversion_constant(0.1, 2, 1.0, 1) * 100.0));
    CHECK(exclusion_conversion_constant(0.1, 2, 1.0, 1) > 0.0);
}

TEST_CASE("no clusters: certificate reduces to the LUP-I branch") {
    const auto box = BoxSpec::cube(1, 0.0, 1.0, 64);
    const auto rho = uniform(box, 0.15);
    const auto r = certify(rho, params_1d(), cal_1d());
    CHECK(r.levels == 1);
    CHECK(r.active_factor == doctest::Approx(r.branch_lup1).epsilon(1e-15));
    CHECK(r.factor == doctest::Approx(std::min(r.branch_lup1, r.branch_lup2)).epsilon(1e-15));
    for (const auto& e : r.ledger) CHECK(e.kind == "lup1");
    CHECK_FALSE(r.measured.has_value());
    CHECK_FALSE(r.sound.has_value());
}

TEST_CASE("lambda gate and monotone validity") {
    std::mt19937_64 rng(7);
    const auto box = BoxSpec::centered(1, 16.0, 64);
    const auto st = random_state(2, box, rng);
    auto p = params_1d();
    const auto base = certify(st, p, cal_1d());
    CHECK(base.valid);
    CHECK(base.lambda == base.lambda_threshold);
    bool seen_valid = false;
    for (double f : {0.25, 0.5, 0.99, 1.0, 2.0, 10.0}) {
        p.lambda = f * base.lambda_threshold;
        const auto r = certify(st, p, cal_1d());
        CHECK(r.valid == (f >= 1.0));
        if (seen_valid) CHECK(r.valid);
        seen_valid = seen_valid || r.valid;
        CHECK(r.ledger.size() == base.ledger.size());
    }
}

TEST_CASE("random two-body states are certified soundly") {
    std::mt19937_64 rng(7);
    const auto box = BoxSpec::centered(1, 16.0, 64);
    for (int t = 0; t < 6; ++t) {
        const auto r = certify(random_state(2, box, rng), params_1d(), cal_1d());
        REQUIRE(r.sound.has_value());
        CHECK(*r.sound);
        CHECK(r.absorbed);
        CHECK(r.factor <= r.measured->value);
        CHECK(recompute_factor(r) == r.factor);
        for (const auto& e : r.ledger) CHECK(std::isfinite(e.value));
        CHECK(r.covered_fraction <= 1.0 + 1e-12);
    }
}

TEST_CASE("delta sweep increases toward the GN constant") {
    std::mt19937_64 rng(7);
    const auto box = BoxSpec::centered(1, 16.0, 64);
    const auto rho = density(random_state(2, box, rng));
    const auto rows = sweep_delta(rho, {0.3, 0.2, 0.1, 0.05}, params_1d(), cal_1d());
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].factor > rows[i - 1].factor);
    CHECK(rows.back().factor < gn_reference_1d().value);
}

TEST_CASE("missing calibration and bad parameters") {
    const auto box = BoxSpec::cube(1, 0.0, 1.0, 64);
    const auto rho = uniform(box, 2.6);
    Calibration c = cal_1d();
    c.lup1.reset();
    CHECK_THROWS_WITH_AS(certify(rho, params_1d(), c), "missing calibration: lup1", ConfigError);
    auto p = params_1d();
    p.delta = 1.5;
    CHECK_THROWS_AS(certify(rho, p, cal_1d()), ConfigError);
}

TEST_CASE("hardy certification") {
    const auto box = BoxSpec::centered(2, 64.0, 128);
    auto g = [&](double cx) {
        return GridFunction::sample(box, [&](const Point& x) {
            return cplx(std::exp(-((x[0] - cx) * (x[0] - cx) + x[1] * x[1]) / 2.0), 0.0);
        });
    };
    const ProductState st({g(-3.0), g(3.0)});
    CertifyParams p;
    p.s = 0.75;
    p.d = 2;
    p.delta = 0.1;
    p.epsilon_inv = 3;
    p.hardy = true;
    const auto r = certify(st, p, cal_hardy_2d());
    CHECK(r.hardy_center_present);
    CHECK(r.q0_disjoint);
    REQUIRE(r.sound.has_value());
    CHECK(*r.sound);
    CHECK(r.absorbed);
    int center = 0;
    for (const auto& e : r.ledger) center += e.kind == "lup1_hardy_center";
    CHECK(center == 1);
    CHECK(r.branch_lup2 == doctest::Approx(lup2_branch(0.1, 0.75, 2, 2.7773)));

    const auto j = to_json(r);
    CHECK(j.at("schema") == 1);
    CHECK(j.at("hardy").at("center_present") == true);
    CHECK(j.at("ledger").size() == r.ledger.size());
    CHECK(j.at("factor").get<double>() == r.factor);
    CHECK(j.at("sound") == true);

    const auto shifted = BoxSpec::cube(2, 0.0, 64.0, 128);
    const auto rho = GridFunction::sample(shifted, [](const Point&) { return cplx(0.001, 0.0); });
    CHECK_THROWS_AS(certify(rho, p, cal_hardy_2d()), ConfigError);
    auto even = p;
    even.epsilon_inv = 2;
    CHECK_THROWS_AS(certify(st, even, cal_hardy_2d()), ConfigError);
}
