#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "ltlab/errors.hpp"
#include "ltlab/grid.hpp"
#include "ltlab/grid_io.hpp"
#include "ltlab/local_constants.hpp"

using namespace ltlab;
using std::numbers::pi;

namespace {

// exp(-1/t) smooth step glued into a plateau equal to 1 on [a, b].
double plateau(double x, double a, double b, double ramp) {
    auto f = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
    auto step = [&](double t) { return f(t) / (f(t) + f(1.0 - t)); };
    return step((x - (a - ramp)) / ramp) * step(((b + ramp) - x) / ramp);
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "ltlab_test_grid";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("box validation") {
    CHECK_THROWS_AS(BoxSpec::centered(1, 10.0, 100), ConfigError);
    CHECK_THROWS_AS(BoxSpec::centered(1, 10.0, 4), ConfigError);
    CHECK_THROWS_AS(BoxSpec::centered(4, 10.0, 16), ConfigError);
    CHECK_THROWS_AS(BoxSpec::cube(1, 1.0, 0.0, 16), ConfigError);
    const auto b = BoxSpec::centered(2, 8.0, 16);
    CHECK(b.size() == 256);
    CHECK(b.h() == doctest::Approx(0.5));
    for (std::size_t i = 0; i < b.size(); ++i) CHECK(b.ravel(b.unravel(i)) == i);
}

TEST_CASE("plane waves are eigenfunctions of the fractional Laplacian") {
    for (int d = 1; d <= 3; ++d) {
        const auto box = BoxSpec::centered(d, 2.0 * pi, d == 3 ? 16 : 32);
        const std::array<int, 3> k{3, -2, 1};
        double k2 = 0.0;
        for (int a = 0; a < d; ++a) k2 += k[a] * k[a];
        auto u = GridFunction::sample(box, [&](const Point& x) {
            double ph = 0.0;
            for (int a = 0; a < d; ++a) ph += k[a] * x[a];
            return std::exp(cplx(0.0, ph));
        });
        for (double s : {0.3, 0.5, 1.0, 1.7}) {
            const auto v = frac_laplacian_apply(u, s);
            const double lam = std::pow(k2, s);
            double err = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(v.values[i] - lam * u.values[i]));
            CHECK(err <= 1e-10 * lam);
            CHECK(seminorm_global(u, s).value == doctest::Approx(u.norm2() * lam).epsilon(1e-10));
        }
    }
}

TEST_CASE("constant field has zero energy") {
    const auto box = BoxSpec::centered(1, 10.0, 64);
    const auto u = GridFunction::sample(box, [](const Point&) { return cplx(2.0, 0.0); });
    const auto v = frac_laplacian_apply(u, 0.7);
    for (const auto& x : v.values) CHECK(std::abs(x) < 1e-12);
    const DomainMask half = DomainMask::from_predicate(box, [](const Point& x) { return x[0] > 0.0; });
    for (double s : {0.5, 1.0, 1.5}) CHECK(std::abs(seminorm_domain(u, SeminormSpec::make(s, 1), half)) < 1e-10);
}

TEST_CASE("Gaussian kinetic energy") {
    // int |u'|^2 / int |u|^2 = 1/(2 w^2) for u = exp(-x^2 / (2 w^2)).
    const auto box = BoxSpec::centered(1, 40.0, 2048);
    const auto u = GridFunction::sample(box, [](const Point& x) { return cplx(std::exp(-x[0] * x[0]), 0.0); });
    CHECK(seminorm_global(u, 1.0).value / u.norm2() == doctest::Approx(1.0).epsilon(1e-10));
    const auto g = GridFunction::sample(box, [](const Point& x) { return cplx(std::exp(-0.5 * x[0] * x[0]), 0.0); });
    CHECK(seminorm_global(g, 1.0).value / g.norm2() == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("soliton derivative energy against the closed form") {
    // Q' = -3^{1/4} sech^{1/2}(2x) tanh(2x), so int Q'^2 = sqrt(3) pi / 4.
    const auto box = BoxSpec::centered(1, 40.0, 2048);
    const auto q = GridFunction::sample(box, [](const Point& x) {
        return cplx(std::pow(3.0, 0.25) / std::sqrt(std::cosh(2.0 * x[0])), 0.0);
    });
    CHECK(seminorm_global(q, 1.0).value == doctest::Approx(1.3603495231756633).epsilon(1e-6));
    CHECK(q.norm2() == doctest::Approx(2.7206990463513265).epsilon(1e-9));
}

TEST_CASE("domain seminorm of a linear function") {
    const auto box = BoxSpec::cube(1, -8.0, 8.0, 1024);
    const auto u = GridFunction::sample(box, [](const Point& x) { return cplx(x[0] * plateau(x[0], -1.0, 2.0, 2.0), 0.0); });
    const auto omega = DomainMask::from_predicate(box, [](const Point& x) { return x[0] > 0.0 && x[0] < 1.0; });
    CHECK(seminorm_domain(u, SeminormSpec::make(1.0, 1), omega) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("empty domain is rejected") {
    const auto box = BoxSpec::centered(1, 4.0, 16);
    const GridFunction u(box);
    CHECK_THROWS_WITH_AS(seminorm_domain(u, SeminormSpec::make(0.5, 1), DomainMask(box)), "empty domain", ConfigError);
}

TEST_CASE("seminorm normalisation constant") {
    const auto spec = SeminormSpec::make(0.5, 1);
    CHECK(spec.m == 0);
    CHECK(spec.sigma == doctest::Approx(0.5));
    CHECK(spec.c_norm == doctest::Approx(1.0 / (2.0 * pi)).epsilon(1e-12));
    const auto s1 = SeminormSpec::make(1.25, 3);
    CHECK(s1.m == 1);
    CHECK(s1.sigma == doctest::Approx(0.25));
}

TEST_CASE("Parseval: Fourier and quadrature seminorms agree") {
    const auto box = BoxSpec::centered(1, 16.0, 65536);
    const auto u = GridFunction::sample(box, [](const Point& x) { return cplx(std::exp(-x[0] * x[0]), 0.0); });
    const auto full = DomainMask::full(box);
    for (double s : {0.5, 1.0, 1.5}) {
        const double g = seminorm_global(u, s).value;
        const double q = seminorm_domain(u, SeminormSpec::make(s, 1), full);
        CHECK(std::abs(g - q) <= 1e-4 * g);
    }
}

TEST_CASE("monotonicity under disjoint unions") {
    std::mt19937_64 rng(11);
    for (int d : {1, 2}) {
        const auto box = BoxSpec::centered(d, 8.0, d == 1 ? 256 : 32);
        const auto o1 = DomainMask::from_predicate(box, [](const Point& x) { return x[0] < -0.5; });
        const auto o2 = DomainMask::from_predicate(box, [](const Point& x) { return x[0] > 0.75; });
        const auto both = o1.united(o2);
        Bounds b;
        for (int a = 0; a < d; ++a) {
            b.lo[a] = -2.0;
            b.hi[a] = 2.0;
        }
        for (double s : {0.5, 1.0, 1.5}) {
            const auto spec = SeminormSpec::make(s, d);
            int violations = 0;
            for (int t = 0; t < (d == 1 ? 50 : 10); ++t) {
                const auto u = random_smooth_function(box, b, rng);
                const double lhs = seminorm_domain(u, spec, o1) + seminorm_domain(u, spec, o2);
                if (lhs > seminorm_domain(u, spec, both) + 1e-9) ++violations;
            }
            CHECK(violations == 0);
        }
    }
}

TEST_CASE("energies are nonnegative") {
    std::mt19937_64 rng(5);
    const auto box = BoxSpec::centered(2, 8.0, 32);
    Bounds b;
    b.lo = {-2.0, -2.0, 0.0};
    b.hi = {2.0, 2.0, 0.0};
    const auto omega = DomainMask::from_predicate(box, [](const Point& x) { return x[0] * x[0] + x[1] * x[1] < 4.0; });
    for (int t = 0; t < 10; ++t) {
        const auto u = random_smooth_function(box, b, rng);
        for (double s : {0.5, 1.0, 1.5}) {
            CHECK(seminorm_global(u, s).value >= -1e-12);
            CHECK(seminorm_domain(u, SeminormSpec::make(s, 2), omega) >= -1e-12);
        }
    }
}

TEST_CASE("Hardy energy") {
    const auto box = BoxSpec::centered(3, 12.0, 32);
    CHECK_THROWS_WITH_AS(hardy_energy(GridFunction(box), 1.5), "Hardy regime requires 2s < d", ConfigError);
    CHECK(hardy_energy(GridFunction(box), 1.0) == 0.0);
    const double R = 3.0;
    const auto u = GridFunction::sample(box, [&](const Point& x) {
        const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        return cplx(r >= R ? std::exp(-(r - 4.0) * (r - 4.0)) : 0.0, 0.0);
    });
    for (double s : {0.5, 1.0}) CHECK(hardy_energy(u, s) <= u.norm2() / std::pow(R, 2.0 * s) + 1e-12);
}

TEST_CASE("one-dimensional Hardy oracle for the radial reduction") {
    // For v(0) = 0 on (0, L): int v'^2 >= (1/4) int v^2 / r^2, the constant C_{1,3}.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = 20000;
    const double L = 10.0;
    const double h = L / n;
    const double c13 = 0.25;
    int violations = 0;
    for (int t = 0; t < 100; ++t) {
        const double a1 = unit(rng) * 2.0, a2 = unit(rng) * 2.0 - 1.0, w = 0.3 + 2.0 * unit(rng), p = 0.5 + unit(rng);
        auto v = [&](double r) { return std::pow(r, p) * (a1 + a2 * r) * std::exp(-r * r / (w * w)); };
        double kin = 0.0, pot = 0.0;
        for (int i = 0; i < n; ++i) {
            const double r = (i + 0.5) * h;
            const double dv = (v(r + 0.5 * h) - v(r - 0.5 * h)) / h;
            kin += dv * dv * h;
            pot += v(r) * v(r) / (r * r) * h;
        }
        if (kin < c13 * pot * (1.0 - 1e-9)) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("IMS localisation") {
    const auto box = BoxSpec::centered(1, 24.0, 2048);
    const auto u = GridFunction::sample(box, [](const Point& x) { return cplx(std::exp(-0.2 * x[0] * x[0]), 0.3 * x[0] * std::exp(-0.2 * x[0] * x[0])); });
    const auto omega = DomainMask::from_predicate(box, [](const Point& x) { return std::abs(x[0]) < 6.0; });
    const auto one = GridFunction::sample(box, [](const Point&) { return cplx(1.0, 0.0); });
    const auto half = GridFunction::sample(box, [](const Point&) { return cplx(std::sqrt(0.5), 0.0); });
    for (double s : {0.5, 1.0, 1.5}) {
        const auto spec = SeminormSpec::make(s, 1);
        CHECK(ims_defect(u, one, spec, omega) < 1e-10);
        CHECK(ims_defect(u, half, spec, omega) < 1e-10 * seminorm_domain(u, spec, omega));
    }
    // chi = cos(theta), eta = sin(theta): chi'^2 + eta'^2 = theta'^2.
    auto theta = [](double x) { return 0.25 * pi * (1.0 + std::tanh(x)); };
    auto dtheta = [](double x) { return 0.25 * pi / (std::cosh(x) * std::cosh(x)); };
    const auto chi = GridFunction::sample(box, [&](const Point& x) { return cplx(std::cos(theta(x[0])), 0.0); });
    double expect = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (omega.mask[i]) expect += dtheta(box.coord(0, int(i))) * dtheta(box.coord(0, int(i))) * std::norm(u.values[i]) * box.h();
    CHECK(ims_defect(u, chi, SeminormSpec::make(1.0, 1), omega) == doctest::Approx(expect).epsilon(1e-6));
    auto bad = chi;
    bad.values[0] = 1.5;
    CHECK_THROWS_AS(ims_defect(u, bad, SeminormSpec::make(1.0, 1), omega), ConfigError);
}

TEST_CASE("embedding preserves energies of decayed functions") {
    const auto small = BoxSpec::centered(2, 16.0, 64);
    const auto large = BoxSpec::centered(2, 32.0, 128);
    const auto u = GridFunction::sample(small, [](const Point& x) { return cplx(std::exp(-(x[0] * x[0] + x[1] * x[1])), 0.0); });
    const auto v = embed(u, large);
    CHECK(v.norm2() == doctest::Approx(u.norm2()).epsilon(1e-14));
    CHECK(seminorm_global(v, 1.0).value == doctest::Approx(seminorm_global(u, 1.0).value).epsilon(1e-10));
    CHECK_THROWS_AS(embed(u, BoxSpec::centered(2, 32.0, 64)), ConfigError);
}

TEST_CASE("grid file round trip") {
    const auto box = BoxSpec::cube(2, -1.0, 3.0, 16);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    GridFunction u(box);
    for (auto& v : u.values) v = {nd(rng), nd(rng)};
    const auto path = scratch("u.bin");
    write_grid(path, u);
    const auto w = read_grid(path);
    CHECK(w.box == box);
    CHECK(w.values == u.values);

    auto m = DomainMask::from_predicate(box, [](const Point& x) { return x[0] > 1.0; });
    write_mask(scratch("m.bin"), m);
    CHECK(read_mask(scratch("m.bin")).mask == m.mask);

    std::ofstream(sidecar_path(scratch("bad.bin"))) << "{not json";
    std::ofstream(scratch("bad.bin")) << "x";
    CHECK_THROWS_AS(read_grid(scratch("bad.bin")), IoError);
    CHECK_THROWS_AS(read_grid(scratch("missing.bin")), IoError);
}
