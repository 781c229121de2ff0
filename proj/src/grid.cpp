#include <algorithm>
#include <cmath>
#include <numbers>

#include "ltlab/errors.hpp"
#include "ltlab/grid.hpp"

namespace ltlab {

BoxSpec BoxSpec::cube(int d, double lo, double hi, int points) {
    BoxSpec b;
    b.d = d;
    b.lo.assign(d, lo);
    b.hi.assign(d, hi);
    b.points.assign(d, points);
    b.validate();
    return b;
}

BoxSpec BoxSpec::centered(int d, double length, int points) {
    return cube(d, -0.5 * length, 0.5 * length, points);
}

void BoxSpec::validate() const {
    if (d < 1 || d > 3) throw ConfigError("box: dimension must be 1, 2 or 3");
    if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d ||
        static_cast<int>(points.size()) != d)
        throw ConfigError("box: lo/hi/points must have d entries");
    for (int a = 0; a < d; ++a) {
        if (!(hi[a] > lo[a])) throw ConfigError("box: hi must exceed lo on every axis");
        if (points[a] < 8) throw ConfigError("box: at least 8 points per axis");
        if ((points[a] & (points[a] - 1)) != 0) throw ConfigError("box: points must be a power of two");
    }
    const double h0 = (hi[0] - lo[0]) / points[0];
    for (int a = 1; a < d; ++a) {
        const double ha = (hi[a] - lo[a]) / points[a];
        if (std::abs(ha - h0) > 1e-12 * h0) throw ConfigError("box: axes must share the grid spacing");
    }
}

std::size_t BoxSpec::size() const {
    std::size_t n = 1;
    for (int a = 0; a < d; ++a) n *= static_cast<std::size_t>(points[a]);
    return n;
}

double BoxSpec::cell_volume() const { return std::pow(h(), d); }

std::array<int, 3> BoxSpec::unravel(std::size_t idx) const {
    std::array<int, 3> ijk{0, 0, 0};
    for (int a = d - 1; a >= 0; --a) {
        ijk[a] = static_cast<int>(idx % points[a]);
        idx /= points[a];
    }
    return ijk;
}

std::size_t BoxSpec::ravel(const std::array<int, 3>& ijk) const {
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a) idx = idx * points[a] + static_cast<std::size_t>(ijk[a]);
    return idx;
}

Point BoxSpec::position(std::size_t idx) const {
    const auto ijk = unravel(idx);
    Point x{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) x[a] = coord(a, ijk[a]);
    return x;
}

BoxSpec BoxSpec::dilated(double factor) const {
    BoxSpec b = *this;
    for (int a = 0; a < d; ++a) {
        b.lo[a] *= factor;
        b.hi[a] *= factor;
    }
    return b;
}

GridFunction::GridFunction(BoxSpec b) : box(std::move(b)) {
    box.validate();
    values.assign(box.size(), cplx{0.0, 0.0});
}

GridFunction::GridFunction(BoxSpec b, std::vector<cplx> v) : box(std::move(b)), values(std::move(v)) {
    box.validate();
    if (values.size() != box.size()) throw ConfigError("grid function: value count does not match box");
}

GridFunction GridFunction::sample(const BoxSpec& box, const std::function<cplx(const Point&)>& f) {
    GridFunction g(box);
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] = f(box.position(i));
    return g;
}

double GridFunction::norm2() const {
    double acc = 0.0;
    for (const auto& v : values) acc += std::norm(v);
    return acc * box.cell_volume();
}

double GridFunction::integral_abs_pow(double p) const {
    double acc = 0.0;
    for (const auto& v : values) acc += std::pow(std::abs(v), p);
    return acc * box.cell_volume();
}

void GridFunction::normalize() {
    const double n = norm2();
    if (!(n > 0.0)) throw NumericError("cannot normalise a zero function");
    const double f = 1.0 / std::sqrt(n);
    for (auto& v : values) v *= f;
}

bool GridFunction::finite() const {
    return std::all_of(values.begin(), values.end(),
                       [](const cplx& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

GridFunction embed(const GridFunction& u, const BoxSpec& larger) {
    larger.validate();
    const BoxSpec& b = u.box;
    if (larger.d != b.d) throw ConfigError("embed: dimension mismatch");
    if (std::abs(larger.h() - b.h()) > 1e-12 * b.h()) throw ConfigError("embed: spacing differs");
    std::array<int, 3> off{0, 0, 0};
    for (int a = 0; a < b.d; ++a) {
        const double shift = (b.lo[a] - larger.lo[a]) / b.h();
        off[a] = int(std::lround(shift));
        if (std::abs(shift - off[a]) > 1e-9 || off[a] < 0 || off[a] + b.points[a] > larger.points[a])
            throw ConfigError("embed: box does not fit on the larger grid");
    }
    GridFunction out(larger);
    for (std::size_t i = 0; i < u.size(); ++i) {
        auto ijk = b.unravel(i);
        for (int a = 0; a < b.d; ++a) ijk[a] += off[a];
        out.values[larger.ravel(ijk)] = u.values[i];
    }
    return out;
}

DomainMask::DomainMask(BoxSpec b) : box(std::move(b)) {
    box.validate();
    mask.assign(box.size(), 0);
}

DomainMask DomainMask::from_predicate(const BoxSpec& box, const std::function<bool(const Point&)>& inside) {
    DomainMask m(box);
    for (std::size_t i = 0; i < m.mask.size(); ++i) m.mask[i] = inside(box.position(i)) ? 1 : 0;
    return m;
}

DomainMask DomainMask::full(const BoxSpec& box) {
    DomainMask m(box);
    std::fill(m.mask.begin(), m.mask.end(), 1);
    return m;
}

std::size_t DomainMask::count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
}

bool DomainMask::is_full() const { return count() == mask.size(); }

DomainMask DomainMask::united(const DomainMask& other) const {
    if (!(box == other.box)) throw ConfigError("mask union: boxes differ");
    DomainMask m = *this;
    for (std::size_t i = 0; i < m.mask.size(); ++i) m.mask[i] = (mask[i] || other.mask[i]) ? 1 : 0;
    return m;
}

bool DomainMask::disjoint(const DomainMask& other) const {
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i] && other.mask[i]) return false;
    return true;
}

SeminormSpec SeminormSpec::make(double s, int d) {
    if (!(s > 0.0)) throw ConfigError("seminorm: s must be positive");
    SeminormSpec spec;
    spec.s = s;
    spec.m = static_cast<int>(std::floor(s + 1e-12));
    spec.sigma = s - spec.m;
    if (spec.sigma < 1e-12) spec.sigma = 0.0;
    if (spec.sigma > 0.0) {
        const double sg = spec.sigma;
        spec.c_norm = std::pow(2.0, 2.0 * sg - 1.0) * std::pow(std::numbers::pi, -0.5 * d) *
                      std::tgamma(0.5 * d + sg) / std::abs(std::tgamma(-sg));
    }
    return spec;
}

std::vector<double> wavenumbers(int points, double length) {
    std::vector<double> k(points);
    const double base = 2.0 * std::numbers::pi / length;
    for (int j = 0; j < points; ++j) k[j] = base * (j < points / 2 ? j : j - points);
    return k;
}

std::vector<double> wavevector_sq(const BoxSpec& box) {
    std::vector<std::vector<double>> ks;
    for (int a = 0; a < box.d; ++a) ks.push_back(wavenumbers(box.points[a], box.length(a)));
    std::vector<double> p2(box.size());
    for (std::size_t i = 0; i < p2.size(); ++i) {
        const auto ijk = box.unravel(i);
        double acc = 0.0;
        for (int a = 0; a < box.d; ++a) acc += ks[a][ijk[a]] * ks[a][ijk[a]];
        p2[i] = acc;
    }
    return p2;
}

GridFunction frac_laplacian_apply(const GridFunction& u, double s) {
    if (!(s > 0.0)) throw ConfigError("fractional laplacian: s must be positive");
    Fft fft(u.box.points);
    GridFunction out = u;
    fft.forward(out.values);
    const auto p2 = wavevector_sq(u.box);
    for (std::size_t i = 0; i < p2.size(); ++i) out.values[i] *= std::pow(p2[i], s);
    fft.backward(out.values);
    return out;
}

bool boundary_decay_ok(const GridFunction& u, double rel) {
    double vmax = 0.0;
    for (const auto& v : u.values) vmax = std::max(vmax, std::abs(v));
    if (vmax == 0.0) return true;
    double bmax = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const auto ijk = u.box.unravel(i);
        bool edge = false;
        for (int a = 0; a < u.box.d; ++a) edge = edge || ijk[a] == 0 || ijk[a] == u.box.points[a] - 1;
        if (edge) bmax = std::max(bmax, std::abs(u.values[i]));
    }
    return bmax <= rel * vmax;
}

EnergyValue seminorm_global(const GridFunction& u, double s) {
    if (!(s > 0.0)) throw ConfigError("seminorm: s must be positive");
    Fft fft(u.box.points);
    std::vector<cplx> uh = u.values;
    fft.forward(uh);
    const auto p2 = wavevector_sq(u.box);
    double acc = 0.0;
    for (std::size_t i = 0; i < p2.size(); ++i) acc += std::pow(p2[i], s) * std::norm(uh[i]);
    // Parseval: sum |u|^2 h^d = (h^d / n) sum |uhat|^2
    acc *= u.box.cell_volume() / static_cast<double>(u.values.size());
    return {std::max(acc, 0.0), boundary_decay_ok(u)};
}

GridFunction derivative(const GridFunction& u, const std::array<int, 3>& alpha) {
    const BoxSpec& box = u.box;
    bool trivial = true;
    for (int a = 0; a < box.d; ++a) trivial = trivial && alpha[a] == 0;
    if (trivial) return u;
    std::vector<std::vector<cplx>> factor(box.d);
    for (int a = 0; a < box.d; ++a) {
        const auto k = wavenumbers(box.points[a], box.length(a));
        factor[a].resize(k.size());
        for (std::size_t j = 0; j < k.size(); ++j) {
            // The Nyquist mode has no real-valued odd derivative.
            if (alpha[a] % 2 == 1 && static_cast<int>(j) == box.points[a] / 2) {
                factor[a][j] = 0.0;
                continue;
            }
            factor[a][j] = std::pow(cplx{0.0, k[j]}, alpha[a]);
        }
    }
    Fft fft(box.points);
    GridFunction out = u;
    fft.forward(out.values);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const auto ijk = box.unravel(i);
        cplx f{1.0, 0.0};
        for (int a = 0; a < box.d; ++a) f *= factor[a][ijk[a]];
        out.values[i] *= f;
    }
    fft.backward(out.values);
    return out;
}

std::vector<double> hardy_potential(const BoxSpec& box, double s) {
    std::vector<double> v(box.size());
    const double floor_r = 0.5 * box.h();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto x = box.position(i);
        double r2 = 0.0;
        for (int a = 0; a < box.d; ++a) r2 += x[a] * x[a];
        v[i] = std::pow(std::max(std::sqrt(r2), floor_r), -2.0 * s);
    }
    return v;
}

double hardy_energy(const GridFunction& u, double s) {
    if (!(2.0 * s < u.box.d)) throw ConfigError("Hardy regime requires 2s < d");
    if (!(s > 0.0)) throw ConfigError("hardy energy: s must be positive");
    const auto v = hardy_potential(u.box, s);
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * std::norm(u.values[i]);
    return acc * u.box.cell_volume();
}

std::vector<std::pair<std::array<int, 3>, double>> multi_indices(int d, int m) {
    std::vector<std::pair<std::array<int, 3>, double>> out;
    auto fact = [](int n) { return std::tgamma(n + 1.0); };
    std::array<int, 3> a{0, 0, 0};
    for (a[0] = 0; a[0] <= m; ++a[0]) {
        if (d == 1) {
            if (a[0] == m) out.push_back({{m, 0, 0}, 1.0});
            continue;
        }
        for (a[1] = 0; a[0] + a[1] <= m; ++a[1]) {
            if (d == 2) {
                if (a[0] + a[1] == m) out.push_back({{a[0], a[1], 0}, fact(m) / (fact(a[0]) * fact(a[1]))});
                continue;
            }
            const int c = m - a[0] - a[1];
            out.push_back({{a[0], a[1], c}, fact(m) / (fact(a[0]) * fact(a[1]) * fact(c))});
        }
    }
    return out;
}

}  // namespace ltlab
