#include <algorithm>
#include <cmath>
#include <numbers>

#include "ltlab/constants.hpp"
#include "ltlab/errors.hpp"
#include "ltlab/nbody.hpp"
#include "ltlab/seminorm.hpp"

namespace ltlab {

namespace {

constexpr std::size_t kMaxTensor = std::size_t{1} << 24;

std::size_t tensor_size(const BoxSpec& box, int N) {
    std::size_t n = 1;
    for (int k = 0; k < N; ++k) {
        n *= box.size();
        if (n > kMaxTensor) throw ConfigError("n-body tensor exceeds the grid budget");
    }
    return n;
}

double cell_kernel(const BoxSpec& box, std::size_t a, std::size_t b, double s) {
    const auto xa = box.position(a);
    const auto xb = box.position(b);
    double r2 = 0.0;
    for (int k = 0; k < box.d; ++k) r2 += (xa[k] - xb[k]) * (xa[k] - xb[k]);
    return pair_kernel(std::sqrt(r2), box.h(), s);
}

std::vector<double> one_body_symbol(const BoxSpec& box, double s) {
    auto p2 = wavevector_sq(box);
    for (auto& v : p2) v = std::pow(v, s);
    return p2;
}

}  // namespace

NBodyState::NBodyState(int n, BoxSpec b, std::vector<cplx> v) : N(n), box(std::move(b)), values(std::move(v)) {}

void NBodyState::validate() const {
    box.validate();
    if (N < 2 || N > 3) throw ConfigError("n-body: N must be 2 or 3");
    if (N == 3 && box.d > 2) throw ConfigError("n-body: N = 3 needs d <= 2");
    if (values.size() != tensor_size(box, N)) throw ConfigError("n-body: value count does not match the grid");
    for (const auto& v : values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericError("n-body: non-finite value");
    if (std::abs(norm2() - 1.0) > 1e-10) throw ConfigError("n-body: state is not normalised");
}

double NBodyState::norm2() const {
    double acc = 0.0;
    for (const auto& v : values) acc += std::norm(v);
    return acc * std::pow(box.cell_volume(), N);
}

void NBodyState::normalize() {
    const double n = norm2();
    if (!(n > 0.0)) throw NumericError("cannot normalise a zero state");
    const double f = 1.0 / std::sqrt(n);
    for (auto& v : values) v *= f;
}

ProductState::ProductState(std::vector<GridFunction> fs) : factors(std::move(fs)) {
    if (factors.size() < 2) throw ConfigError("product state needs at least two factors");
    N = static_cast<int>(factors.size());
    box = factors.front().box;
    for (auto& f : factors) {
        if (!(f.box == box)) throw ConfigError("product state: factors live on different boxes");
        f.normalize();
    }
    const double hd = box.cell_volume();
    for (std::size_t i = 0; i < factors.size(); ++i)
        for (std::size_t j = i + 1; j < factors.size(); ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < box.size(); ++c)
                acc += std::abs(factors[i].values[c]) * std::abs(factors[j].values[c]);
            overlap = std::max(overlap, acc * hd);
        }
    overlap_warning = overlap > 1e-6;
}

void QuotientParams::validate(int d) const {
    if (!(s > 0.0)) throw ConfigError("quotient: s must be positive");
    if (!(lambda >= 0.0)) throw ConfigError("quotient: lambda must be nonnegative");
    if (hardy && !(2.0 * s < d)) throw ConfigError("Hardy regime requires 2s < d");
}

GridFunction density(const NBodyState& state) {
    state.validate();
    const std::size_t n = state.box.size();
    const double w = std::pow(state.box.cell_volume(), state.N - 1);
    GridFunction rho(state.box);
    for (std::size_t idx = 0; idx < state.values.size(); ++idx) {
        const double p = std::norm(state.values[idx]) * w;
        std::size_t rem = idx;
        for (int k = 0; k < state.N; ++k) {
            rho.values[rem % n] += p;
            rem /= n;
        }
    }
    return rho;
}

GridFunction density(const ProductState& state) {
    GridFunction rho(state.box);
    for (const auto& f : state.factors)
        for (std::size_t i = 0; i < rho.values.size(); ++i) rho.values[i] += std::norm(f.values[i]);
    return rho;
}

double kinetic_expectation(const NBodyState& state, double s) {
    state.validate();
    if (!(s > 0.0)) throw ConfigError("kinetic: s must be positive");
    const std::size_t n = state.box.size();
    const auto sym = one_body_symbol(state.box, s);
    std::vector<int> dims;
    for (int k = 0; k < state.N; ++k) dims.insert(dims.end(), state.box.points.begin(), state.box.points.end());
    Fft fft(dims);
    std::vector<cplx> hat = state.values;
    fft.forward(hat);
    double acc = 0.0;
    for (std::size_t idx = 0; idx < hat.size(); ++idx) {
        double symbol = 0.0;
        std::size_t rem = idx;
        for (int k = 0; k < state.N; ++k) {
            symbol += sym[rem % n];
            rem /= n;
        }
        acc += symbol * std::norm(hat[idx]);
    }
    return acc * std::pow(state.box.cell_volume(), state.N) / static_cast<double>(hat.size());
}

double kinetic_expectation(const ProductState& state, double s) {
    double acc = 0.0;
    for (const auto& f : state.factors) acc += seminorm_global(f, s).value;
    return acc;
}

namespace {

double hardy_part(const GridFunction& rho, double s) {
    const auto pot = hardy_potential(rho.box, s);
    double acc = 0.0;
    for (std::size_t i = 0; i < pot.size(); ++i) acc += pot[i] * rho.values[i].real();
    return hardy_constant(s, rho.box.d).value * acc * rho.box.cell_volume();
}

}  // namespace

double hardy_expectation(const NBodyState& state, double s) {
    if (!(2.0 * s < state.box.d)) throw ConfigError("Hardy regime requires 2s < d");
    return kinetic_expectation(state, s) - hardy_part(density(state), s);
}

double hardy_expectation(const ProductState& state, double s) {
    if (!(2.0 * s < state.box.d)) throw ConfigError("Hardy regime requires 2s < d");
    return kinetic_expectation(state, s) - hardy_part(density(state), s);
}

double pair_interaction(const NBodyState& state, double s) {
    state.validate();
    if (!(s > 0.0)) throw ConfigError("interaction: s must be positive");
    const BoxSpec& box = state.box;
    const std::size_t n = box.size();
    const double hd = box.cell_volume();
    std::vector<double> kern(n * n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) kern[a * n + b] = cell_kernel(box, a, b, s);
    double total = 0.0;
    for (int i = 0; i < state.N; ++i)
        for (int j = i + 1; j < state.N; ++j) {
            // Pair density of particles i and j.
            std::vector<double> pair(n * n, 0.0);
            for (std::size_t idx = 0; idx < state.values.size(); ++idx) {
                std::size_t rem = idx;
                std::size_t cells[3] = {0, 0, 0};
                for (int k = state.N - 1; k >= 0; --k) {
                    cells[k] = rem % n;
                    rem /= n;
                }
                pair[cells[i] * n + cells[j]] += std::norm(state.values[idx]);
            }
            double acc = 0.0;
            for (std::size_t c = 0; c < n * n; ++c) acc += pair[c] * kern[c];
            total += acc;
        }
    return total * std::pow(hd, state.N);
}

double pair_interaction(const ProductState& state, double s) {
    if (!(s > 0.0)) throw ConfigError("interaction: s must be positive");
    std::vector<std::vector<double>> rhos;
    for (const auto& f : state.factors) {
        std::vector<double> r(f.values.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::norm(f.values[i]);
        rhos.push_back(std::move(r));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < rhos.size(); ++i)
        for (std::size_t j = i + 1; j < rhos.size(); ++j) total += pair_density_energy(state.box, rhos[i], rhos[j], s);
    return total;
}

double density_power_integral(const GridFunction& rho, double s) {
    const double q = 1.0 + 2.0 * s / rho.box.d;
    double acc = 0.0;
    for (const auto& v : rho.values) acc += std::pow(std::max(v.real(), 0.0), q);
    return acc * rho.box.cell_volume();
}

namespace {

template <class State>
LtQuotient quotient_impl(const State& state, const QuotientParams& params) {
    params.validate(state.box.d);
    const GridFunction rho = density(state);
    LtQuotient q;
    q.kinetic = kinetic_expectation(state, params.s);
    if (params.hardy) q.hardy = hardy_part(rho, params.s);
    q.interaction = params.lambda > 0.0 ? pair_interaction(state, params.s) : 0.0;
    q.denominator = density_power_integral(rho, params.s);
    if (!(q.denominator > 0.0)) throw NumericError("quotient: zero denominator");
    q.value = (q.kinetic - q.hardy + params.lambda * q.interaction) / q.denominator;
    return q;
}

}  // namespace

LtQuotient lt_quotient(const NBodyState& state, const QuotientParams& params) { return quotient_impl(state, params); }

LtQuotient lt_quotient(const ProductState& state, const QuotientParams& params) { return quotient_impl(state, params); }

NBodyState to_tensor(const ProductState& state) {
    const std::size_t n = state.box.size();
    NBodyState out(state.N, state.box, std::vector<cplx>(tensor_size(state.box, state.N)));
    for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
        std::size_t rem = idx;
        cplx v = 1.0;
        for (int k = state.N - 1; k >= 0; --k) {
            v *= state.factors[static_cast<std::size_t>(k)].values[rem % n];
            rem /= n;
        }
        out.values[idx] = v;
    }
    out.normalize();
    return out;
}

GridFunction translate(const GridFunction& u, const Point& shift) {
    const BoxSpec& box = u.box;
    std::vector<std::vector<double>> ks;
    for (int a = 0; a < box.d; ++a) ks.push_back(wavenumbers(box.points[a], box.length(a)));
    Fft fft(box.points);
    GridFunction out = u;
    fft.forward(out.values);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const auto ijk = box.unravel(i);
        cplx factor = 1.0;
        for (int a = 0; a < box.d; ++a) {
            const double arg = ks[a][ijk[a]] * shift[a];
            // The Nyquist mode is shifted as a cosine so real inputs stay real.
            factor *= 2 * ijk[a] == box.points[a] ? cplx{std::cos(arg), 0.0} : std::polar(1.0, -arg);
        }
        out.values[i] *= factor;
    }
    fft.backward(out.values);
    return out;
}

GridFunction dilate_translate(const GridFunction& u, double ell, const Point& shift) {
    if (!(ell > 0.0)) throw ConfigError("dilation: scale must be positive");
    const BoxSpec& box = u.box;
    const int d = box.d;
    Fft fft(box.points);
    std::vector<cplx> data = u.values;
    fft.forward(data);
    // Axis by axis: data[.., k, ..] -> data[.., j, ..] = sum_k F[j][k] data[.., k, ..].
    std::array<int, 3> dims{1, 1, 1};
    for (int a = 0; a < d; ++a) dims[a] = box.points[a];
    for (int a = 0; a < d; ++a) {
        const int P = box.points[a];
        const auto k = wavenumbers(P, box.length(a));
        const double x0 = box.coord(a, 0);
        std::vector<cplx> F(static_cast<std::size_t>(P) * P);
        for (int j = 0; j < P; ++j) {
            const double t = ell * (box.coord(a, j) - shift[a]) - x0;
            const double hh = 0.5 * box.length(a) / P;
            if (t < -hh || t >= box.length(a) - hh) continue;
            for (int m = 0; m < P; ++m)
                F[static_cast<std::size_t>(j) * P + m] =
                    2 * m == P ? cplx{std::cos(k[m] * t), 0.0} : std::polar(1.0, k[m] * t);
        }
        std::size_t stride = 1;
        for (int b = a + 1; b < d; ++b) stride *= static_cast<std::size_t>(dims[b]);
        const std::size_t outer = data.size() / (stride * static_cast<std::size_t>(P));
        std::vector<cplx> line(static_cast<std::size_t>(P));
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t in = 0; in < stride; ++in) {
                const std::size_t base = o * stride * static_cast<std::size_t>(P) + in;
                for (int j = 0; j < P; ++j) {
                    cplx acc = 0.0;
                    for (int m = 0; m < P; ++m)
                        acc += F[static_cast<std::size_t>(j) * P + m] * data[base + static_cast<std::size_t>(m) * stride];
                    line[static_cast<std::size_t>(j)] = acc;
                }
                for (int j = 0; j < P; ++j) data[base + static_cast<std::size_t>(j) * stride] = line[static_cast<std::size_t>(j)];
            }
    }
    const double amp = std::pow(ell, 0.5 * d) / static_cast<double>(data.size());
    for (auto& v : data) v *= amp;
    return GridFunction(box, std::move(data));
}

double rms_width(const GridFunction& u) {
    const BoxSpec& box = u.box;
    double m = 0.0;
    Point c{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const double w = std::norm(u.values[i]);
        const auto x = box.position(i);
        m += w;
        for (int a = 0; a < box.d; ++a) c[a] += w * x[a];
    }
    if (!(m > 0.0)) throw NumericError("width of a zero function");
    for (int a = 0; a < box.d; ++a) c[a] /= m;
    double acc = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const auto x = box.position(i);
        double r2 = 0.0;
        for (int a = 0; a < box.d; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
        acc += std::norm(u.values[i]) * r2;
    }
    return std::sqrt(acc / m);
}

ProductState trial_separated(const std::vector<GridFunction>& us, const std::vector<Point>& centers, const BoxSpec& box) {
    if (us.size() != centers.size()) throw ConfigError("trial: one centre per factor required");
    if (us.size() < 2) throw ConfigError("trial: need at least two particles");
    std::vector<GridFunction> fs;
    for (std::size_t i = 0; i < us.size(); ++i) {
        if (!(us[i].box == box)) throw ConfigError("trial: factor box differs from the target box");
        fs.push_back(translate(us[i], centers[i]));
    }
    return ProductState(std::move(fs));
}

ProductState trial_hardy_pair(const GridFunction& u, const GridFunction& v, const Point& z, double ell) {
    if (!(u.box == v.box)) throw ConfigError("trial: factors live on different boxes");
    GridFunction vl = dilate_translate(v, ell, z);
    if (rms_width(vl) < 4.0 * vl.box.h()) throw ConfigError("rescaled v is under-resolved");
    return ProductState({u, std::move(vl)});
}

NBodyState random_state(int N, const BoxSpec& box, std::mt19937_64& rng) {
    if (N < 2 || N > 3) throw ConfigError("n-body: N must be 2 or 3");
    const std::size_t n = box.size();
    const std::size_t total = tensor_size(box, N);
    std::uniform_int_distribution<int> terms(1, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double L = box.length(0);
    const double wlo = 3.0 * box.h();
    const double whi = std::max(L / 8.0, 2.0 * wlo);
    std::vector<cplx> values(total, 0.0);
    const int K = terms(rng);
    for (int t = 0; t < K; ++t) {
        const cplx coef{nd(rng), nd(rng)};
        std::vector<std::vector<double>> fs;
        for (int k = 0; k < N; ++k) {
            Point c{0.0, 0.0, 0.0};
            for (int a = 0; a < box.d; ++a) c[a] = box.lo[a] + (0.25 + 0.5 * unit(rng)) * box.length(a);
            const double w = wlo * std::pow(whi / wlo, unit(rng));
            std::vector<double> f(n);
            for (std::size_t i = 0; i < n; ++i) {
                const auto x = box.position(i);
                double r2 = 0.0;
                for (int a = 0; a < box.d; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
                f[i] = std::exp(-0.5 * r2 / (w * w));
            }
            fs.push_back(std::move(f));
        }
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rem = idx;
            double v = 1.0;
            for (int k = N - 1; k >= 0; --k) {
                v *= fs[static_cast<std::size_t>(k)][rem % n];
                rem /= n;
            }
            values[idx] += coef * v;
        }
    }
    NBodyState st(N, box, std::move(values));
    st.normalize();
    return st;
}

}  // namespace ltlab
