#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "ltlab/constants.hpp"
#include "ltlab/errors.hpp"
#include "ltlab/frank.hpp"
#include "ltlab/seminorm.hpp"

namespace ltlab {

namespace {

struct Component {
    Point c{0.0, 0.0, 0.0};
    double log_w = 0.0;
    double amp = 1.0;
};

using Mixture = std::vector<Component>;

double width_lo(const BoxSpec& box) { return 2.0 * box.h(); }
double width_hi(const BoxSpec& box) { return std::max(box.length(0) / 10.0, 4.0 * box.h()); }

Mixture draw_mixture(const BoxSpec& box, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(1, 3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> nd(0.0, 1.0);
    Mixture m(count(rng));
    const double lw0 = std::log(width_lo(box));
    const double lw1 = std::log(width_hi(box));
    for (auto& comp : m) {
        for (int a = 0; a < box.d; ++a)
            comp.c[a] = 0.5 * (box.lo[a] + box.hi[a]) + (2.0 * unit(rng) - 1.0) * box.length(a) / 6.0;
        comp.log_w = lw0 + unit(rng) * (lw1 - lw0);
        comp.amp = nd(rng);
    }
    return m;
}

GridFunction render(const BoxSpec& box, const Mixture& m) {
    const double lw0 = std::log(width_lo(box));
    const double lw1 = std::log(width_hi(box));
    return GridFunction::sample(box, [&](const Point& x) {
        double v = 0.0;
        for (const auto& comp : m) {
            const double w = std::exp(std::clamp(comp.log_w, lw0, lw1));
            double r2 = 0.0;
            for (int a = 0; a < box.d; ++a) r2 += (x[a] - comp.c[a]) * (x[a] - comp.c[a]);
            v += comp.amp * std::exp(-0.5 * r2 / (w * w));
        }
        return cplx{v, 0.0};
    });
}

void check_hardy_range(double s, int d) {
    if (!(s > 0.0) || !(2.0 * s < d)) throw ConfigError("Hardy regime requires 2s < d");
}

}  // namespace

GridFunction random_gaussian_mixture(const BoxSpec& box, std::mt19937_64& rng) {
    return render(box, draw_mixture(box, rng));
}

FrankCalibration calibrate_frank(double s, double t, const BoxSpec& box, const std::vector<double>& ells,
                                 int lanczos_steps, std::uint64_t seed) {
    check_hardy_range(s, box.d);
    if (!(t > 0.0 && t < s)) throw ConfigError("frank: need 0 < t < s");
    if (ells.empty()) throw ConfigError("frank: no scales given");
    if (lanczos_steps < 2) throw ConfigError("frank: need at least two Lanczos steps");
    const auto p2 = wavevector_sq(box);
    const auto pot = hardy_potential(box, s);
    const double ch = hardy_constant(s, box.d).value;
    const std::size_t n = box.size();
    const int steps = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(lanczos_steps), n));
    Fft fft(box.points);
    FrankCalibration cal;
    cal.value = -std::numeric_limits<double>::infinity();
    cal.lanczos_steps = 0;
    for (double ell : ells) {
        if (!(ell > 0.0)) throw ConfigError("frank: scales must be positive");
        std::vector<double> symbol(n);
        for (std::size_t i = 0; i < n; ++i)
            symbol[i] = std::pow(ell, s - t) * std::pow(p2[i], t) - std::pow(p2[i], s);
        std::vector<cplx> buf(n);
        auto apply = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
            for (std::size_t i = 0; i < n; ++i) buf[i] = v[static_cast<Eigen::Index>(i)];
            fft.forward(buf);
            for (std::size_t i = 0; i < n; ++i) buf[i] *= symbol[i];
            fft.backward(buf);
            out.resize(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i)
                out[static_cast<Eigen::Index>(i)] = buf[i].real() + ch * pot[i] * v[static_cast<Eigen::Index>(i)];
        };
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd(0.0, 1.0);
        Eigen::MatrixXd Q(static_cast<Eigen::Index>(n), steps);
        Eigen::VectorXd q(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = nd(rng);
        q.normalize();
        std::vector<double> alpha, beta;
        Eigen::VectorXd w;
        auto ritz_top = [&](int m) {
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (int k = 0; k < m; ++k) {
                T(k, k) = alpha[k];
                if (k + 1 < m) T(k, k + 1) = T(k + 1, k) = beta[k];
            }
            return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
        };
        double top = -std::numeric_limits<double>::infinity();
        bool converged = false;
        int used = 0;
        for (int k = 0; k < steps; ++k) {
            Q.col(k) = q;
            used = k + 1;
            apply(q, w);
            alpha.push_back(q.dot(w));
            // Full reorthogonalisation, applied twice.
            for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
            const double b = w.norm();
            if (b < 1e-12 * std::abs(alpha.back())) {
                converged = true;
                break;
            }
            if (used % 10 == 0) {
                const double next = ritz_top(used);
                if (std::abs(next - top) <= 1e-10 * std::max(1.0, std::abs(next))) {
                    top = next;
                    converged = true;
                    break;
                }
                top = next;
            }
            if (k + 1 == steps) break;
            beta.push_back(b);
            q = w / b;
        }
        top = ritz_top(used);
        cal.lanczos_steps = std::max(cal.lanczos_steps, used);
        cal.converged = cal.converged && converged;
        const double c = top / std::pow(ell, s);
        cal.ells.push_back(ell);
        cal.per_ell.push_back(c);
        cal.value = std::max(cal.value, c);
    }
    cal.value = std::max(cal.value, 0.0);
    return cal;
}

InequalityCheck check_frank_improvement(double s, double t, double ell, const GridFunction& u, double frank_constant,
                                        double tol) {
    check_hardy_range(s, u.box.d);
    if (!(t > 0.0 && t < s)) throw ConfigError("frank: need 0 < t < s");
    if (!(ell > 0.0)) throw ConfigError("frank: scale must be positive");
    if (!(frank_constant >= 0.0)) throw ConfigError("frank: constant must be nonnegative");
    InequalityCheck r;
    r.lhs = seminorm_global(u, s).value - hardy_constant(s, u.box.d).value * hardy_energy(u, s);
    r.rhs = std::pow(ell, s - t) * seminorm_global(u, t).value - frank_constant * std::pow(ell, s) * u.norm2();
    r.margin = r.lhs - r.rhs;
    r.holds = r.margin >= -tol * (std::abs(r.lhs) + std::abs(r.rhs));
    return r;
}

double pair_energy(const GridFunction& u, double s) {
    std::vector<double> rho(u.values.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(u.values[i]);
    return pair_density_energy(u.box, rho, rho, s);
}

double interp_ratio(const GridFunction& u, double s) {
    const int d = u.box.d;
    check_hardy_range(s, d);
    const double q = 2.0 * s / d;
    const double num = std::max(seminorm_global(u, s).value - hardy_constant(s, d).value * hardy_energy(u, s), 0.0);
    const double w = pair_energy(u, s);
    const double p = u.integral_abs_pow(gn_exponent(s, d));
    if (!(p > 0.0)) throw NumericError("interp: zero denominator");
    return std::pow(num, 1.0 - q) * std::pow(w, q) / p;
}

InterpCalibration calibrate_interp(double s, const BoxSpec& box, int pool, std::uint64_t seed) {
    check_hardy_range(s, box.d);
    if (pool < 1) throw ConfigError("interp: pool must be positive");
    std::mt19937_64 rng(seed);
    InterpCalibration cal;
    cal.pool = pool;
    std::vector<std::pair<double, Mixture>> draws;
    for (int i = 0; i < pool; ++i) {
        auto m = draw_mixture(box, rng);
        const double r = interp_ratio(render(box, m), s);
        ++cal.evaluations;
        draws.push_back({r, std::move(m)});
    }
    std::stable_sort(draws.begin(), draws.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    double best = draws.front().first;
    const std::size_t refine = std::min<std::size_t>(3, draws.size());
    for (std::size_t k = 0; k < refine; ++k) {
        Mixture m = draws[k].second;
        double cur = draws[k].first;
        double step_x = box.length(0) / 24.0;
        double step_w = 0.25;
        double step_a = 0.25;
        for (int round = 0; round < 8; ++round) {
            bool improved = false;
            for (std::size_t ci = 0; ci < m.size(); ++ci) {
                for (int coord = 0; coord < box.d + 2; ++coord) {
                    for (double sign : {1.0, -1.0}) {
                        Mixture trial = m;
                        auto& comp = trial[ci];
                        if (coord < box.d) comp.c[coord] += sign * step_x;
                        else if (coord == box.d) comp.log_w += sign * step_w;
                        else comp.amp *= std::exp(sign * step_a);
                        const double r = interp_ratio(render(box, trial), s);
                        ++cal.evaluations;
                        if (r < cur) {
                            cur = r;
                            m = std::move(trial);
                            improved = true;
                            break;
                        }
                    }
                }
            }
            if (!improved) {
                step_x *= 0.5;
                step_w *= 0.5;
                step_a *= 0.5;
            }
        }
        best = std::min(best, cur);
    }
    cal.value = best;
    return cal;
}

InequalityCheck interp_inequality_check(const GridFunction& u, double s, int d, double constant, double tol) {
    if (u.box.d != d) throw ConfigError("interp: box dimension differs from d");
    check_hardy_range(s, d);
    if (!(constant >= 0.0)) throw ConfigError("interp: constant must be nonnegative");
    const double q = 2.0 * s / d;
    const double num = std::max(seminorm_global(u, s).value - hardy_constant(s, d).value * hardy_energy(u, s), 0.0);
    InequalityCheck r;
    r.lhs = std::pow(num, 1.0 - q) * std::pow(pair_energy(u, s), q);
    r.rhs = constant * u.integral_abs_pow(gn_exponent(s, d));
    r.margin = r.lhs - r.rhs;
    r.holds = r.margin >= -tol * (std::abs(r.lhs) + std::abs(r.rhs));
    return r;
}

}  // namespace ltlab
