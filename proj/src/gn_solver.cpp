#include <algorithm>
#include <cmath>

#include "ltlab/constants.hpp"
#include "ltlab/errors.hpp"
#include "ltlab/gn_solver.hpp"

namespace ltlab {

void OptimizerParams::validate() const {
    if (!(tol_rel > 0.0)) throw ConfigError("optimizer: tol_rel must be positive");
    if (restarts < 1) throw ConfigError("optimizer: restarts must be at least 1");
    if (max_iters < 1) throw ConfigError("optimizer: max_iters must be at least 1");
    if (!(step_size > 0.0)) throw ConfigError("optimizer: step_size must be positive");
    if (patience < 1) throw ConfigError("optimizer: patience must be at least 1");
}

QuotientFunctional::QuotientFunctional(const BoxSpec& box, double s, bool hardy)
    : box_(box), s_(s), p_(gn_exponent(s, box.d)), q_(2.0 * s / box.d), fft_(box.points) {
    if (!(s > 0.0)) throw ConfigError("quotient: s must be positive");
    const auto p2 = wavevector_sq(box);
    symbol_.resize(p2.size());
    for (std::size_t i = 0; i < p2.size(); ++i) symbol_[i] = std::pow(p2[i], s);
    if (hardy) {
        hardy_c_ = hardy_constant(s, box.d).value;
        potential_ = hardy_potential(box, s);
    }
}

QuotientFunctional::Parts QuotientFunctional::parts(const GridFunction& u) const {
    const double hd = box_.cell_volume();
    std::vector<cplx> uh = u.values;
    fft_.forward(uh);
    Parts r;
    double t = 0.0;
    for (std::size_t i = 0; i < uh.size(); ++i) t += symbol_[i] * std::norm(uh[i]);
    r.kinetic = t * hd / static_cast<double>(uh.size());
    double m = 0.0, pw = 0.0, hv = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        const double a2 = std::norm(u.values[i]);
        m += a2;
        pw += std::pow(a2, 0.5 * p_);
        if (hardy_c_ > 0.0) hv += potential_[i] * a2;
    }
    r.mass = m * hd;
    r.power = pw * hd;
    r.hardy = hv * hd;
    r.numerator = r.kinetic - hardy_c_ * r.hardy;
    if (!(r.power > 0.0)) throw NumericError("quotient: zero denominator");
    r.value = r.numerator * std::pow(r.mass, q_) / r.power;
    return r;
}

QuotientFunctional::Parts QuotientFunctional::gradient(const GridFunction& u, GridFunction& grad) const {
    const Parts r = parts(u);
    std::vector<cplx> au = u.values;
    fft_.forward(au);
    for (std::size_t i = 0; i < au.size(); ++i) au[i] *= symbol_[i];
    fft_.backward(au);
    const double a = std::pow(r.mass, q_) / r.power;
    grad.box = u.box;
    grad.values.resize(u.values.size());
    for (std::size_t i = 0; i < au.size(); ++i) {
        const cplx v = u.values[i];
        cplx dn = 2.0 * au[i];
        if (hardy_c_ > 0.0) dn -= 2.0 * hardy_c_ * potential_[i] * v;
        const cplx dm = 2.0 * v;
        const cplx dp = p_ * std::pow(std::norm(v), 0.5 * p_ - 1.0) * v;
        grad.values[i] = a * dn + r.value * q_ * dm / r.mass - r.value * dp / r.power;
    }
    return r;
}

void QuotientFunctional::kinetic_gradient(const GridFunction& u, GridFunction& grad) const {
    grad = u;
    fft_.forward(grad.values);
    for (std::size_t i = 0; i < grad.values.size(); ++i) grad.values[i] *= 2.0 * symbol_[i];
    fft_.backward(grad.values);
}

void QuotientFunctional::precondition(GridFunction& g, double mu) const {
    fft_.forward(g.values);
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] /= (1.0 + symbol_[i] / mu);
    fft_.backward(g.values);
}

double gn_quotient(const GridFunction& u, double s) { return QuotientFunctional(u.box, s, false).value(u); }

double hgn_quotient(const GridFunction& u, double s) { return QuotientFunctional(u.box, s, true).value(u); }

namespace {

double inner(const GridFunction& a, const GridFunction& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) acc += (std::conj(a.values[i]) * b.values[i]).real();
    return acc * a.box.cell_volume();
}

}  // namespace

// Descent runs on {||u|| = 1, kinetic = T0}. The quotient is dilation
// invariant on R^d, so fixing the kinetic energy only fixes the scale; on the
// torus it also blocks the drift towards the constant function, which has
// quotient zero there.
QuotientResult descend(const QuotientFunctional& f, GridFunction u, const OptimizerParams& params) {
    params.validate();
    u.normalize();
    QuotientResult res;
    GridFunction g, gt;
    auto cur = f.gradient(u, g);
    const double t0 = cur.kinetic;
    res.trace.push_back(cur.value);
    double t = std::min(params.step_size, 0.5);
    int calm = 0;
    const double armijo = 1e-4;

    // Newton correction along the kinetic gradient back onto the constraint.
    auto retract = [&](GridFunction& v) {
        v.normalize();
        GridFunction w;
        for (int k = 0; k < 30; ++k) {
            const double tv = f.parts(v).kinetic;
            if (std::abs(tv - t0) <= 1e-12 * t0) break;
            f.kinetic_gradient(v, w);
            const double a = inner(v, w) / inner(v, v);
            for (std::size_t i = 0; i < w.values.size(); ++i) w.values[i] -= a * v.values[i];
            const double ww = inner(w, w);
            if (!(ww > 0.0)) break;
            const double gamma = (tv - t0) / ww;
            for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] -= gamma * w.values[i];
            v.normalize();
        }
    };

    for (int it = 1; it <= params.max_iters; ++it) {
        res.iterations = it;
        const double mu = std::max(cur.kinetic / cur.mass, 1e-12);
        f.kinetic_gradient(u, gt);
        const double uu = inner(u, u);
        const double tu = inner(u, gt) / uu;
        for (std::size_t i = 0; i < gt.values.size(); ++i) gt.values[i] -= tu * u.values[i];
        const double tt = std::max(inner(gt, gt), 1e-300);
        auto project = [&](GridFunction& v) {
            const double a = inner(u, v) / uu;
            const double b = inner(gt, v) / tt;
            for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] -= a * u.values[i] + b * gt.values[i];
        };
        GridFunction dir = g;
        project(dir);
        f.precondition(dir, mu);
        project(dir);
        const double dnorm = std::sqrt(inner(dir, dir));
        const double slope = inner(g, dir);
        if (!(dnorm > 0.0) || !(slope > 0.0)) {
            res.converged = true;
            break;
        }
        const double unit = 1.0 / dnorm;
        bool accepted = false;
        GridFunction trial(u.box);
        QuotientFunctional::Parts next;
        for (int bt = 0; bt < 50; ++bt) {
            for (std::size_t i = 0; i < u.values.size(); ++i) trial.values[i] = u.values[i] - t * unit * dir.values[i];
            retract(trial);
            next = f.parts(trial);
            if (next.value <= cur.value - armijo * t * unit * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            res.converged = true;
            break;
        }
        const double rel = std::abs(cur.value - next.value) / std::max(std::abs(cur.value), 1e-300);
        u = std::move(trial);
        cur = f.gradient(u, g);
        res.trace.push_back(cur.value);
        t = std::min(1.5 * t, 0.5);
        calm = rel < params.tol_rel ? calm + 1 : 0;
        if (calm >= params.patience) {
            res.converged = true;
            break;
        }
    }
    res.value = cur.value;
    res.decay_ok = boundary_decay_ok(u);
    res.minimizer = std::move(u);
    return res;
}

GridFunction random_bump(const BoxSpec& box, std::mt19937_64& rng, double center_spread) {
    const double L = box.length(0);
    const double h = box.h();
    std::uniform_real_distribution<double> width(std::max(4.0 * h, L / 80.0), std::max(8.0 * h, L / 30.0));
    std::uniform_real_distribution<double> shift(-center_spread, center_spread);
    const double w = width(rng);
    Point c{0.0, 0.0, 0.0};
    for (int a = 0; a < box.d; ++a) c[a] = 0.5 * (box.lo[a] + box.hi[a]) + shift(rng) * box.length(a);
    return GridFunction::sample(box, [&](const Point& x) {
        double r2 = 0.0;
        for (int a = 0; a < box.d; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
        return cplx{std::exp(-0.5 * r2 / (w * w)), 0.0};
    });
}

namespace {

QuotientResult run_restarts(const QuotientFunctional& f, const OptimizerParams& params, double spread) {
    params.validate();
    std::mt19937_64 rng(params.seed);
    QuotientResult best;
    bool have = false;
    std::vector<double> values;
    std::vector<int> iters;
    for (int r = 0; r < params.restarts; ++r) {
        auto u0 = random_bump(f.box(), rng, spread);
        auto res = descend(f, std::move(u0), params);
        values.push_back(res.value);
        iters.push_back(res.iterations);
        if (!have || res.value < best.value) {
            best = std::move(res);
            have = true;
        }
    }
    best.restart_values = std::move(values);
    best.restart_iterations = std::move(iters);
    return best;
}

void check_dims(double s, int d, const BoxSpec& box) {
    if (box.d != d) throw ConfigError("solver: box dimension differs from d");
    if (!(s > 0.0)) throw ConfigError("solver: s must be positive");
}

}  // namespace

QuotientResult minimize_gn(double s, int d, const BoxSpec& box, const OptimizerParams& params) {
    check_dims(s, d, box);
    QuotientFunctional f(box, s, false);
    return run_restarts(f, params, 0.1);
}

QuotientResult minimize_hgn(double s, int d, const BoxSpec& box, const OptimizerParams& params) {
    check_dims(s, d, box);
    if (!(2.0 * s < d)) throw ConfigError("Hardy regime requires 2s < d");
    QuotientFunctional f(box, s, true);
    auto res = run_restarts(f, params, 0.02);
    const auto parts = f.parts(res.minimizer);
    res.value = std::max(parts.numerator, 0.0) * std::pow(parts.mass, 2.0 * s / d) / parts.power;
    for (auto& v : res.restart_values) v = std::max(v, 0.0);
    return res;
}

}  // namespace ltlab
