#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ltlab/constants.hpp"
#include "ltlab/errors.hpp"
#include "ltlab/local_constants.hpp"
#include "ltlab/seminorm.hpp"

namespace ltlab {

namespace {

constexpr std::size_t kMaxDictionary = 360;

double super_gaussian_window(const Point& x, const Bounds& b, int d) {
    double acc = 0.0;
    for (int a = 0; a < d; ++a) {
        const double c = 0.5 * (b.lo[a] + b.hi[a]);
        const double half = 0.5 * (b.hi[a] - b.lo[a]);
        const double z = (x[a] - c) / half;
        acc += std::pow(z, 8);
    }
    return std::exp(-acc);
}

Bounds dilate(const Bounds& b, int d, double factor) {
    Bounds out = b;
    for (int a = 0; a < d; ++a) {
        const double c = 0.5 * (b.lo[a] + b.hi[a]);
        const double half = 0.5 * (b.hi[a] - b.lo[a]) * factor;
        out.lo[a] = c - half;
        out.hi[a] = c + half;
    }
    return out;
}

Eigen::MatrixXd restricted_matrix(const std::vector<GridFunction>& basis, const std::vector<std::size_t>& cells) {
    Eigen::MatrixXd B(cells.size(), basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j)
        for (std::size_t c = 0; c < cells.size(); ++c) B(c, j) = basis[j].values[cells[c]].real();
    return B;
}

std::vector<std::size_t> cells_of(const DomainMask& m) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < m.mask.size(); ++i)
        if (m.mask[i]) out.push_back(i);
    return out;
}

// P = h^d sum |Bc|^p over the rows of B, with gradient.
double power_term(const Eigen::MatrixXd& B, const Eigen::VectorXd& c, double p, double hd, Eigen::VectorXd* grad) {
    const Eigen::VectorXd v = B * c;
    double acc = 0.0;
    Eigen::VectorXd w(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        acc += std::pow(a, p);
        w[i] = a > 0.0 ? std::pow(a, p - 2.0) * v[i] : 0.0;
    }
    if (grad) *grad = p * hd * (B.transpose() * w);
    return acc * hd;
}

std::vector<Eigen::VectorXd> start_vectors(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& eval,
                                           const Eigen::MatrixXd& G, std::size_t k, const OptimizerParams& params,
                                           std::size_t singles) {
    std::vector<std::pair<double, std::size_t>> ranked;
    Eigen::VectorXd grad;
    for (std::size_t j = 0; j < k; ++j) {
        if (!(G(j, j) > 0.0)) continue;
        Eigen::VectorXd c = Eigen::VectorXd::Zero(k);
        c[j] = 1.0;
        const double v = eval(c, grad);
        if (std::isfinite(v)) ranked.push_back({v, j});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    std::vector<Eigen::VectorXd> starts;
    for (std::size_t i = 0; i < std::min(singles, ranked.size()); ++i) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(k);
        c[ranked[i].second] = 1.0;
        starts.push_back(c);
    }
    std::mt19937_64 rng(params.seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int r = 0; r < params.restarts; ++r) {
        Eigen::VectorXd c(k);
        for (std::size_t j = 0; j < k; ++j) c[j] = nd(rng);
        starts.push_back(c);
    }
    return starts;
}

}  // namespace

Bounds mask_bounds(const DomainMask& m) {
    Bounds b;
    const int d = m.box.d;
    for (int a = 0; a < d; ++a) {
        b.lo[a] = std::numeric_limits<double>::infinity();
        b.hi[a] = -std::numeric_limits<double>::infinity();
    }
    const double h = m.box.h();
    bool any = false;
    for (std::size_t i = 0; i < m.mask.size(); ++i) {
        if (!m.mask[i]) continue;
        any = true;
        const auto x = m.box.position(i);
        for (int a = 0; a < d; ++a) {
            b.lo[a] = std::min(b.lo[a], x[a] - 0.5 * h);
            b.hi[a] = std::max(b.hi[a], x[a] + 0.5 * h);
        }
    }
    if (!any) throw ConfigError("empty domain");
    return b;
}

TrialDictionary build_trial_dictionary(const BoxSpec& box, const DomainMask& region, double a) {
    if (!(a > 0.0)) throw ConfigError("dictionary: scale must be positive");
    const int d = box.d;
    const Bounds r = dilate(mask_bounds(region), d, 1.5);
    TrialDictionary dict;
    dict.a = a;
    dict.basis.push_back(GridFunction::sample(box, [](const Point&) { return cplx{1.0, 0.0}; }));

    std::vector<double> widths{2.0 * a, 4.0 * a, 8.0 * a};
    auto lattice_count = [&](double w) {
        std::size_t n = 1;
        for (int ax = 0; ax < d; ++ax) n *= static_cast<std::size_t>(std::floor((r.hi[ax] - r.lo[ax]) / w)) + 1;
        return n;
    };
    std::size_t total = 0;
    for (double w : widths) total += lattice_count(w);
    while (total > kMaxDictionary && widths.size() > 1) {
        total -= lattice_count(widths.front());
        widths.erase(widths.begin());
    }
    for (double w : widths) {
        std::array<int, 3> counts{1, 1, 1};
        std::array<double, 3> start{0.0, 0.0, 0.0};
        for (int ax = 0; ax < d; ++ax) {
            const double len = r.hi[ax] - r.lo[ax];
            counts[ax] = static_cast<int>(std::floor(len / w)) + 1;
            start[ax] = 0.5 * (r.lo[ax] + r.hi[ax]) - 0.5 * (counts[ax] - 1) * w;
        }
        for (int i = 0; i < counts[0]; ++i)
            for (int j = 0; j < counts[1]; ++j)
                for (int k = 0; k < counts[2]; ++k) {
                    const Point c{start[0] + i * w, start[1] + j * w, start[2] + k * w};
                    dict.basis.push_back(GridFunction::sample(box, [&](const Point& x) {
                        double r2 = 0.0;
                        for (int ax = 0; ax < d; ++ax) r2 += (x[ax] - c[ax]) * (x[ax] - c[ax]);
                        return cplx{std::exp(-0.5 * r2 / (w * w)), 0.0};
                    }));
                }
    }
    for (int ax = 0; ax < d; ++ax)
        for (int m = 1; m <= 3; ++m)
            for (int phase = 0; phase < 2; ++phase)
                dict.basis.push_back(GridFunction::sample(box, [&](const Point& x) {
                    const double arg = std::numbers::pi * m * (x[ax] - r.lo[ax]) / (r.hi[ax] - r.lo[ax]);
                    const double wave = phase == 0 ? std::cos(arg) : std::sin(arg);
                    return cplx{wave * super_gaussian_window(x, r, d), 0.0};
                }));
    return dict;
}

double grid_margin(const DomainMask& omega, const DomainMask& omega_tilde) {
    if (!(omega.box == omega_tilde.box)) throw ConfigError("margin: masks live on different boxes");
    const BoxSpec& box = omega.box;
    for (std::size_t i = 0; i < omega.mask.size(); ++i)
        if (omega.mask[i] && !omega_tilde.mask[i]) throw ConfigError("Ω must be compactly contained");
    auto on_edge = [&](const DomainMask& m, std::size_t i, bool inside) {
        const auto ijk = box.unravel(i);
        for (int a = 0; a < box.d; ++a)
            for (int step : {-1, 1}) {
                auto n = ijk;
                n[a] += step;
                if (n[a] < 0 || n[a] >= box.points[a]) continue;
                if (static_cast<bool>(m.mask[box.ravel(n)]) != inside) return true;
            }
        return false;
    };
    std::vector<Point> inner, outer;
    for (std::size_t i = 0; i < omega.mask.size(); ++i) {
        if (omega.mask[i] && on_edge(omega, i, true)) inner.push_back(box.position(i));
        if (!omega_tilde.mask[i] && on_edge(omega_tilde, i, false)) outer.push_back(box.position(i));
    }
    if (inner.empty()) {
        for (std::size_t i = 0; i < omega.mask.size(); ++i)
            if (omega.mask[i]) inner.push_back(box.position(i));
    }
    const Bounds bt = mask_bounds(omega_tilde);
    double extent = 0.0;
    for (int a = 0; a < box.d; ++a) extent = std::max(extent, bt.hi[a] - bt.lo[a]);
    if (outer.empty()) return 0.25 * extent;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& x : inner)
        for (const auto& y : outer) {
            double r2 = 0.0;
            for (int a = 0; a < box.d; ++a) r2 += (x[a] - y[a]) * (x[a] - y[a]);
            best = std::min(best, r2);
        }
    const double margin = std::sqrt(best) - box.h();
    if (margin <= 1e-12 * box.h()) throw ConfigError("Ω must be compactly contained");
    return std::min(margin, 0.25 * extent);
}

GridFunction random_smooth_function(const BoxSpec& box, const Bounds& region, std::mt19937_64& rng) {
    const int d = box.d;
    const Bounds r = dilate(region, d, 1.5);
    double extent = 0.0;
    for (int a = 0; a < d; ++a) extent = std::max(extent, r.hi[a] - r.lo[a]);
    const double h = box.h();
    std::uniform_int_distribution<int> nbumps(1, 4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> nd(0.0, 1.0);
    const double wmin = 2.0 * h;
    const double wmax = std::max(0.5 * extent, 2.0 * wmin);
    struct Bump {
        Point c;
        double w;
        double amp;
    };
    std::vector<Bump> bumps(nbumps(rng));
    for (auto& b : bumps) {
        for (int a = 0; a < d; ++a) b.c[a] = r.lo[a] + unit(rng) * (r.hi[a] - r.lo[a]);
        b.w = wmin * std::pow(wmax / wmin, unit(rng));
        b.amp = nd(rng);
    }
    const bool field = unit(rng) < 0.5;
    std::vector<std::array<double, 4>> modes;
    if (field) {
        for (int m = 0; m < 6; ++m) {
            std::array<double, 4> md{};
            for (int a = 0; a < 3; ++a) md[a] = a < d ? std::floor(unit(rng) * 4.0) : 0.0;
            md[3] = nd(rng);
            modes.push_back(md);
        }
    }
    return GridFunction::sample(box, [&](const Point& x) {
        double v = 0.0;
        for (const auto& b : bumps) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) r2 += (x[a] - b.c[a]) * (x[a] - b.c[a]);
            v += b.amp * std::exp(-0.5 * r2 / (b.w * b.w));
        }
        if (field) {
            const double win = super_gaussian_window(x, r, d);
            for (const auto& md : modes) {
                double arg = 0.0;
                for (int a = 0; a < d; ++a) arg += md[a] * std::numbers::pi * (x[a] - r.lo[a]) / (r.hi[a] - r.lo[a]);
                v += md[3] * std::cos(arg) * win;
            }
        }
        return cplx{v, 0.0};
    });
}

AscentResult ascend(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& eval,
                    const Eigen::MatrixXd& G, Eigen::VectorXd c, const OptimizerParams& params) {
    params.validate();
    // Whitened coordinates y with c = W y and W^T G W = I on the numerically
    // nondegenerate part of the span.
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const Eigen::VectorXd lam = es.eigenvalues();
    const double floor = 1e-11 * std::max(lam.maxCoeff(), 1e-300);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
        if (lam[i] > floor) keep.push_back(i);
    if (keep.empty()) throw NumericError("ascent: degenerate metric");
    Eigen::MatrixXd W(G.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j)
        W.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]) / std::sqrt(lam[keep[j]]);
    const Eigen::MatrixXd Winv = W.transpose() * G;

    auto f = [&](const Eigen::VectorXd& y, Eigen::VectorXd& gy) {
        Eigen::VectorXd gc;
        const double v = eval(W * y, gc);
        gy = W.transpose() * gc;
        return v;
    };

    AscentResult res;
    Eigen::VectorXd y = Winv * c;
    if (!(y.norm() > 0.0)) throw NumericError("ascent: degenerate start");
    y.normalize();
    Eigen::VectorXd g;
    double cur = f(y, g);
    std::vector<Eigen::VectorXd> sh, yh;
    constexpr std::size_t kMemory = 8;
    int calm = 0;
    for (int it = 1; it <= params.max_iters; ++it) {
        res.iterations = it;
        // Two-loop recursion on the negated objective.
        Eigen::VectorXd q = -g;
        std::vector<double> alpha(sh.size());
        for (std::size_t i = sh.size(); i-- > 0;) {
            alpha[i] = sh[i].dot(q) / yh[i].dot(sh[i]);
            q -= alpha[i] * yh[i];
        }
        const double gamma = sh.empty() ? std::min(params.step_size, 1.0) / std::max(g.norm(), 1e-300)
                                        : sh.back().dot(yh.back()) / yh.back().squaredNorm();
        q *= gamma;
        for (std::size_t i = 0; i < sh.size(); ++i) {
            const double beta = yh[i].dot(q) / yh[i].dot(sh[i]);
            q += (alpha[i] - beta) * sh[i];
        }
        Eigen::VectorXd dir = -q;
        dir -= y.dot(dir) * y;
        double slope = g.dot(dir);
        if (!(slope > 0.0)) {
            sh.clear();
            yh.clear();
            dir = g - y.dot(g) * y;
            dir *= std::min(params.step_size, 1.0) / std::max(dir.norm(), 1e-300);
            slope = g.dot(dir);
            if (!(slope > 0.0)) break;
        }
        if (dir.norm() > 1.0) {
            slope /= dir.norm();
            dir.normalize();
        }
        double t = 1.0;
        bool accepted = false;
        Eigen::VectorXd yt, gt;
        double next = cur;
        for (int bt = 0; bt < 40; ++bt) {
            yt = y + t * dir;
            yt.normalize();
            next = f(yt, gt);
            if (std::isfinite(next) && next >= cur + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;
        const Eigen::VectorXd s = yt - y;
        const Eigen::VectorXd dy = -(gt - g);
        if (s.dot(dy) > 1e-12 * s.norm() * dy.norm()) {
            sh.push_back(s);
            yh.push_back(dy);
            if (sh.size() > kMemory) {
                sh.erase(sh.begin());
                yh.erase(yh.begin());
            }
        }
        const double rel = std::abs(next - cur) / std::max(std::abs(cur), 1e-300);
        y = yt;
        g = gt;
        cur = next;
        calm = rel < params.tol_rel ? calm + 1 : 0;
        if (calm >= params.patience) break;
    }
    res.value = cur;
    res.c = W * y;
    return res;
}

LocalConstantResult estimate_local_constant(double s, double delta, const DomainMask& omega,
                                            const DomainMask& omega_tilde, const OptimizerParams& params,
                                            double gn_constant, bool hardy) {
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    if (!(gn_constant > 0.0)) throw ConfigError("local constant: gn constant must be positive");
    params.validate();
    const BoxSpec& box = omega.box;
    const int d = box.d;
    if (omega.empty() || omega_tilde.empty()) throw ConfigError("empty domain");
    const double margin = grid_margin(omega, omega_tilde);
    const double a = std::max(2.0 * box.h(), margin);
    const auto dict = build_trial_dictionary(box, omega_tilde, a);
    const auto spec = SeminormSpec::make(s, d);
    const Eigen::MatrixXd A0 = DomainSeminorm(box, spec, omega_tilde).gram(dict.basis);
    const double hd = box.cell_volume();
    const auto tilde_cells = cells_of(omega_tilde);
    const auto omega_cells = cells_of(omega);
    const Eigen::MatrixXd Bt = restricted_matrix(dict.basis, tilde_cells);
    const Eigen::MatrixXd Bo = restricted_matrix(dict.basis, omega_cells);
    const Eigen::MatrixXd G = hd * (Bt.transpose() * Bt);
    Eigen::MatrixXd A = A0;
    if (hardy) {
        const double ch = hardy_constant(s, d).value;
        const auto pot = hardy_potential(box, s);
        Eigen::VectorXd v(omega_cells.size());
        for (std::size_t c = 0; c < omega_cells.size(); ++c) v[c] = pot[omega_cells[c]];
        A -= ch * hd * (Bo.transpose() * v.asDiagonal() * Bo);
    }
    const double p = gn_exponent(s, d);
    const double q = 2.0 * s / d;
    const double kappa = gn_constant * (1.0 - delta);

    auto eval = [&](const Eigen::VectorXd& c, Eigen::VectorXd& grad) {
        const Eigen::VectorXd Ac = A * c;
        const Eigen::VectorXd Gc = G * c;
        const double S = c.dot(Ac);
        const double M = c.dot(Gc);
        if (!(M > 1e-6 * std::max(c.squaredNorm(), 1e-300) * G.trace() / G.rows() * 1e-6)) {
            grad = Eigen::VectorXd::Zero(c.size());
            return -std::numeric_limits<double>::infinity();
        }
        Eigen::VectorXd gp;
        const double P = power_term(Bo, c, p, hd, &gp);
        const double mq = std::pow(M, -1.0 - q);
        const double val = kappa * P * mq - S / M;
        grad = kappa * (gp * mq - (1.0 + q) * P * mq / M * 2.0 * Gc) - (2.0 * Ac / M - S / (M * M) * 2.0 * Gc);
        return val;
    };

    LocalConstantResult res;
    res.margin = margin;
    res.hardy = hardy;
    res.dictionary_size = static_cast<int>(dict.basis.size());
    double best = -std::numeric_limits<double>::infinity();
    for (auto& c0 : start_vectors(eval, G, dict.basis.size(), params, 6)) {
        const auto r = ascend(eval, G, c0, params);
        res.start_values.push_back(r.value);
        best = std::max(best, r.value);
    }
    res.supremum = best;
    res.value = std::max(0.0, best);
    return res;
}

double lup1_required_constant(double seminorm, double power, double mass, double volume, double s, int d) {
    const double q = 2.0 * s / d;
    if (!(mass > 0.0)) return 0.0;
    const double a = power / std::pow(mass, q);
    const double b = mass / std::pow(volume, q);
    return (-seminorm + std::sqrt(seminorm * seminorm + 4.0 * a * b)) / (2.0 * b);
}

Lup1Setup lup1_setup(int d, double side, int points) {
    if (d < 1 || d > 3) throw ConfigError("dimension must be 1, 2 or 3");
    if (!(side > 0.0)) throw ConfigError("cube side must be positive");
    if (points == 0) points = d == 1 ? 256 : (d == 2 ? 64 : 32);
    Lup1Setup st;
    st.box = BoxSpec::centered(d, 4.0 * side, points);
    st.cube = DomainMask::from_predicate(st.box, [&](const Point& x) {
        for (int a = 0; a < d; ++a)
            if (std::abs(x[a]) >= 0.5 * side) return false;
        return true;
    });
    st.volume = std::pow(side, d);
    return st;
}

double lup1_ratio(const GridFunction& u, const Lup1Setup& setup, double s, bool hardy) {
    const int d = setup.box.d;
    const auto spec = SeminormSpec::make(s, d);
    double S = seminorm_domain(u, spec, setup.cube);
    const double hd = setup.box.cell_volume();
    const double p = gn_exponent(s, d);
    double M = 0.0, P = 0.0, H = 0.0;
    std::vector<double> pot;
    if (hardy) pot = hardy_potential(setup.box, s);
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        if (!setup.cube.mask[i]) continue;
        const double a2 = std::norm(u.values[i]);
        M += a2;
        P += std::pow(a2, 0.5 * p);
        if (hardy) H += pot[i] * a2;
    }
    if (hardy) S -= hardy_constant(s, d).value * H * hd;
    return lup1_required_constant(S, P * hd, M * hd, setup.volume, s, d);
}

Lup1Result estimate_lup1_constant(double s, int d, const OptimizerParams& params, bool hardy, double side,
                                  int holdout) {
    params.validate();
    const auto st = lup1_setup(d, side);
    const BoxSpec& box = st.box;
    const double a = std::max(2.0 * box.h(), side / 8.0);
    const auto dict = build_trial_dictionary(box, st.cube, a);
    const auto spec = SeminormSpec::make(s, d);
    const double hd = box.cell_volume();
    const auto cells = cells_of(st.cube);
    const Eigen::MatrixXd B = restricted_matrix(dict.basis, cells);
    const Eigen::MatrixXd G = hd * (B.transpose() * B);
    Eigen::MatrixXd A = DomainSeminorm(box, spec, st.cube).gram(dict.basis);
    if (hardy) {
        const double ch = hardy_constant(s, d).value;
        const auto pot = hardy_potential(box, s);
        Eigen::VectorXd v(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) v[c] = pot[cells[c]];
        A -= ch * hd * (B.transpose() * v.asDiagonal() * B);
    }
    const double p = gn_exponent(s, d);
    const double q = 2.0 * s / d;
    const double volq = std::pow(st.volume, q);

    auto eval = [&](const Eigen::VectorXd& c, Eigen::VectorXd& grad) {
        const Eigen::VectorXd Ac = A * c;
        const Eigen::VectorXd Gc = G * c;
        const double S = c.dot(Ac);
        const double M = c.dot(Gc);
        if (!(M > 0.0)) {
            grad = Eigen::VectorXd::Zero(c.size());
            return -std::numeric_limits<double>::infinity();
        }
        Eigen::VectorXd gp;
        const double P = power_term(B, c, p, hd, &gp);
        const double av = P / std::pow(M, q);
        const double bv = M / volq;
        const double R = std::sqrt(S * S + 4.0 * av * bv);
        const double C = (-S + R) / (2.0 * bv);
        const Eigen::VectorXd dS = 2.0 * Ac;
        const Eigen::VectorXd dM = 2.0 * Gc;
        const Eigen::VectorXd da = gp / std::pow(M, q) - q * P * std::pow(M, -q - 1.0) * dM;
        const Eigen::VectorXd db = dM / volq;
        grad = ((-1.0 + S / R) / (2.0 * bv)) * dS + (1.0 / R) * da + (av / (bv * R) - C / bv) * db;
        return C;
    };

    Lup1Result res;
    res.hardy = hardy;
    res.dictionary_size = static_cast<int>(dict.basis.size());
    double best = 0.0;
    for (auto& c0 : start_vectors(eval, G, dict.basis.size(), params, 6)) best = std::max(best, ascend(eval, G, c0, params).value);
    res.optimized = best;

    std::mt19937_64 rng(params.seed ^ 0x9e3779b97f4a7c15ULL);
    const Bounds qb = mask_bounds(st.cube);
    double hmax = 0.0;
    int violations = 0;
    for (int i = 0; i < holdout; ++i) {
        const auto u = random_smooth_function(box, qb, rng);
        const double c = lup1_ratio(u, st, s, hardy);
        hmax = std::max(hmax, c);
        if (c > best * (1.0 + 1e-9)) ++violations;
    }
    res.holdout_samples = holdout;
    res.holdout_max = hmax;
    res.holdout_violations = violations;
    res.value = std::max(best, hmax);
    return res;
}

}  // namespace ltlab
