#include "ltlab/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ltlab/constants.hpp"
#include "ltlab/errors.hpp"
#include "ltlab/local_constants.hpp"

namespace ltlab {

double lup1_branch(double delta, double s, int d, double c_emp) {
    return 1.0 / (c_emp * std::pow(delta, s / d));
}

double lup2_branch(double delta, double s, int d, double gn_constant) {
    return gn_constant * (1.0 - delta) * (1.0 - std::pow(delta, s / d)) / std::pow(1.0 + delta, 2.0 * s / d);
}

double certificate_factor(double delta, double s, int d, double c_emp, double gn_constant) {
    return std::min(lup1_branch(delta, s, d, c_emp), lup2_branch(delta, s, d, gn_constant));
}

double exclusion_conversion_constant(double delta, int epsilon_inv, double s, int d) {
    const double reach = std::sqrt(double(d)) * (1.0 / delta + 2.0);
    const double radius = reach + 0.5 * std::sqrt(double(d));
    const int r = int(std::floor(radius));
    long count = 0;
    for (int i = -r; i <= r; ++i)
        for (int j = (d > 1 ? -r : 0); j <= (d > 1 ? r : 0); ++j)
            for (int k = (d > 2 ? -r : 0); k <= (d > 2 ? r : 0); ++k)
                if (double(i) * i + double(j) * j + double(k) * k <= radius * radius) ++count;
    const double e2s = std::pow(1.0 / epsilon_inv, 2.0 * s);
    return 4.0 * double(count) * std::pow(2.0 * reach, 2.0 * s) / (delta * (1.0 - e2s) * e2s);
}

double lambda_threshold(double delta, int epsilon_inv, double s, int d, double c_emp, double c_loc) {
    return exclusion_conversion_constant(delta, epsilon_inv, s, d) * std::max(c_emp * std::pow(delta, s / d), c_loc);
}

void CertifyParams::validate() const {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("s must be positive");
    if (d < 1 || d > 3) throw ConfigError("d must be 1, 2 or 3");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    if (epsilon_inv < 2) throw ConfigError("epsilon_inv must be at least 2");
    if (lambda && !(*lambda >= 0.0 && std::isfinite(*lambda))) throw ConfigError("lambda must be nonnegative");
    if (!(tolerance >= 0.0)) throw ConfigError("tolerance must be nonnegative");
    if (max_level < 0) throw ConfigError("max_level must be nonnegative");
    if (hardy) {
        if (!(2.0 * s < d)) throw ConfigError("hardy certify needs 2s < d");
        if (epsilon_inv < 3 || epsilon_inv % 2 == 0) throw ConfigError("hardy certify needs an odd epsilon_inv >= 3");
    }
    local.validate();
}

namespace {

struct CubeTotals {
    double mass = 0.0;
    double power = 0.0;
};

// One pass over the grid per level: mass and L^p mass of every cube met.
std::map<Cube, CubeTotals> level_totals(const GridFunction& rho, int n0, int level, double q) {
    std::map<Cube, CubeTotals> out;
    const double hd = rho.box.cell_volume();
    for (std::size_t c = 0; c < rho.size(); ++c) {
        const double v = std::max(rho.values[c].real(), 0.0);
        if (v == 0.0) continue;
        auto& t = out[cube_of_cell(rho.box, n0, level, c)];
        t.mass += v * hd;
        t.power += std::pow(v, q) * hd;
    }
    return out;
}

struct ShapeKey {
    std::vector<std::array<std::int64_t, 3>> offsets;
    std::optional<std::array<std::int64_t, 3>> origin;

    std::string str() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            if (i) os << ';';
            os << offsets[i][0] << ',' << offsets[i][1] << ',' << offsets[i][2];
        }
        if (origin) os << "|o=" << (*origin)[0] << ',' << (*origin)[1] << ',' << (*origin)[2];
        return os.str();
    }
};

ShapeKey shape_of(const Cluster& k, int d, const std::optional<Cube>& center) {
    std::array<std::int64_t, 3> lo{0, 0, 0};
    for (int a = 0; a < d; ++a) {
        lo[a] = k.cubes.front().index[a];
        for (const auto& q : k.cubes) lo[a] = std::min(lo[a], q.index[a]);
    }
    ShapeKey key;
    for (const auto& q : k.cubes) {
        std::array<std::int64_t, 3> o{0, 0, 0};
        for (int a = 0; a < d; ++a) o[a] = q.index[a] - lo[a];
        key.offsets.push_back(o);
        if (center && q == *center) key.origin = o;
    }
    std::sort(key.offsets.begin(), key.offsets.end());
    return key;
}

int cells_per_cube(int d) { return d == 1 ? 16 : (d == 2 ? 8 : 4); }

// LUP-II constant of a cluster shape built from unit cubes; with an origin
// cube the Hardy potential is centred in that cube.
double shape_constant(const ShapeKey& key, int d, double s, double delta, double gn, bool hardy,
                      const OptimizerParams& opt) {
    std::int64_t extent = 1;
    for (const auto& o : key.offsets)
        for (int a = 0; a < d; ++a) extent = std::max<std::int64_t>(extent, o[a] + 1);
    const int ppc = cells_per_cube(d);
    int points = 16;
    while (points < 2 * (extent + 1) * ppc) points *= 2;
    const double length = double(points) / ppc;
    const double pad = double(points - extent * ppc) / 2.0 / ppc;
    BoxSpec box;
    box.d = d;
    for (int a = 0; a < d; ++a) {
        double lo = -pad;
        if (key.origin) lo -= (*key.origin)[a] + 0.5;
        box.lo.push_back(lo);
        box.hi.push_back(lo + length);
        box.points.push_back(points);
    }
    box.validate();
    Point shift{0.0, 0.0, 0.0};
    if (key.origin)
        for (int a = 0; a < d; ++a) shift[a] = (*key.origin)[a] + 0.5;
    auto gap2 = [&](const Point& x) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& o : key.offsets) {
            double g2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double y = x[a] + shift[a];
                const double g = std::max({double(o[a]) - y, 0.0, y - double(o[a] + 1)});
                g2 += g * g;
            }
            best = std::min(best, g2);
        }
        return best;
    };
    const auto omega = DomainMask::from_predicate(box, [&](const Point& x) { return gap2(x) == 0.0; });
    const auto tilde = DomainMask::from_predicate(box, [&](const Point& x) { return gap2(x) < 1.0 / 16.0; });
    return estimate_local_constant(s, delta, omega, tilde, opt, gn, hardy && key.origin.has_value()).value;
}

std::optional<Cube> central_cube(const BoxSpec& box, int n0, int level, bool hardy) {
    if (!hardy) return std::nullopt;
    Cube c;
    c.level = level;
    const std::int64_t mid = (side_count(n0, level) - 1) / 2;
    for (int a = 0; a < box.d; ++a) c.index[a] = mid;
    return c;
}

void check_calibration(const Calibration& cal, const CertifyParams& p) {
    if (cal.d != p.d || std::abs(cal.s - p.s) > 1e-12)
        throw ConfigError("calibration is for a different (s,d)");
    cal.require("gn");
    cal.require("lup1");
    if (p.hardy) {
        cal.require("hgn");
        cal.require("lup1_hardy");
    }
}

void check_origin_centred(const BoxSpec& box) {
    for (int a = 0; a < box.d; ++a)
        if (std::abs(box.lo[a] + box.hi[a]) > 1e-9 * box.length(a))
            throw ConfigError("hardy certify needs a box centred at the origin");
}

}  // namespace

CertificateReport certify(const GridFunction& rho, const CertifyParams& params, const Calibration& cal) {
    params.validate();
    if (rho.box.d != params.d) throw ConfigError("density dimension does not match d");
    check_calibration(cal, params);
    if (params.hardy) check_origin_centred(rho.box);

    const double s = params.s;
    const int d = params.d;
    const double delta = params.delta;
    const int n0 = params.epsilon_inv;
    const double q = 1.0 + 2.0 * s / d;
    const double w1 = std::pow(delta, s / d);
    const double w2 = 1.0 - w1;

    CertificateReport r;
    r.params = params;
    r.calibration = cal;
    r.c_emp = params.hardy ? std::max(cal.require("lup1"), cal.require("lup1_hardy")) : cal.require("lup1");
    r.gn_constant = params.hardy ? cal.require("hgn") : cal.require("gn");
    const double c_plain = cal.require("lup1");
    const double c_hardy = params.hardy ? cal.require("lup1_hardy") : 0.0;
    const double c_sd = params.hardy ? hardy_constant(s, d).value : 0.0;
    r.branch_lup1 = lup1_branch(delta, s, d, r.c_emp);
    r.branch_lup2 = lup2_branch(delta, s, d, r.gn_constant);
    r.factor = certificate_factor(delta, s, d, r.c_emp, r.gn_constant);
    r.power_total = density_power_integral(rho, s);

    CoveringParams cp;
    cp.epsilon_inv = n0;
    cp.delta = delta;
    cp.max_level = params.max_level;
    cp.hardy_mode = params.hardy;
    const auto dec = decompose(rho, cp);
    r.levels = int(dec.levels.size());
    r.residual_cubes = int(dec.residual.size());

    const double kappa2 = r.gn_constant * (1.0 - delta) / std::pow(1.0 + delta, 2.0 * s / d);
    auto shape_value = [&](const ShapeKey& key) {
        const std::string name = key.str();
        auto it = r.shape_constants.find(name);
        if (it != r.shape_constants.end()) return it->second;
        const double v = shape_constant(key, d, s, delta, r.gn_constant, params.hardy, params.local);
        r.shape_constants.emplace(name, v);
        return v;
    };
    // The single-cube shape keeps lambda* defined when no light cluster occurs.
    {
        ShapeKey single;
        single.offsets.push_back({0, 0, 0});
        r.c_loc = shape_value(single);
    }

    const double side_root = dec.box.length(0);
    for (const auto& lv : dec.levels) {
        const double side = side_root / double(side_count(n0, lv.n));
        const double inv2s = std::pow(side, -2.0 * s);
        const auto center = central_cube(dec.box, n0, lv.n, params.hardy);
        const auto totals = level_totals(rho, n0, lv.n, q);
        auto totals_of = [&](const Cube& c) {
            auto it = totals.find(c);
            return it == totals.end() ? CubeTotals{} : it->second;
        };

        std::vector<DomainMask> closures;
        for (const auto& k : lv.light) closures.push_back(closure_mask(dec.box, n0, k.cubes));

        for (std::size_t i = 0; i < lv.g0.size(); ++i) {
            const Cube& c = lv.g0[i];
            const auto t = totals_of(c);
            LedgerEntry e;
            e.level = lv.n;
            e.cubes = {c};
            e.power = t.power;
            e.mass = t.mass;
            if (center && c == *center) {
                r.hardy_center_present = true;
                e.kind = "lup1_hardy_center";
                const double inner = side / (8.0 * std::sqrt(double(d)));
                const Point mid = cube_center(dec.box, n0, c);
                double m0 = 0.0;
                const auto qmask = cubes_mask(dec.box, n0, {c});
                DomainMask q0(dec.box);
                for (std::size_t cell = 0; cell < rho.size(); ++cell) {
                    if (!qmask.mask[cell]) continue;
                    const Point x = dec.box.position(cell);
                    bool in = true;
                    for (int a = 0; a < d; ++a) in = in && std::abs(x[a] - mid[a]) < inner;
                    if (in) {
                        q0.mask[cell] = 1;
                        m0 += std::max(rho.values[cell].real(), 0.0) * dec.box.cell_volume();
                    }
                }
                for (const auto& cl : closures)
                    if (!q0.disjoint(cl)) r.q0_disjoint = false;
                e.coefficient = w1 / (c_hardy * std::pow(delta, 2.0 * s / d));
                e.positive = e.coefficient * t.power;
                const double sd = std::sqrt(double(d));
                e.negative = w1 * inv2s *
                             (c_hardy * std::pow(4.0 * sd, 2.0 * s) * m0 +
                              c_sd * std::pow(8.0 * sd, 2.0 * s) * std::max(t.mass - m0, 0.0));
            } else {
                e.kind = "lup1";
                e.coefficient = w1 / (c_plain * std::pow(delta, 2.0 * s / d));
                e.positive = e.coefficient * t.power;
                e.negative = w1 * inv2s * (c_plain + c_sd * std::pow(2.0, 2.0 * s)) * t.mass;
            }
            e.value = e.positive - e.negative;
            r.ledger.push_back(std::move(e));
        }

        for (const auto& k : lv.light) {
            LedgerEntry e;
            e.kind = "lup2";
            e.level = lv.n;
            e.cubes = k.cubes;
            for (const auto& c : k.cubes) e.power += totals_of(c).power;
            e.mass = k.closure_mass;
            const auto key = shape_of(k, d, center);
            e.shape = key.str();
            e.local_constant = shape_value(key);
            r.c_loc = std::max(r.c_loc, e.local_constant);
            e.coefficient = w2 * kappa2;
            e.positive = e.coefficient * e.power;
            double neg = e.local_constant;
            if (params.hardy && !key.origin) neg += c_sd * std::pow(4.0, 2.0 * s);
            e.negative = w2 * neg * inv2s * e.mass;
            e.value = e.positive - e.negative;
            r.ledger.push_back(std::move(e));
        }
    }

    const auto fams = build_ball_families(dec, rho);
    for (const auto& sc : fams.scales) r.dropped_balls += sc.dropped;
    const auto excl = exclusion_terms(fams, s);

    r.exclusion_constant = exclusion_conversion_constant(delta, n0, s, d);
    r.lambda_threshold = lambda_threshold(delta, n0, s, d, r.c_emp, r.c_loc);
    r.lambda = params.lambda ? *params.lambda : r.lambda_threshold;
    r.valid = r.lambda >= r.lambda_threshold;

    for (const auto& t : excl.terms) {
        LedgerEntry e;
        e.kind = "exclusion";
        e.level = t.level;
        e.coefficient = r.lambda * t.weight;
        e.mass = t.mass_excess;
        e.value = r.lambda * t.contribution;
        e.positive = std::max(e.value, 0.0);
        e.negative = std::max(-e.value, 0.0);
        r.ledger.push_back(std::move(e));
    }

    bool has1 = false, has2 = false;
    for (const auto& e : r.ledger) {
        if (!std::isfinite(e.value) || !std::isfinite(e.positive) || !std::isfinite(e.negative))
            throw NumericError("certificate ledger entry is not finite");
        if (e.kind == "exclusion") {
            r.exclusion_credit += e.value;
            continue;
        }
        r.positive_total += e.positive;
        r.negative_total += e.negative;
        if (e.kind == "lup2") {
            has2 = true;
            r.covered_power += e.power;
        } else {
            has1 = true;
            r.covered_power += e.power;
        }
    }
    r.absorbed = r.exclusion_credit >= r.negative_total;
    r.covered_fraction = r.power_total > 0.0 ? r.covered_power / r.power_total : 0.0;
    if (has1 && has2) r.active_factor = std::min(r.branch_lup1, r.branch_lup2);
    else if (has1) r.active_factor = r.branch_lup1;
    else if (has2) r.active_factor = r.branch_lup2;
    else r.active_factor = r.factor;
    return r;
}

namespace {

template <class State>
CertificateReport certify_state(const State& state, const CertifyParams& params, const Calibration& cal) {
    auto r = certify(density(state), params, cal);
    QuotientParams qp;
    qp.s = params.s;
    qp.lambda = r.lambda;
    qp.hardy = params.hardy;
    r.measured = lt_quotient(state, qp);
    const double m = r.measured->value;
    r.sound = r.factor <= m + params.tolerance * std::max(1.0, std::abs(m));
    return r;
}

}  // namespace

CertificateReport certify(const NBodyState& state, const CertifyParams& params, const Calibration& cal) {
    return certify_state(state, params, cal);
}

CertificateReport certify(const ProductState& state, const CertifyParams& params, const Calibration& cal) {
    return certify_state(state, params, cal);
}

double recompute_factor(const CertificateReport& r) {
    return certificate_factor(r.params.delta, r.params.s, r.params.d, r.c_emp, r.gn_constant);
}

std::vector<DeltaSweepRow> sweep_delta(const GridFunction& rho, const std::vector<double>& deltas,
                                       const CertifyParams& params, const Calibration& cal) {
    std::vector<DeltaSweepRow> rows;
    for (double dl : deltas) {
        CertifyParams p = params;
        p.delta = dl;
        const auto r = certify(rho, p, cal);
        rows.push_back({dl, r.lambda_threshold, r.factor, r.c_loc});
    }
    return rows;
}

namespace {

nlohmann::json cube_json(const Cube& c, int d) {
    nlohmann::json idx = nlohmann::json::array();
    for (int a = 0; a < d; ++a) idx.push_back(c.index[a]);
    return idx;
}

}  // namespace

nlohmann::json to_json(const CertificateReport& r) {
    const int d = r.params.d;
    nlohmann::json j;
    j["schema"] = 1;
    j["params"] = {{"s", r.params.s},
                   {"d", d},
                   {"delta", r.params.delta},
                   {"epsilon_inv", r.params.epsilon_inv},
                   {"hardy", r.params.hardy},
                   {"max_level", r.params.max_level},
                   {"tolerance", r.params.tolerance},
                   {"lambda_requested", r.params.lambda ? nlohmann::json(*r.params.lambda) : nlohmann::json()}};
    j["calibration"] = to_json(r.calibration);
    j["constants"] = {{"c_emp", r.c_emp},
                      {"c_loc", r.c_loc},
                      {"gn_constant", r.gn_constant},
                      {"exclusion_constant", r.exclusion_constant},
                      {"shape_constants", r.shape_constants}};
    j["lambda"] = r.lambda;
    j["lambda_threshold"] = r.lambda_threshold;
    j["valid"] = r.valid;
    j["branches"] = {{"lup1", r.branch_lup1}, {"lup2", r.branch_lup2}};
    j["factor"] = r.factor;
    j["active_factor"] = r.active_factor;
    j["totals"] = {{"positive", r.positive_total},
                   {"negative", r.negative_total},
                   {"exclusion_credit", r.exclusion_credit},
                   {"absorbed", r.absorbed},
                   {"power", r.power_total},
                   {"covered_power", r.covered_power},
                   {"covered_fraction", r.covered_fraction}};
    j["covering"] = {{"levels", r.levels}, {"residual_cubes", r.residual_cubes}, {"dropped_balls", r.dropped_balls}};
    if (r.params.hardy) j["hardy"] = {{"center_present", r.hardy_center_present}, {"q0_disjoint", r.q0_disjoint}};
    nlohmann::json ledger = nlohmann::json::array();
    for (const auto& e : r.ledger) {
        nlohmann::json cubes = nlohmann::json::array();
        for (const auto& c : e.cubes) cubes.push_back(cube_json(c, d));
        nlohmann::json row = {{"kind", e.kind},     {"level", e.level},       {"coefficient", e.coefficient},
                              {"power", e.power},   {"mass", e.mass},         {"positive", e.positive},
                              {"negative", e.negative}, {"value", e.value}};
        if (!e.cubes.empty()) row["cubes"] = cubes;
        if (e.kind == "lup2") {
            row["local_constant"] = e.local_constant;
            row["shape"] = e.shape;
        }
        ledger.push_back(std::move(row));
    }
    j["ledger"] = std::move(ledger);
    if (r.measured) {
        j["measured"] = {{"quotient", r.measured->value},
                         {"kinetic", r.measured->kinetic},
                         {"hardy", r.measured->hardy},
                         {"interaction", r.measured->interaction},
                         {"denominator", r.measured->denominator}};
        j["sound"] = *r.sound;
    }
    return j;
}

}  // namespace ltlab
