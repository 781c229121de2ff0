#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ltlab/covering.hpp"
#include "ltlab/errors.hpp"

namespace ltlab {

void CoveringParams::validate() const {
    if (epsilon_inv < 2) throw ConfigError("covering: epsilon_inv must be at least 2");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    if (max_level < 0) throw ConfigError("covering: max_level must be nonnegative");
    if (hardy_mode && (epsilon_inv % 2 == 0 || epsilon_inv < 3))
        throw ConfigError("covering: hardy mode needs an odd epsilon_inv >= 3");
}

std::int64_t side_count(int epsilon_inv, int level) {
    std::int64_t s = 1;
    for (int i = 0; i < level; ++i) s *= epsilon_inv;
    return s;
}

int max_resolvable_level(const BoxSpec& box, int epsilon_inv) {
    int n = 0;
    while (side_count(epsilon_inv, n + 1) <= box.points[0]) ++n;
    return n;
}

namespace {

void check_root_box(const BoxSpec& box) {
    box.validate();
    for (int a = 1; a < box.d; ++a)
        if (box.points[a] != box.points[0]) throw ConfigError("covering: root box must be a cube");
}

std::int64_t linear(const Cube& q, std::int64_t side, int d) {
    std::int64_t idx = 0;
    for (int a = 0; a < d; ++a) idx = idx * side + q.index[a];
    return idx;
}

// Squared gap in units of 1/(2 P S); a quarter side is P/2 in these units.
bool within_quarter(const std::array<int, 3>& cell, const Cube& q, std::int64_t side, std::int64_t P, int d) {
    std::int64_t acc = 0;
    for (int a = 0; a < d; ++a) {
        const std::int64_t c = (2 * static_cast<std::int64_t>(cell[a]) + 1) * side;
        const std::int64_t lo = 2 * P * q.index[a];
        const std::int64_t hi = 2 * P * (q.index[a] + 1);
        const std::int64_t gap = std::max<std::int64_t>({0, lo - c, c - hi});
        acc += gap * gap;
    }
    return 4 * acc < P * P;
}

std::vector<double> cell_masses(const GridFunction& rho) {
    const double hd = rho.box.cell_volume();
    double peak = 0.0;
    for (const auto& v : rho.values) peak = std::max(peak, std::abs(v.real()));
    std::vector<double> m(rho.values.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double r = rho.values[i].real();
        if (!std::isfinite(r) || r < -1e-12 * std::max(peak, 1.0)) throw ConfigError("density must be nonnegative");
        m[i] = std::max(r, 0.0) * hd;
    }
    return m;
}

std::vector<double> level_masses(const BoxSpec& box, int eps_inv, int level, const std::vector<double>& cells) {
    const std::int64_t side = side_count(eps_inv, level);
    std::int64_t total = 1;
    for (int a = 0; a < box.d; ++a) total *= side;
    std::vector<double> out(static_cast<std::size_t>(total), 0.0);
    for (std::size_t i = 0; i < cells.size(); ++i)
        out[static_cast<std::size_t>(linear(cube_of_cell(box, eps_inv, level, i), side, box.d))] += cells[i];
    return out;
}

double mask_mass(const DomainMask& m, const std::vector<double>& cells) {
    double acc = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (m.mask[i]) acc += cells[i];
    return acc;
}

std::vector<std::vector<std::size_t>> connected_groups(const std::vector<Cube>& cubes, int d) {
    std::vector<std::size_t> parent(cubes.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::map<std::array<std::int64_t, 3>, std::size_t> where;
    for (std::size_t i = 0; i < cubes.size(); ++i) where[cubes[i].index] = i;
    for (std::size_t i = 0; i < cubes.size(); ++i) {
        for (int off = 0; off < 27; ++off) {
            std::array<std::int64_t, 3> nb = cubes[i].index;
            int o = off;
            bool zero = true, skip = false;
            for (int a = 0; a < 3; ++a) {
                const int step = o % 3 - 1;
                o /= 3;
                if (step == 0) continue;
                if (a >= d) skip = true;
                nb[a] += step;
                zero = false;
            }
            if (zero || skip) continue;
            const auto it = where.find(nb);
            if (it == where.end()) continue;
            const std::size_t a = find(i), b = find(it->second);
            // The root keeps the smaller input position so labels follow index order.
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < cubes.size(); ++i) groups[find(i)].push_back(i);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    return out;
}

std::vector<Cube> terminal_cubes(const Decomposition& dec) {
    std::vector<Cube> out;
    for (const auto& lv : dec.levels) {
        out.insert(out.end(), lv.g0.begin(), lv.g0.end());
        for (const auto& k : lv.light) out.insert(out.end(), k.cubes.begin(), k.cubes.end());
    }
    out.insert(out.end(), dec.residual.begin(), dec.residual.end());
    return out;
}

}  // namespace

Cube cube_of_cell(const BoxSpec& box, int epsilon_inv, int level, std::size_t cell) {
    const std::int64_t side = side_count(epsilon_inv, level);
    const std::int64_t P = box.points[0];
    const auto ijk = box.unravel(cell);
    Cube q;
    q.level = level;
    for (int a = 0; a < box.d; ++a) q.index[a] = ((2 * static_cast<std::int64_t>(ijk[a]) + 1) * side) / (2 * P);
    return q;
}

Point cube_center(const BoxSpec& box, int epsilon_inv, const Cube& q) {
    const double side = static_cast<double>(side_count(epsilon_inv, q.level));
    Point c{0.0, 0.0, 0.0};
    for (int a = 0; a < box.d; ++a) c[a] = box.lo[a] + (static_cast<double>(q.index[a]) + 0.5) / side * box.length(a);
    return c;
}

double cube_side(const BoxSpec& box, int epsilon_inv, int level) {
    return box.length(0) / static_cast<double>(side_count(epsilon_inv, level));
}

DomainMask cubes_mask(const BoxSpec& box, int epsilon_inv, const std::vector<Cube>& cubes) {
    DomainMask m(box);
    if (cubes.empty()) return m;
    std::map<std::pair<int, std::array<std::int64_t, 3>>, bool> set;
    for (const auto& q : cubes) set[{q.level, q.index}] = true;
    std::vector<int> levels;
    for (const auto& q : cubes)
        if (std::find(levels.begin(), levels.end(), q.level) == levels.end()) levels.push_back(q.level);
    for (std::size_t i = 0; i < m.mask.size(); ++i)
        for (int lv : levels) {
            const Cube q = cube_of_cell(box, epsilon_inv, lv, i);
            if (set.count({lv, q.index})) {
                m.mask[i] = 1;
                break;
            }
        }
    return m;
}

DomainMask closure_mask(const BoxSpec& box, int epsilon_inv, const std::vector<Cube>& cubes) {
    DomainMask m(box);
    if (cubes.empty()) return m;
    const int d = box.d;
    const std::int64_t P = box.points[0];
    for (const auto& q : cubes) {
        const std::int64_t side = side_count(epsilon_inv, q.level);
        std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
        for (int a = 0; a < d; ++a) {
            // Cells within a quarter side of the cube, padded by one cell.
            const double c0 = (static_cast<double>(q.index[a]) - 0.25) / side * P - 1.0;
            const double c1 = (static_cast<double>(q.index[a]) + 1.25) / side * P + 1.0;
            lo[a] = std::max(0, static_cast<int>(std::floor(c0)));
            hi[a] = std::min(static_cast<int>(P) - 1, static_cast<int>(std::ceil(c1)));
        }
        std::array<int, 3> cell{0, 0, 0};
        for (cell[0] = lo[0]; cell[0] <= hi[0]; ++cell[0])
            for (cell[1] = lo[1]; cell[1] <= hi[1]; ++cell[1])
                for (cell[2] = lo[2]; cell[2] <= hi[2]; ++cell[2]) {
                    const std::size_t i = box.ravel(cell);
                    if (!m.mask[i] && within_quarter(cell, q, side, P, d)) m.mask[i] = 1;
                }
    }
    return m;
}

Decomposition decompose(const GridFunction& rho, const CoveringParams& params) {
    params.validate();
    const BoxSpec& box = rho.box;
    check_root_box(box);
    const int d = box.d;
    const int n0 = params.epsilon_inv;
    const auto cells = cell_masses(rho);
    Decomposition dec;
    dec.params = params;
    dec.box = box;
    dec.total_mass = std::accumulate(cells.begin(), cells.end(), 0.0);
    const int max_level = params.max_level > 0 ? params.max_level : max_resolvable_level(box, n0);
    dec.params.max_level = max_level;
    if (max_level < 1) throw ConfigError("resolution exhausted");

    std::vector<Cube> heavy{Cube{}};
    for (int n = 1; n <= max_level && !heavy.empty(); ++n) {
        const std::int64_t side = side_count(n0, n);
        if (side > box.points[0]) throw ConfigError("resolution exhausted");
        const auto masses = level_masses(box, n0, n, cells);
        CoveringLevel lv;
        lv.n = n;
        std::vector<Cube> above;
        std::vector<Cube> children;
        for (const auto& parent : heavy) {
            const std::int64_t per = n0;
            std::int64_t count = 1;
            for (int a = 0; a < d; ++a) count *= per;
            for (std::int64_t c = 0; c < count; ++c) {
                Cube child;
                child.level = n;
                std::int64_t rem = c;
                for (int a = d - 1; a >= 0; --a) {
                    child.index[a] = parent.index[a] * n0 + rem % per;
                    rem /= per;
                }
                children.push_back(child);
            }
        }
        std::sort(children.begin(), children.end());
        for (const auto& child : children) {
            const double m = masses[static_cast<std::size_t>(linear(child, side, d))];
            if (m <= params.delta) {
                lv.g0.push_back(child);
                lv.g0_mass.push_back(m);
            } else {
                above.push_back(child);
            }
        }
        std::vector<Cube> next;
        for (const auto& group : connected_groups(above, d)) {
            Cluster k;
            k.level = n;
            for (std::size_t i : group) k.cubes.push_back(above[i]);
            std::sort(k.cubes.begin(), k.cubes.end());
            for (const auto& q : k.cubes) {
                const double m = masses[static_cast<std::size_t>(linear(q, side, d))];
                k.cube_masses.push_back(m);
                k.support_mass += m;
            }
            k.closure_mass = mask_mass(closure_mask(box, n0, k.cubes), cells);
            if (k.closure_mass < 1.0 + params.delta) {
                k.kind = ClusterKind::Light;
                lv.light.push_back(std::move(k));
            } else {
                k.kind = ClusterKind::Heavy;
                next.insert(next.end(), k.cubes.begin(), k.cubes.end());
                lv.heavy.push_back(std::move(k));
            }
        }
        auto by_first = [](const Cluster& a, const Cluster& b) { return a.cubes.front() < b.cubes.front(); };
        std::sort(lv.light.begin(), lv.light.end(), by_first);
        std::sort(lv.heavy.begin(), lv.heavy.end(), by_first);
        std::sort(next.begin(), next.end());
        dec.levels.push_back(std::move(lv));
        heavy = std::move(next);
        if (n == max_level) dec.residual = heavy;
    }
    return dec;
}

bool VerifyReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

VerifyReport verify(const Decomposition& dec, const GridFunction& rho) {
    VerifyReport rep;
    const BoxSpec& box = dec.box;
    const int d = box.d;
    const int n0 = dec.params.epsilon_inv;
    const double delta = dec.params.delta;
    const auto cells = cell_masses(rho);
    std::map<int, std::vector<double>> masses;
    auto mass_of = [&](const Cube& q) {
        auto it = masses.find(q.level);
        if (it == masses.end()) it = masses.emplace(q.level, level_masses(box, n0, q.level, cells)).first;
        return it->second[static_cast<std::size_t>(linear(q, side_count(n0, q.level), d))];
    };

    {
        CheckResult c{"tiling", true, ""};
        const auto terms = terminal_cubes(dec);
        int finest = 0;
        for (const auto& q : terms) finest = std::max(finest, q.level);
        bool bad_level = false;
        for (const auto& q : terms)
            if (q.level < 1 || side_count(n0, q.level) > box.points[0]) bad_level = true;
        if (terms.empty() || bad_level) {
            c.pass = false;
            c.detail = terms.empty() ? "no terminal cubes" : "cube level out of range";
        } else {
            const std::int64_t fs = side_count(n0, finest);
            std::int64_t total = 1;
            for (int a = 0; a < d; ++a) total *= fs;
            std::vector<int> cover(static_cast<std::size_t>(total), 0);
            for (const auto& q : terms) {
                const std::int64_t scale = side_count(n0, finest - q.level);
                std::int64_t block = 1;
                for (int a = 0; a < d; ++a) block *= scale;
                for (std::int64_t b = 0; b < block; ++b) {
                    Cube fine;
                    fine.level = finest;
                    std::int64_t rem = b;
                    for (int a = d - 1; a >= 0; --a) {
                        fine.index[a] = q.index[a] * scale + rem % scale;
                        rem /= scale;
                    }
                    bool inside = true;
                    for (int a = 0; a < d; ++a)
                        if (q.index[a] < 0 || q.index[a] >= side_count(n0, q.level)) inside = false;
                    if (!inside) continue;
                    ++cover[static_cast<std::size_t>(linear(fine, fs, d))];
                }
            }
            std::size_t holes = 0, overlaps = 0;
            for (int v : cover) {
                if (v == 0) ++holes;
                if (v > 1) ++overlaps;
            }
            c.pass = holes == 0 && overlaps == 0;
            c.detail = std::to_string(holes) + " uncovered, " + std::to_string(overlaps) + " overlapping";
        }
        rep.checks.push_back(c);
    }
    {
        CheckResult c{"g0_mass", true, ""};
        std::size_t bad = 0;
        for (const auto& lv : dec.levels)
            for (const auto& q : lv.g0)
                if (mass_of(q) > delta) ++bad;
        c.pass = bad == 0;
        c.detail = std::to_string(bad) + " G0 cubes above delta";
        rep.checks.push_back(c);
    }
    {
        CheckResult c{"cluster_mass", true, ""};
        std::size_t bad = 0;
        for (const auto& lv : dec.levels) {
            auto check = [&](const Cluster& k, bool light) {
                for (const auto& q : k.cubes)
                    if (!(mass_of(q) > delta)) ++bad;
                const double closure = mask_mass(closure_mask(box, n0, k.cubes), cells);
                if (light != (closure < 1.0 + delta)) ++bad;
            };
            for (const auto& k : lv.light) check(k, true);
            for (const auto& k : lv.heavy) check(k, false);
        }
        c.pass = bad == 0;
        c.detail = std::to_string(bad) + " mass violations";
        rep.checks.push_back(c);
    }
    {
        CheckResult c{"cluster_size", true, ""};
        const auto cap = static_cast<std::size_t>(std::floor(1.0 / delta)) + 1;
        std::size_t bad = 0;
        for (const auto& lv : dec.levels)
            for (const auto& k : lv.light)
                if (k.cubes.size() > cap) ++bad;
        c.pass = bad == 0;
        c.detail = std::to_string(bad) + " light clusters above " + std::to_string(cap) + " cubes";
        rep.checks.push_back(c);
    }
    {
        CheckResult c{"connectivity", true, ""};
        std::size_t bad = 0;
        for (const auto& lv : dec.levels) {
            auto check = [&](const Cluster& k) {
                if (k.cubes.empty() || connected_groups(k.cubes, d).size() != 1) ++bad;
            };
            for (const auto& k : lv.light) check(k);
            for (const auto& k : lv.heavy) check(k);
        }
        c.pass = bad == 0;
        c.detail = std::to_string(bad) + " disconnected clusters";
        rep.checks.push_back(c);
    }
    {
        CheckResult c{"closure_disjoint", true, ""};
        std::size_t bad = 0;
        for (const auto& lv : dec.levels) {
            std::vector<std::uint8_t> used(box.size(), 0);
            auto mark = [&](const Cluster& k) {
                const auto m = closure_mask(box, n0, k.cubes);
                for (std::size_t i = 0; i < used.size(); ++i) {
                    if (!m.mask[i]) continue;
                    if (used[i]) {
                        ++bad;
                        return;
                    }
                }
                for (std::size_t i = 0; i < used.size(); ++i)
                    if (m.mask[i]) used[i] = 1;
            };
            for (const auto& k : lv.light) mark(k);
            for (const auto& k : lv.heavy) mark(k);
        }
        c.pass = bad == 0;
        c.detail = std::to_string(bad) + " overlapping closures";
        rep.checks.push_back(c);
    }
    if (dec.params.hardy_mode) {
        CheckResult c{"hardy_origin", true, ""};
        c.pass = hardy_origin_check(dec);
        c.detail = c.pass ? "origin central or distant for every cube" : "a cube has the origin off-centre nearby";
        rep.checks.push_back(c);
    }
    return rep;
}

bool hardy_origin_check(const Decomposition& dec) {
    if (!dec.params.hardy_mode) throw ConfigError("hardy origin check needs hardy mode");
    const BoxSpec& box = dec.box;
    for (int a = 0; a < box.d; ++a)
        if (std::abs(box.lo[a] + box.hi[a]) > 1e-12 * box.length(a))
            throw ConfigError("hardy mode needs a root box centred at the origin");
    const int n0 = dec.params.epsilon_inv;
    for (const auto& q : terminal_cubes(dec)) {
        const std::int64_t side = side_count(n0, q.level);
        bool central = true;
        std::int64_t acc = 0;
        for (int a = 0; a < box.d; ++a) {
            if (2 * q.index[a] + 1 != side) central = false;
            const std::int64_t gap = std::max<std::int64_t>({0, 2 * q.index[a] - side, side - 2 * q.index[a] - 2});
            acc += gap * gap;
        }
        if (!central && acc < 1) return false;
    }
    return true;
}

}  // namespace ltlab
