#include <algorithm>
#include <cmath>
#include <limits>

#include "ltlab/errors.hpp"
#include "ltlab/exclusion.hpp"

namespace ltlab {

double ball_radius(int d, double delta, int epsilon_inv, int level, double root_side) {
    return 2.0 * std::sqrt(static_cast<double>(d)) * (1.0 / delta + 2.0) * root_side /
           static_cast<double>(side_count(epsilon_inv, level));
}

BallFamilySet build_ball_families(const Decomposition& dec, const GridFunction& rho) {
    if (!(rho.box == dec.box)) throw ConfigError("exclusion: density box differs from the decomposition");
    const BoxSpec& box = dec.box;
    const double hd = box.cell_volume();
    const double delta = dec.params.delta;
    BallFamilySet out;
    for (const auto& lv : dec.levels) {
        if (lv.heavy.empty()) continue;
        BallScale sc;
        sc.level = lv.n;
        sc.radius = ball_radius(box.d, delta, dec.params.epsilon_inv, lv.n, box.length(0));
        std::vector<int> count(box.size(), 0);
        for (const auto& k : lv.heavy)
            for (const auto& q : k.cubes) {
                const Point c = cube_center(box, dec.params.epsilon_inv, q);
                const double r = 0.5 * sc.radius;
                DomainMask m = DomainMask::from_predicate(box, [&](const Point& x) {
                    double r2 = 0.0;
                    for (int a = 0; a < box.d; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
                    return r2 <= r * r;
                });
                double mass = 0.0;
                for (std::size_t i = 0; i < m.mask.size(); ++i)
                    if (m.mask[i]) mass += rho.values[i].real() * hd;
                if (mass < 1.0 + delta) {
                    ++sc.dropped;
                    continue;
                }
                for (std::size_t i = 0; i < m.mask.size(); ++i) count[i] += m.mask[i];
                sc.regions.push_back(std::move(m));
                sc.masses.push_back(mass);
                sc.centers.push_back(c);
            }
        sc.overlap = *std::max_element(count.begin(), count.end());
        out.scales.push_back(std::move(sc));
    }
    return out;
}

ExclusionBound exclusion_terms(const BallFamilySet& fams, double s) {
    if (!(s > 0.0)) throw ConfigError("exclusion: s must be positive");
    ExclusionBound out;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& sc : fams.scales) {
        if (!(sc.radius > 0.0) || !(sc.radius < prev)) throw ConfigError("exclusion: radii must be strictly decreasing");
        ExclusionTerm t;
        t.level = sc.level;
        const double inv_prev = std::isinf(prev) ? 0.0 : std::pow(prev, -2.0 * s);
        prev = sc.radius;
        if (sc.regions.empty()) {
            out.terms.push_back(t);
            continue;
        }
        if (sc.overlap < 1) throw ConfigError("exclusion: overlap count must be positive");
        t.weight = (std::pow(sc.radius, -2.0 * s) - inv_prev) / (2.0 * sc.overlap);
        for (double m : sc.masses) t.mass_excess += m * (m - 1.0);
        t.contribution = t.weight * t.mass_excess;
        out.value += t.contribution;
        out.terms.push_back(t);
    }
    return out;
}

double exclusion_lower_bound(const BallFamilySet& fams, double s) { return exclusion_terms(fams, s).value; }

double interaction_expectation(const NBodyState& state, double s, double lambda) {
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
    return lambda == 0.0 ? 0.0 : lambda * pair_interaction(state, s);
}

double interaction_expectation(const ProductState& state, double s, double lambda) {
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
    return lambda == 0.0 ? 0.0 : lambda * pair_interaction(state, s);
}

}  // namespace ltlab
