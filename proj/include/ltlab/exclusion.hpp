#pragma once

#include <vector>

#include "ltlab/covering.hpp"
#include "ltlab/grid.hpp"
#include "ltlab/nbody.hpp"

namespace ltlab {

struct BallScale {
    int level = 0;
    double radius = 0.0;
    int overlap = 0;
    std::vector<DomainMask> regions;
    std::vector<double> masses;
    std::vector<Point> centers;
    // Balls whose rasterised mass fell below 1 + delta and were left out.
    int dropped = 0;
};

struct BallFamilySet {
    std::vector<BallScale> scales;
};

// R_n = 2 sqrt(d) (1/delta + 2) epsilon^n times the root box side.
double ball_radius(int d, double delta, int epsilon_inv, int level, double root_side);

// One ball B(c_Q, R_n/2) per heavy-cluster cube; cells join by centre distance.
BallFamilySet build_ball_families(const Decomposition& dec, const GridFunction& rho);

struct ExclusionTerm {
    int level = 0;
    double weight = 0.0;
    double mass_excess = 0.0;
    double contribution = 0.0;
};

struct ExclusionBound {
    double value = 0.0;
    std::vector<ExclusionTerm> terms;
};

ExclusionBound exclusion_terms(const BallFamilySet& fams, double s);
double exclusion_lower_bound(const BallFamilySet& fams, double s);

double interaction_expectation(const NBodyState& state, double s, double lambda);
double interaction_expectation(const ProductState& state, double s, double lambda);

}  // namespace ltlab
