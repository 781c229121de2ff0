#pragma once

#include <random>
#include <vector>

#include "ltlab/grid.hpp"

namespace ltlab {

// Full N-body wave function on the N-fold tensor grid of a one-body box.
// Layout: particle-major, index = ((i_1 n + i_2) n + i_3) with i_k the
// one-body cell of particle k.
struct NBodyState {
    int N = 2;
    BoxSpec box;
    std::vector<cplx> values;

    NBodyState() = default;
    NBodyState(int n, BoxSpec b, std::vector<cplx> v);

    void validate() const;
    double norm2() const;
    void normalize();
};

// Product state u_1(x_1) ... u_N(x_N) kept in factored form; energies are
// exact sums of one-body terms, so large grids stay affordable.
struct ProductState {
    int N = 2;
    BoxSpec box;
    std::vector<GridFunction> factors;
    // Largest pairwise overlap int |u_i||u_j| of the normalised factors.
    double overlap = 0.0;
    bool overlap_warning = false;

    ProductState() = default;
    explicit ProductState(std::vector<GridFunction> fs);
};

struct QuotientParams {
    double s = 1.0;
    double lambda = 0.0;
    bool hardy = false;

    void validate(int d) const;
};

GridFunction density(const NBodyState& state);
GridFunction density(const ProductState& state);

double kinetic_expectation(const NBodyState& state, double s);
double kinetic_expectation(const ProductState& state, double s);
// Kinetic energy minus C_{s,d} sum_i <|x_i|^{-2s}>.
double hardy_expectation(const NBodyState& state, double s);
double hardy_expectation(const ProductState& state, double s);

// sum_{i<j} <|x_i - x_j|^{-2s}> with the half-cell kernel floor.
double pair_interaction(const NBodyState& state, double s);
double pair_interaction(const ProductState& state, double s);

double density_power_integral(const GridFunction& rho, double s);

struct LtQuotient {
    double value = 0.0;
    double kinetic = 0.0;
    double hardy = 0.0;
    double interaction = 0.0;
    double denominator = 0.0;
};

LtQuotient lt_quotient(const NBodyState& state, const QuotientParams& params);
LtQuotient lt_quotient(const ProductState& state, const QuotientParams& params);

NBodyState to_tensor(const ProductState& state);

// Spectral translation u(x - shift) on the periodic grid.
GridFunction translate(const GridFunction& u, const Point& shift);
// l^{d/2} u(l (x - shift)), evaluated by trigonometric interpolation; zero where
// l (x - shift) leaves the box.
GridFunction dilate_translate(const GridFunction& u, double ell, const Point& shift);
// Root-mean-square radius of |u|^2 about its centre of mass.
double rms_width(const GridFunction& u);

ProductState trial_separated(const std::vector<GridFunction>& us, const std::vector<Point>& centers, const BoxSpec& box);
ProductState trial_hardy_pair(const GridFunction& u, const GridFunction& v, const Point& z, double ell);

// Normalised superposition of one to three products of random Gaussians.
NBodyState random_state(int N, const BoxSpec& box, std::mt19937_64& rng);

}  // namespace ltlab
