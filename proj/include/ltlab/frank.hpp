#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ltlab/grid.hpp"

namespace ltlab {

struct InequalityCheck {
    bool holds = false;
    double margin = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

// Random real superposition of one to three Gaussians with widths in
// [2h, L/10] and centres within L/6 of the box centre.
GridFunction random_gaussian_mixture(const BoxSpec& box, std::mt19937_64& rng);

struct FrankCalibration {
    double value = 0.0;
    // Largest eigenvalue of l^{s-t}(-Delta)^t - (-Delta)^s + C_{s,d}|x|^{-2s}
    // divided by l^s, per entry of `ells`.
    std::vector<double> ells;
    std::vector<double> per_ell;
    int lanczos_steps = 0;
    bool converged = true;
};

// Empirical C_{d,s,t}: the worst violation over every function on the grid,
// found as the top of the spectrum by Lanczos iteration.
FrankCalibration calibrate_frank(double s, double t, const BoxSpec& box, const std::vector<double>& ells,
                                 int lanczos_steps = 400, std::uint64_t seed = 1);

// <u,((-Delta)^s - C_{s,d}|x|^{-2s})u> >= l^{s-t}<u,(-Delta)^t u> - C l^s ||u||^2.
InequalityCheck check_frank_improvement(double s, double t, double ell, const GridFunction& u, double frank_constant,
                                        double tol = 1e-9);

// Double integral of |u(x)|^2 |u(y)|^2 |x-y|^{-2s} through a zero-padded convolution.
double pair_energy(const GridFunction& u, double s);

// <u,(H)u>^{1-2s/d} W^{2s/d} / int |u|^{2(1+2s/d)}; the Hardy numerator is clamped at zero.
double interp_ratio(const GridFunction& u, double s);

struct InterpCalibration {
    double value = 0.0;
    int pool = 0;
    int evaluations = 0;
};

// Smallest ratio over a random Gaussian-mixture pool, refined by compass search
// over the mixture parameters of the best draws.
InterpCalibration calibrate_interp(double s, const BoxSpec& box, int pool = 200, std::uint64_t seed = 1);

InequalityCheck interp_inequality_check(const GridFunction& u, double s, int d, double constant, double tol = 1e-9);

}  // namespace ltlab
