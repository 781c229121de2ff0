#pragma once

#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ltlab/gn_solver.hpp"
#include "ltlab/grid.hpp"

namespace ltlab {

// Real trial functions spanning the bounding box of a region dilated by 1.5:
// the constant, Gaussian bumps of widths 2a, 4a, 8a on lattices of matching
// spacing, and a few windowed low Fourier modes.
struct TrialDictionary {
    std::vector<GridFunction> basis;
    double a = 0.0;
};

TrialDictionary build_trial_dictionary(const BoxSpec& box, const DomainMask& region, double a);

// Gap between omega and the complement of omega_tilde, measured between cell
// edges; zero when a cell of omega touches a cell outside omega_tilde.
double grid_margin(const DomainMask& omega, const DomainMask& omega_tilde);

struct Bounds {
    Point lo{0.0, 0.0, 0.0};
    Point hi{0.0, 0.0, 0.0};
};
Bounds mask_bounds(const DomainMask& m);

// Smooth random real function: a few random Gaussians plus, half of the
// time, a windowed random low-frequency field, all inside `region` dilated by 1.5.
GridFunction random_smooth_function(const BoxSpec& box, const Bounds& region, std::mt19937_64& rng);

struct AscentResult {
    double value = 0.0;
    Eigen::VectorXd c;
    int iterations = 0;
};

// Maximises a degree-zero homogeneous objective of real coefficients by
// normalised gradient ascent in the metric G.
AscentResult ascend(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& eval,
                    const Eigen::MatrixXd& G, Eigen::VectorXd c, const OptimizerParams& params);

struct LocalConstantResult {
    double value = 0.0;
    double supremum = 0.0;
    double margin = 0.0;
    int dictionary_size = 0;
    bool hardy = false;
    std::vector<double> start_values;
};

// Empirical C_{delta,Omega,Omega~}: supremum over the trial span of
// [kappa P_Omega / M^{2s/d} - |u|^2_{H^s(Omega~)}] / M with kappa = gn_constant (1-delta),
// M the mass on Omega~ and P the L^p mass on Omega. With hardy set the
// Hardy term on Omega is subtracted from the seminorm.
LocalConstantResult estimate_local_constant(double s, double delta, const DomainMask& omega,
                                            const DomainMask& omega_tilde, const OptimizerParams& params,
                                            double gn_constant, bool hardy = false);

struct Lup1Result {
    double value = 0.0;
    double optimized = 0.0;
    double holdout_max = 0.0;
    int holdout_samples = 0;
    int holdout_violations = 0;
    int dictionary_size = 0;
    bool hardy = false;
};

// Smallest C with |u|^2_{H^s(Q)} (- hardy term) >= (1/C) P_Q/M_Q^{2s/d} - C M_Q/|Q|^{2s/d}
// for one trial function u.
double lup1_required_constant(double seminorm, double power, double mass, double volume, double s, int d);

struct Lup1Setup {
    BoxSpec box;
    DomainMask cube;
    double volume = 1.0;
};
// Unit-side cube centred at the origin inside a box four times larger.
Lup1Setup lup1_setup(int d, double side = 1.0, int points = 0);

double lup1_ratio(const GridFunction& u, const Lup1Setup& setup, double s, bool hardy);

Lup1Result estimate_lup1_constant(double s, int d, const OptimizerParams& params, bool hardy = false,
                                  double side = 1.0, int holdout = 500);

}  // namespace ltlab
