#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ltlab/grid.hpp"

namespace ltlab {

struct OptimizerParams {
    int max_iters = 4000;
    double step_size = 0.2;
    double tol_rel = 1e-10;
    int restarts = 4;
    std::uint64_t seed = 1;
    int patience = 12;

    void validate() const;
};

struct QuotientResult {
    double value = 0.0;
    GridFunction minimizer;
    int iterations = 0;
    bool converged = false;
    bool decay_ok = true;
    std::vector<double> restart_values;
    std::vector<int> restart_iterations;
    // Quotient per iteration of the winning restart.
    std::vector<double> trace;
};

// J(u) = (<u,(-Delta)^s u> - c_h <u,|x|^{-2s} u>) * M^{2s/d} / int |u|^p with
// p = 2(1+2s/d) and M = ||u||^2. c_h = 0 gives the GN quotient.
class QuotientFunctional {
public:
    QuotientFunctional(const BoxSpec& box, double s, bool hardy);

    struct Parts {
        double kinetic = 0.0;
        double hardy = 0.0;
        double mass = 0.0;
        double power = 0.0;
        double numerator = 0.0;
        double value = 0.0;
    };

    Parts parts(const GridFunction& u) const;
    double value(const GridFunction& u) const { return parts(u).value; }
    // Returns J(u) and writes the L2 gradient into grad.
    Parts gradient(const GridFunction& u, GridFunction& grad) const;
    // L2 gradient of the kinetic energy, 2 (-Delta)^s u.
    void kinetic_gradient(const GridFunction& u, GridFunction& grad) const;
    // Sobolev preconditioner 1/(1 + |k|^{2s}/mu) applied in place.
    void precondition(GridFunction& g, double mu) const;

    const BoxSpec& box() const { return box_; }
    double s() const { return s_; }
    bool hardy() const { return hardy_c_ > 0.0; }

private:
    BoxSpec box_;
    double s_;
    double p_;
    double q_;
    double hardy_c_ = 0.0;
    std::vector<double> symbol_;
    std::vector<double> potential_;
    Fft fft_;
};

double gn_quotient(const GridFunction& u, double s);
// Hardy-GN quotient; the numerator is not clamped here.
double hgn_quotient(const GridFunction& u, double s);

// Normalised preconditioned gradient descent from u0.
QuotientResult descend(const QuotientFunctional& f, GridFunction u0, const OptimizerParams& params);

// Gaussian bump with random width and centre, as used for restarts.
GridFunction random_bump(const BoxSpec& box, std::mt19937_64& rng, double center_spread);

QuotientResult minimize_gn(double s, int d, const BoxSpec& box, const OptimizerParams& params);
// Report value uses a numerator clamped at zero.
QuotientResult minimize_hgn(double s, int d, const BoxSpec& box, const OptimizerParams& params);

}  // namespace ltlab
