#pragma once

#include <Eigen/Dense>

#include "ltlab/grid.hpp"

namespace ltlab {

// Precomputed evaluator for the domain seminorm on a fixed (box, s, mask).
// For sigma > 0 the excluded-diagonal midpoint double sum is evaluated through
// zero-padded FFT convolutions, which reproduces the direct pair sum exactly up
// to rounding. A mask covering the whole box is treated as the periodic cell
// and uses the periodised kernel.
class DomainSeminorm {
public:
    DomainSeminorm(const BoxSpec& box, const SeminormSpec& spec, const DomainMask& omega);
    ~DomainSeminorm();
    DomainSeminorm(DomainSeminorm&&) noexcept;
    DomainSeminorm& operator=(DomainSeminorm&&) noexcept;

    double value(const GridFunction& u) const;
    // Gram matrix A with value(sum c_i b_i) = c^T A c for real coefficients.
    Eigen::MatrixXd gram(std::span<const GridFunction> basis) const;

    const SeminormSpec& spec() const { return spec_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    SeminormSpec spec_;
};

// Pair kernel |r|^{-2s} with the half-cell floor |r| >= h/2. Shared by the
// N-body interaction and the exclusion machinery.
double pair_kernel(double r, double h, double s);

// sum_x sum_y ra(x) rb(y) pair_kernel(|x-y|) h^{2d} over cell centres, without
// periodic wrap-around (zero-padded FFT convolution).
double pair_density_energy(const BoxSpec& box, const std::vector<double>& ra, const std::vector<double>& rb, double s);

}  // namespace ltlab
