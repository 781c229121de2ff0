#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace ltlab {

using cplx = std::complex<double>;
using Point = std::array<double, 3>;

// Uniform periodic tensor grid over an axis-aligned box. Samples sit at cell
// centres lo + (j + 1/2) h, so a box symmetric about the origin with an even
// number of points never places a sample at the origin.
struct BoxSpec {
    int d = 1;
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<int> points;

    static BoxSpec cube(int d, double lo, double hi, int points);
    static BoxSpec centered(int d, double length, int points);

    void validate() const;
    std::size_t size() const;
    double h() const { return (hi[0] - lo[0]) / points[0]; }
    double length(int axis) const { return hi[axis] - lo[axis]; }
    double cell_volume() const;
    double coord(int axis, int j) const { return lo[axis] + (j + 0.5) * (hi[axis] - lo[axis]) / points[axis]; }
    std::array<int, 3> unravel(std::size_t idx) const;
    std::size_t ravel(const std::array<int, 3>& ijk) const;
    Point position(std::size_t idx) const;
    BoxSpec dilated(double factor) const;

    bool operator==(const BoxSpec&) const = default;
};

struct GridFunction {
    BoxSpec box;
    std::vector<cplx> values;

    GridFunction() = default;
    explicit GridFunction(BoxSpec b);
    GridFunction(BoxSpec b, std::vector<cplx> v);

    static GridFunction sample(const BoxSpec& box, const std::function<cplx(const Point&)>& f);

    std::size_t size() const { return values.size(); }
    double norm2() const;
    double integral_abs_pow(double p) const;
    void normalize();
    bool finite() const;
};

struct DomainMask {
    BoxSpec box;
    std::vector<std::uint8_t> mask;

    DomainMask() = default;
    explicit DomainMask(BoxSpec b);
    static DomainMask from_predicate(const BoxSpec& box, const std::function<bool(const Point&)>& inside);
    static DomainMask full(const BoxSpec& box);

    std::size_t count() const;
    bool is_full() const;
    bool empty() const { return count() == 0; }
    DomainMask united(const DomainMask& other) const;
    bool disjoint(const DomainMask& other) const;
};

// s = m + sigma with integer m and sigma in [0,1).
struct SeminormSpec {
    double s = 1.0;
    int m = 1;
    double sigma = 0.0;
    double c_norm = 0.0;

    static SeminormSpec make(double s, int d);
};

// Owns a pair of in-place FFTW plans for one tensor shape.
class Fft {
public:
    explicit Fft(std::vector<int> dims);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    Fft(Fft&&) noexcept;
    Fft& operator=(Fft&&) noexcept;

    void forward(std::span<cplx> data) const;
    // Includes the 1/n normalisation.
    void backward(std::span<cplx> data) const;
    std::size_t size() const { return n_; }

private:
    struct Plans;
    std::unique_ptr<Plans> plans_;
    std::size_t n_ = 0;
};

std::vector<double> wavenumbers(int points, double length);
// |p|^2 for every Fourier index of the box, row-major.
std::vector<double> wavevector_sq(const BoxSpec& box);

// Copies u into the centre of a larger box with the same spacing; zero elsewhere.
GridFunction embed(const GridFunction& u, const BoxSpec& larger);

GridFunction frac_laplacian_apply(const GridFunction& u, double s);

struct EnergyValue {
    double value = 0.0;
    bool decay_ok = true;
};

bool boundary_decay_ok(const GridFunction& u, double rel = 1e-8);
EnergyValue seminorm_global(const GridFunction& u, double s);
// Spectral mixed derivative D^alpha u.
GridFunction derivative(const GridFunction& u, const std::array<int, 3>& alpha);

double seminorm_domain(const GridFunction& u, const SeminormSpec& spec, const DomainMask& omega);
double hardy_energy(const GridFunction& u, double s);
std::vector<double> hardy_potential(const BoxSpec& box, double s);
double ims_defect(const GridFunction& u, const GridFunction& chi, const SeminormSpec& spec,
                  const DomainMask& omega);

// Multi-indices with |alpha| = m in d dimensions, paired with m!/alpha!.
std::vector<std::pair<std::array<int, 3>, double>> multi_indices(int d, int m);

}  // namespace ltlab
