#pragma once

#include <string>
#include <vector>

namespace ltlab {

struct ConstantValue {
    std::string name;
    double value = 0.0;
    std::string provenance;
};

double unit_ball_volume(int d);

ConstantValue semiclassical_constant(int d);
// Sharp fractional Hardy constant; requires 0 < 2s < d.
ConstantValue hardy_constant(double s, int d);
ConstantValue gn_reference_1d();
ConstantValue normalization_constant(double sigma, int d);

// GN exponent p = 2(1 + 2s/d).
inline double gn_exponent(double s, int d) { return 2.0 * (1.0 + 2.0 * s / d); }

std::vector<ConstantValue> all_constants();

}  // namespace ltlab
