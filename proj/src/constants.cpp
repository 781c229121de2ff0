#include <cmath>
#include <numbers>

#include "ltlab/constants.hpp"
#include "ltlab/errors.hpp"

namespace ltlab {

double unit_ball_volume(int d) {
    if (d < 1) throw ConfigError("dimension must be at least 1");
    return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

ConstantValue semiclassical_constant(int d) {
    const double v = d / (d + 2.0) * 4.0 * std::numbers::pi * std::numbers::pi / std::pow(unit_ball_volume(d), 2.0 / d);
    return {"semiclassical_constant(d=" + std::to_string(d) + ")", v, "d/(d+2) 4pi^2 / |B1|^(2/d)"};
}

ConstantValue hardy_constant(double s, int d) {
    if (!(s > 0.0) || !(2.0 * s < d)) throw ConfigError("Hardy regime requires 2s < d");
    // lgamma keeps the ratio accurate when both arguments are large.
    const double lr = std::lgamma((d + 2.0 * s) / 4.0) - std::lgamma((d - 2.0 * s) / 4.0);
    const double v = std::pow(2.0, 2.0 * s) * std::exp(2.0 * lr);
    return {"hardy_constant", v, "2^(2s) (Gamma((d+2s)/4)/Gamma((d-2s)/4))^2"};
}

ConstantValue gn_reference_1d() {
    return {"gn_reference_1d", std::numbers::pi * std::numbers::pi / 4.0, "pi^2/4, quintic soliton"};
}

ConstantValue normalization_constant(double sigma, int d) {
    if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("normalization constant needs 0 < sigma < 1");
    const double v = std::pow(2.0, 2.0 * sigma - 1.0) * std::pow(std::numbers::pi, -0.5 * d) *
                     std::tgamma(0.5 * d + sigma) / std::abs(std::tgamma(-sigma));
    return {"c_norm", v, "2^(2sigma-1) pi^(-d/2) Gamma(d/2+sigma)/|Gamma(-sigma)|"};
}

std::vector<ConstantValue> all_constants() {
    std::vector<ConstantValue> out;
    for (int d = 1; d <= 3; ++d) out.push_back(semiclassical_constant(d));
    auto add_hardy = [&](double s, int d, const std::string& tag) {
        auto c = hardy_constant(s, d);
        c.name = "hardy_constant(" + tag + ")";
        out.push_back(c);
    };
    add_hardy(1.0, 3, "s=1,d=3");
    add_hardy(0.5, 3, "s=1/2,d=3");
    add_hardy(0.75, 2, "s=3/4,d=2");
    add_hardy(0.25, 1, "s=1/4,d=1");
    out.push_back(gn_reference_1d());
    auto c = normalization_constant(0.5, 1);
    c.name = "c_norm(sigma=1/2,d=1)";
    out.push_back(c);
    return out;
}

}  // namespace ltlab
