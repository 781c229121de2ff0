#include "ltlab/calibration.hpp"

#include <cmath>
#include <fstream>

#include "ltlab/errors.hpp"
#include "ltlab/local_constants.hpp"

namespace ltlab {

double Calibration::require(const std::string& name) const {
    const std::optional<double>* v = nullptr;
    if (name == "gn") v = &gn;
    else if (name == "hgn") v = &hgn;
    else if (name == "lup1") v = &lup1;
    else if (name == "lup1_hardy") v = &lup1_hardy;
    else throw ConfigError("unknown calibration constant: " + name);
    if (!v->has_value()) throw ConfigError("missing calibration: " + name);
    return **v;
}

BoxSpec default_gn_box(int d, int points, double box_length) {
    static const int kPoints[] = {2048, 128, 32};
    static const double kLength[] = {40.0, 24.0, 16.0};
    if (d < 1 || d > 3) throw ConfigError("d must be 1, 2 or 3");
    return BoxSpec::centered(d, box_length > 0.0 ? box_length : kLength[d - 1],
                             points > 0 ? points : kPoints[d - 1]);
}

namespace {

nlohmann::json solver_provenance(const char* estimator, const BoxSpec& box, const OptimizerParams& p,
                                 const QuotientResult& r) {
    return {{"estimator", estimator},
            {"points", box.points[0]},
            {"box_length", box.length(0)},
            {"seed", p.seed},
            {"restarts", p.restarts},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"kind", "empirical upper estimate"}};
}

nlohmann::json lup1_provenance(const Lup1Result& r, const OptimizerParams& p) {
    return {{"estimator", "estimate_lup1_constant"},
            {"seed", p.seed},
            {"restarts", p.restarts},
            {"optimized", r.optimized},
            {"holdout_max", r.holdout_max},
            {"holdout_samples", r.holdout_samples},
            {"holdout_violations", r.holdout_violations},
            {"dictionary_size", r.dictionary_size},
            {"kind", "empirical lower estimate"}};
}

}  // namespace

Calibration calibrate(double s, int d, const CalibrationParams& params) {
    params.optimizer.validate();
    if (!(s > 0.0)) throw ConfigError("s must be positive");
    const BoxSpec box = default_gn_box(d, params.points, params.box_length);
    Calibration cal;
    cal.s = s;
    cal.d = d;

    const auto gn = minimize_gn(s, d, box, params.optimizer);
    if (!std::isfinite(gn.value)) throw NumericError("GN calibration produced a non-finite value");
    cal.gn = gn.value;
    cal.provenance["gn"] = solver_provenance("minimize_gn", box, params.optimizer, gn);

    const auto lup = estimate_lup1_constant(s, d, params.optimizer, false);
    cal.lup1 = lup.value;
    cal.provenance["lup1"] = lup1_provenance(lup, params.optimizer);

    if (params.hardy) {
        if (!(2.0 * s < d)) throw ConfigError("Hardy calibration needs 2s < d");
        const auto hgn = minimize_hgn(s, d, box, params.optimizer);
        cal.hgn = hgn.value;
        cal.provenance["hgn"] = solver_provenance("minimize_hgn", box, params.optimizer, hgn);
        const auto luph = estimate_lup1_constant(s, d, params.optimizer, true);
        cal.lup1_hardy = luph.value;
        cal.provenance["lup1_hardy"] = lup1_provenance(luph, params.optimizer);
    }
    return cal;
}

nlohmann::json to_json(const Calibration& cal) {
    nlohmann::json j;
    j["s"] = cal.s;
    j["d"] = cal.d;
    nlohmann::json c = nlohmann::json::object();
    if (cal.gn) c["gn"] = *cal.gn;
    if (cal.hgn) c["hgn"] = *cal.hgn;
    if (cal.lup1) c["lup1"] = *cal.lup1;
    if (cal.lup1_hardy) c["lup1_hardy"] = *cal.lup1_hardy;
    j["constants"] = c;
    j["provenance"] = cal.provenance;
    return j;
}

Calibration calibration_from_json(const nlohmann::json& j) {
    Calibration cal;
    try {
        cal.s = j.at("s").get<double>();
        cal.d = j.at("d").get<int>();
        const auto& c = j.at("constants");
        auto opt = [&](const char* k, std::optional<double>& dst) {
            if (c.contains(k)) {
                const double v = c.at(k).get<double>();
                if (!(v > 0.0) || !std::isfinite(v))
                    throw ConfigError(std::string("calibration constant ") + k + " must be positive");
                dst = v;
            }
        };
        opt("gn", cal.gn);
        opt("hgn", cal.hgn);
        opt("lup1", cal.lup1);
        opt("lup1_hardy", cal.lup1_hardy);
        if (j.contains("provenance")) cal.provenance = j.at("provenance");
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed calibration: ") + e.what());
    }
    return cal;
}

Calibration load_calibration(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open calibration file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed calibration file " + path.string() + ": " + e.what());
    }
    auto cal = calibration_from_json(j);
    cal.provenance["source"] = path.string();
    return cal;
}

void save_calibration(const std::filesystem::path& path, const Calibration& cal) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write calibration file: " + path.string());
    out << to_json(cal).dump(2) << '\n';
}

}  // namespace ltlab
