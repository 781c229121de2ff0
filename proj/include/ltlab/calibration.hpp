#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "ltlab/gn_solver.hpp"
#include "ltlab/grid.hpp"

namespace ltlab {

// Empirical constants for one (s, d) pair. Every value carries a provenance
// string naming the estimator, grid and seed that produced it.
struct Calibration {
    double s = 1.0;
    int d = 1;
    std::optional<double> gn;
    std::optional<double> hgn;
    std::optional<double> lup1;
    std::optional<double> lup1_hardy;
    nlohmann::json provenance = nlohmann::json::object();

    // Throws ConfigError("missing calibration: <name>") when absent.
    double require(const std::string& name) const;
};

struct CalibrationParams {
    OptimizerParams optimizer;
    // Estimate the Hardy constants as well; needs 2s < d.
    bool hardy = false;
    // Zero selects default_gn_box(d).
    int points = 0;
    double box_length = 0.0;
};

// Grids on which the GN quotient is resolved well enough for the solver.
BoxSpec default_gn_box(int d, int points = 0, double box_length = 0.0);

Calibration calibrate(double s, int d, const CalibrationParams& params);

nlohmann::json to_json(const Calibration& cal);
Calibration calibration_from_json(const nlohmann::json& j);
Calibration load_calibration(const std::filesystem::path& path);
void save_calibration(const std::filesystem::path& path, const Calibration& cal);

}  // namespace ltlab
