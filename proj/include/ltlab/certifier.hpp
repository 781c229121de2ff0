#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltlab/calibration.hpp"
#include "ltlab/covering.hpp"
#include "ltlab/exclusion.hpp"
#include "ltlab/gn_solver.hpp"
#include "ltlab/grid.hpp"
#include "ltlab/nbody.hpp"

namespace ltlab {

// min{1/(C delta^{s/d}), gn (1-delta)(1-delta^{s/d})/(1+delta)^{2s/d}}.
double certificate_factor(double delta, double s, int d, double c_emp, double gn_constant);
double lup1_branch(double delta, double s, int d, double c_emp);
double lup2_branch(double delta, double s, int d, double gn_constant);

// Converts the exclusion bound into a per-cube credit: lambda E is at least
// (lambda / C_excl) sum over heavy-parent children of m_Q / side^{2s}.
double exclusion_conversion_constant(double delta, int epsilon_inv, double s, int d);

// lambda* = C_excl max(C delta^{s/d}, C_loc).
double lambda_threshold(double delta, int epsilon_inv, double s, int d, double c_emp, double c_loc);

struct CertifyParams {
    double s = 1.0;
    int d = 1;
    double delta = 0.1;
    int epsilon_inv = 2;
    // Unset means lambda = lambda*.
    std::optional<double> lambda;
    bool hardy = false;
    int max_level = 0;
    // Optimiser for the LUP-II constants of the cluster shapes met.
    OptimizerParams local;
    double tolerance = 1e-6;

    void validate() const;
};

struct LedgerEntry {
    // "lup1", "lup1_hardy_center", "lup2" or "exclusion".
    std::string kind;
    int level = 0;
    std::vector<Cube> cubes;
    // Channel weight times the branch coefficient that multiplies `power`.
    double coefficient = 0.0;
    double power = 0.0;
    double mass = 0.0;
    double positive = 0.0;
    double negative = 0.0;
    double value = 0.0;
    // Empirical LUP-II constant of the cluster shape at unit cube side.
    double local_constant = 0.0;
    std::string shape;
};

struct CertificateReport {
    CertifyParams params;
    Calibration calibration;
    double lambda = 0.0;
    double lambda_threshold = 0.0;
    double exclusion_constant = 0.0;
    double c_emp = 0.0;
    double c_loc = 0.0;
    double gn_constant = 0.0;
    double branch_lup1 = 0.0;
    double branch_lup2 = 0.0;
    double factor = 0.0;
    // Minimum over the branches that actually carry ledger entries.
    double active_factor = 0.0;
    bool valid = false;

    std::vector<LedgerEntry> ledger;
    std::map<std::string, double> shape_constants;
    double positive_total = 0.0;
    double negative_total = 0.0;
    double exclusion_credit = 0.0;
    bool absorbed = false;
    double power_total = 0.0;
    double covered_power = 0.0;
    double covered_fraction = 0.0;
    int levels = 0;
    int residual_cubes = 0;
    int dropped_balls = 0;

    bool hardy_center_present = false;
    bool q0_disjoint = true;

    std::optional<LtQuotient> measured;
    std::optional<bool> sound;
};

CertificateReport certify(const GridFunction& rho, const CertifyParams& params, const Calibration& cal);
CertificateReport certify(const NBodyState& state, const CertifyParams& params, const Calibration& cal);
CertificateReport certify(const ProductState& state, const CertifyParams& params, const Calibration& cal);

// Recomputes the factor from the constants recorded in the report.
double recompute_factor(const CertificateReport& report);

struct DeltaSweepRow {
    double delta = 0.0;
    double lambda_threshold = 0.0;
    double factor = 0.0;
    double c_loc = 0.0;
};

// Certifies rho at each delta; lambda follows lambda*(delta) when unset.
std::vector<DeltaSweepRow> sweep_delta(const GridFunction& rho, const std::vector<double>& deltas,
                                       const CertifyParams& params, const Calibration& cal);

nlohmann::json to_json(const CertificateReport& report);

}  // namespace ltlab
