#pragma once

#include <map>
#include <string>
#include <vector>

#include "bruss/blowup.hpp"
#include "bruss/poincare.hpp"

namespace bruss {

struct PowerLawFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<double> residuals;  // log-space, per point
};

// least squares on (log eps, log value); values must be strictly positive
PowerLawFit fit_power_law(const std::vector<std::array<double, 2>>& table);
// largest slope change when any single point is removed
double fit_jackknife_spread(const std::vector<std::array<double, 2>>& table);

struct SweepPlan {
    Params base;
    std::vector<double> grid{0.02, 0.03, 0.05, 0.07, 0.1, 0.15};
    // rho_eps | dwell:<branch>:<clock> | s2_residual | s1_theta_offset |
    // fold_deviation
    std::string quantity = "rho_eps";
    IntegratorConfig config;
};

struct SweepRow {
    double epsilon = 0.0;
    double value = 0.0;
    std::string status = "ok";
};

std::vector<SweepRow> run_sweep(const SweepPlan& plan);

// per-epsilon pipeline products, computed once and reused by every quantity
struct CycleMeasurement {
    bool ok = false;
    std::string error;
    double rho_eps = 0.0;
    double closure_gap = 0.0;
    double min_r = 0.0;
    double fold_deviation = 0.0;
    int iterations = 0;
    std::map<std::string, std::map<std::string, double>> dwell;
};
const CycleMeasurement& cycle_measurement(const Params& p, const IntegratorConfig& cfg);

struct CheckResult {
    std::string name;
    std::string kind;  // slope | ratio | match
    double value = 0.0;
    double lo = 0.0, hi = 0.0;
    double r_squared = 1.0;
    bool pass = false;
    std::vector<SweepRow> table;
};

struct ScalingReport {
    std::vector<CheckResult> checks;
    bool pass = true;
};

// the eight Theta-claims as slope/ratio checks over the default grid
ScalingReport scaling_report(const Params& base, const IntegratorConfig& cfg);

} // namespace bruss
