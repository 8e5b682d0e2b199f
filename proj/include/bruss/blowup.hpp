#pragma once

#include <functional>
#include <vector>

#include "bruss/flow.hpp"

namespace bruss {

struct ChartPoint {
    FrameId chart = FrameId::K1;
    Vec3 coords{0.0, 0.0, 0.0};
};

// blow-down image: the omega-plane point plus the blow-up small parameter
// eps' = eta * eps_chart (eps' = sqrt(epsilon) for states consistent with
// the model parameters)
struct BlowDownResult {
    double omega = 0.0;
    double rbar = 0.0;
    double eps_blowup = 0.0;
    double epsilon() const { return eps_blowup * eps_blowup; }
};
BlowDownResult blow_down(const ChartPoint& pt);
ChartPoint chart_lift(const BlowDownResult& b, FrameId chart);

// curve N of equilibria in K1 {eta1=0}: eps1(omega1), omega1 in [0, a]
double k1_equilibrium_curve(double omega1, const Params& p);
// its fold (omega1*, eps1*) = (a/2, (a/(2 sqrt2))^{1/3})
std::array<double, 2> k1_fold(const Params& p);
// inverse branch omega1^-(eps1)
double k1_branch_minus(double eps1, const Params& p);

// K2 layer equilibria omega2+-(r2); empty below the fold radius 2 sqrt2/a
std::vector<double> k2_equilibrium_branches(double r2, const Params& p);
std::array<double, 2> k2_fold(const Params& p);  // (omega2*, r2*)

// K2 layer functions and the fold nondegeneracy data evaluated directly
struct K2FoldData {
    double f = 0, f_ww = 0, f_r = 0, g = 0;
};
K2FoldData k2_fold_data(const Params& p);

// the two K3 equilibrium curves; the {eta3=0} curve is solved for eps3 by
// bisection, the {eps3=0} curve is explicit
struct K3Curves {
    std::function<double(double)> eps3_of_r3;  // {eta3=0}, needs r3 > 1/sqrt(a)
    std::function<double(double)> r3_of_eta3;  // {eps3=0}
    std::array<double, 3> E;                   // (0, 1/sqrt(a), 0)
};
K3Curves k3_equilibrium_curves(const Params& p);

struct K1MonotoneReport {
    bool monotone = true;
    double product_drift = 0.0;  // relative drift of eta1*eps1
    Trajectory trajectory;
};
K1MonotoneReport verify_k1_monotone_eta(const FrameState& start, const Params& p,
                                        const IntegratorConfig& cfg, double duration);

struct AppendixBConstants {
    double delta = 0, k0 = 0, gamma_out = 0, beta_out = 0;
    double C = 0, D = 0, F = 0, K = 0, C_tilde = 0, D_tilde = 0;
    double d1 = 0, d2 = 0, c1 = 0, c2 = 0;
};
AppendixBConstants appendix_b_constants(double delta, double k0, double gamma_out,
                                        double beta_out, const Params& p);

struct ExitBoundReport {
    Vec3 start{0, 0, 0};
    double T_plus = 0, lower = 0, upper = 0;
    bool in_bounds = false;
    bool sandwich_ok = false;
    double exit_r3 = 0;
};
// integrates the K3 field in chart time until eta3 = delta; checks the
// hitting-time bracket and the exponential sandwich on r3
ExitBoundReport verify_exit_bounds(const ChartPoint& initial,
                                   const AppendixBConstants& k, const Params& p,
                                   const IntegratorConfig& cfg);

struct ExitScalingPoint {
    double eta30 = 0;
    double exit_r3 = 0;
};
std::vector<ExitScalingPoint> exit_image_scaling(const std::vector<double>& eta30_grid,
                                                 double r30, double eps30,
                                                 const AppendixBConstants& k,
                                                 const Params& p,
                                                 const IntegratorConfig& cfg);

} // namespace bruss
