#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bruss/frames.hpp"

namespace bruss {

struct CurvePolyline {
    std::vector<std::array<double, 2>> points;
    FrameId frame = FrameId::Rescaled;
    std::string label = "custom";

    size_t size() const { return points.size(); }
    double arclength() const;
};

struct SingularCycle {
    CurvePolyline sigma1, sigma2, sigma3, sigma4;  // RESCALED frame
    std::array<double, 2> P0, P1, F, Q;
    double max_endpoint_gap() const;
};

// critical manifold S^2_0: r = phi0(theta), theta in [pi/4, pi/2]
double phi0(double theta, const Params& p);
// first-order slow manifold correction (eps convention), singular at arctan 2
double phi1(double theta, const Params& p);
// S^1_eps expansion theta(r) = pi/4 + eps^{3/2} r / sqrt(2)
double s1_expansion(double r, const Params& p);
// fast fiber r = rho sin(theta)
double fast_fiber(double rho, double theta);
// angles where the fiber rho meets S^2_0 (0, 1 or 2 solutions, sorted)
std::vector<double> fiber_manifold_intersections(double rho, const Params& p);
// reduced flow on S^2_0, d theta / d tau2
double reduced_flow_s2(double theta, const Params& p);

SingularCycle singular_cycle(const Params& p, int samples_per_branch = 512);

struct SigmaCurves {
    CurvePolyline s1, s2, s3, s4;              // XYFast frame
    CurvePolyline s1_bar, s2_bar, s3_bar, s4_bar;  // rescaled sqrt(eps)*sigma
};
// Theorem curves; sigma2/sigma4 truncated at y <= y_max (default 1/(sqrt2 rho_eps))
SigmaCurves sigma_curves(const Params& p, double rho_eps, int samples = 512,
                         double y_max = 0.0);

// Appendix-A expansion engine for theta' = f(theta,r), r' = g(theta,r)
// with invariant manifold r = phi(theta) = phi0 + e phi1 + e^2 phi2 + ...
struct FieldBundle {
    using Fn = std::function<double(double, double)>;
    Fn f0, g0, f1, g1, f2, g2;
    Fn f3, g3;  // optional, needed for the phi3 coefficient
    // optional exact partials; finite differences (h=1e-5) when absent
    Fn df0_dr, dg0_dr, d2f0_drr, d2g0_drr, df1_dr, dg1_dr;
};
struct ExpansionCoefficients {
    std::function<double(double)> phi1;
    std::function<double(double)> phi2;
    // valid only when f1 = g1 = 0 and phi1 = 0 (checked at evaluation)
    std::function<double(double)> phi3;
};
ExpansionCoefficients generic_slow_manifold_expansion(
    const FieldBundle& fields, std::function<double(double)> phi0_fn);

// Brusselator Rescaled-field bundle in the eps' = sqrt(eps) bookkeeping;
// phi2 of this bundle equals phi1 above, phi3 is the eps^{3/2} term.
FieldBundle brusselator_rescaled_bundle(const Params& p);
// Omega-system bundle with slow variable r and normal variable omega
FieldBundle omega_s1_bundle(const Params& p);

// symmetric Hausdorff distance by dense resampling + point-to-segment
// minimization; semidistance(A -> B) also exposed
double hausdorff_distance(const CurvePolyline& A, const CurvePolyline& B,
                          int resample = 4096);
double hausdorff_semidistance(const CurvePolyline& A, const CurvePolyline& B,
                              int resample = 4096);

CurvePolyline resample_polyline(const CurvePolyline& c, int n);

} // namespace bruss
