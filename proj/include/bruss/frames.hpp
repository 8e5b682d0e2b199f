#pragma once

#include <array>
#include <string>

#include "bruss/params.hpp"

namespace bruss {

// The ten coordinate frames. XY..OMEGA are planar, K1/K2/K3 are the
// three-dimensional blow-up charts.
enum class FrameId {
    XY,        // (X, Y), clock tau
    XYSlow,    // (x, y) = (Y, X+Y), clock tau
    XYFast,    // (x, y), clock t = tau/eps
    Polar,     // (theta, r), x = cos(theta)/r, clock t
    Compact,   // (theta, r), clock t1, dt1 = dt/r^2
    Rescaled,  // (theta, rbar), r = sqrt(eps) rbar, clock t2 = eps t1
    Omega,     // (omega, rbar), theta = pi/4 + omega, clock t2
    K1,        // (omega1, eta1, eps1), clock tau~1
    K2,        // (omega2, r2, eta2), clock tau~2
    K3,        // (eta3, r3, eps3), clock tau~3
};

enum class ClockId { Tau, T, T1, T2, Tau2, Chart1, Chart2, Chart3 };

int dimension(FrameId f);
ClockId clock_of(FrameId f);
const char* frame_name(FrameId f);
const char* clock_name(ClockId c);
bool parse_frame(const std::string& s, FrameId& out);

struct FrameState {
    FrameId frame = FrameId::Rescaled;
    std::array<double, 3> x{0.0, 0.0, 0.0};

    FrameState() = default;
    FrameState(FrameId f, double a, double b) : frame(f), x{a, b, 0.0} {}
    FrameState(FrameId f, double a, double b, double c) : frame(f), x{a, b, c} {}
    int dim() const { return dimension(frame); }
    double operator[](int i) const { return x[static_cast<size_t>(i)]; }
    double& operator[](int i) { return x[static_cast<size_t>(i)]; }
};

using Vec3 = std::array<double, 3>;

struct Mat3 {
    double m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    int n = 2;
    double trace() const {
        double s = 0;
        for (int i = 0; i < n; ++i) s += m[i][i];
        return s;
    }
};

// Taylor factor H(u) = sin(u)/u truncated after the u^4/5! term, as used in
// the blow-up charts. Valid for |u| < 0.1.
double taylor_h(double u);

// Right-hand side of the frame's ODE in the frame's own clock.
Vec3 eval_vector_field(const FrameState& s, const Params& p);

// Transforms between frames along the frame graph. Round trips are exact up
// to floating point.
FrameState transform_state(const FrameState& s, FrameId target, const Params& p);

// d(target)/d(source) at the state; composes multiplicatively along clock
// chains.
double clock_rate(const FrameState& s, ClockId source, ClockId target, const Params& p);

// Nonstandard-form factorization of the Rescaled field:
// (theta', r') = N f + eps G.
struct Factorization {
    Vec3 N;     // (-sin theta, -r cos theta)
    double f;   // (sin - cos) * p(theta, r)
    Vec3 G;
};
Factorization factorization_parts(const FrameState& s, const Params& p);

double pfunc(double theta, double r, const Params& p);

// Central finite-difference Jacobian of eval_vector_field,
// step 1e-6 * max(1, |coord|).
Mat3 jacobian(const FrameState& s, const Params& p);

// Eigenvalues of the 2x2 upper block (real pair or real parts of the
// complex pair).
std::array<double, 2> eigenvalues_2x2(const Mat3& J);

} // namespace bruss
