#include "bruss/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bruss {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kQuarterPi = kPi / 4.0;
constexpr double kHalfPi = kPi / 2.0;
constexpr double kFoldGuard = 1e-6;
} // namespace

double CurvePolyline::arclength() const {
    double L = 0.0;
    for (size_t i = 1; i < points.size(); ++i)
        L += std::hypot(points[i][0] - points[i - 1][0], points[i][1] - points[i - 1][1]);
    return L;
}

double SingularCycle::max_endpoint_gap() const {
    auto gap = [](const CurvePolyline& a, const CurvePolyline& b) {
        const auto& p = a.points.back();
        const auto& q = b.points.front();
        return std::hypot(p[0] - q[0], p[1] - q[1]);
    };
    return std::max(std::max(gap(sigma1, sigma2), gap(sigma2, sigma3)),
                    std::max(gap(sigma3, sigma4), gap(sigma4, sigma1)));
}

double phi0(double theta, const Params& p) {
    if (theta < kQuarterPi - 1e-12 || theta > kHalfPi + 1e-12)
        throw DomainError("phi0: theta outside [pi/4, pi/2]");
    theta = std::clamp(theta, kQuarterPi, kHalfPi);
    const double c = std::cos(theta), s = std::sin(theta);
    return std::sqrt(std::max(0.0, c * (s - c) / p.a));
}

double phi1(double theta, const Params& p) {
    if (theta <= kQuarterPi - 1e-12 || theta > kHalfPi + 1e-12)
        throw DomainError("phi1: theta outside (pi/4, pi/2]");
    const double den = 2.0 * std::cos(theta) - std::sin(theta);
    if (std::abs(theta - p.theta_star()) < kFoldGuard || den == 0.0)
        throw DomainError("phi1: singular at theta = arctan 2");
    return -phi0(theta, p) * std::cos(theta) / (2.0 * p.a * den);
}

double s1_expansion(double r, const Params& p) {
    return kQuarterPi + std::pow(p.epsilon, 1.5) * r / std::sqrt(2.0);
}

double fast_fiber(double rho, double theta) {
    if (theta < kQuarterPi - 1e-12 || theta > kHalfPi + 1e-12)
        throw DomainError("fast_fiber: theta outside [pi/4, pi/2]");
    return rho * std::sin(theta);
}

std::vector<double> fiber_manifold_intersections(double rho, const Params& p) {
    if (rho <= 0.0) throw DomainError("fiber_manifold_intersections: rho must be positive");
    const double q = p.a * rho * rho;
    const double disc = 1.0 - 4.0 * q;
    if (std::abs(disc) < 1e-12) return {std::atan(1.0 / (2.0 * q))};
    if (disc < 0.0) return {};
    const double rt = std::sqrt(disc);
    std::vector<double> out{std::atan((1.0 - rt) / (2.0 * q)),
                            std::atan((1.0 + rt) / (2.0 * q))};
    std::sort(out.begin(), out.end());
    return out;
}

double reduced_flow_s2(double theta, const Params& p) {
    if (theta <= kQuarterPi || theta >= kHalfPi)
        throw DomainError("reduced_flow_s2: theta outside (pi/4, pi/2)");
    const double den = 2.0 * std::cos(theta) - std::sin(theta);
    if (std::abs(theta - p.theta_star()) < kFoldGuard)
        throw DomainError("reduced_flow_s2: singular at theta = arctan 2");
    const double f0 = phi0(theta, p);
    const double s = std::sin(theta), c = std::cos(theta);
    return 2.0 * f0 * f0 * c * (s - c) * (s - c) / den;
}

SingularCycle singular_cycle(const Params& p, int samples_per_branch) {
    if (samples_per_branch < 2)
        throw DomainError("singular_cycle: samples_per_branch must be >= 2");
    SingularCycle sc;
    const double ts = p.theta_star();
    const double rq = p.q_radius();
    sc.P0 = {kQuarterPi, 0.0};
    sc.P1 = {kHalfPi, 0.0};
    sc.F = {ts, p.r_star()};
    sc.Q = {kQuarterPi, rq};

    auto line = [&](CurvePolyline& c, const char* label, auto fn) {
        c.frame = FrameId::Rescaled;
        c.label = label;
        c.points.resize(static_cast<size_t>(samples_per_branch));
        for (int i = 0; i < samples_per_branch; ++i) {
            const double u = static_cast<double>(i) / (samples_per_branch - 1);
            c.points[static_cast<size_t>(i)] = fn(u);
        }
    };
    line(sc.sigma1, "sigma1_hat", [&](double u) -> std::array<double, 2> {
        return {kQuarterPi + u * (kHalfPi - kQuarterPi), 0.0};
    });
    line(sc.sigma2, "sigma2_hat", [&](double u) -> std::array<double, 2> {
        const double th = kHalfPi + u * (ts - kHalfPi);
        return {th, phi0(th, p)};
    });
    line(sc.sigma3, "sigma3_hat", [&](double u) -> std::array<double, 2> {
        const double th = ts + u * (kQuarterPi - ts);
        return {th, fast_fiber(p.rho_star(), th)};
    });
    line(sc.sigma4, "sigma4_hat", [&](double u) -> std::array<double, 2> {
        return {kQuarterPi, rq * (1.0 - u)};
    });
    return sc;
}

SigmaCurves sigma_curves(const Params& p, double rho_eps, int samples, double y_max) {
    if (rho_eps <= 0.0) throw DomainError("sigma_curves: rho_eps must be positive");
    if (p.epsilon <= 0.0) throw DomainError("sigma_curves: epsilon must be positive");
    const double se = p.sqrt_eps();
    const double a = p.a;
    const double ts = p.theta_star();
    if (y_max <= 0.0) y_max = 1.0 / (std::sqrt(2.0) * rho_eps);

    SigmaCurves out;
    auto fill = [&](CurvePolyline& c, CurvePolyline& cbar, const char* label,
                    double u0, double u1, bool truncate, auto fn) {
        c.frame = FrameId::XYFast;
        c.label = label;
        cbar.frame = FrameId::XYFast;
        cbar.label = std::string(label) + "_bar";
        for (int i = 0; i < samples; ++i) {
            const double u = u0 + (u1 - u0) * static_cast<double>(i) / (samples - 1);
            std::array<double, 2> bar = fn(u);  // rescaled coords (sqrt(eps) x, sqrt(eps) y)
            if (truncate && bar[1] > y_max * (1.0 + 1e-12)) continue;
            cbar.points.push_back(bar);
            c.points.push_back({bar[0] / se, bar[1] / se});
        }
    };

    // sqrt(eps)*sigma_i are epsilon-free closed forms; sigma2's y diverges
    // at pi/2 so it is truncated at y_max
    fill(out.s1, out.s1_bar, "sigma1", kQuarterPi, kHalfPi, false,
         [&](double th) -> std::array<double, 2> {
             return {std::cos(th) / (rho_eps * std::sin(th)), 1.0 / rho_eps};
         });
    fill(out.s2, out.s2_bar, "sigma2", ts, kHalfPi, true,
         [&](double th) -> std::array<double, 2> {
             const double s = std::sin(th), c = std::cos(th);
             const double d = std::max(s - c, 1e-300);
             const double cx = std::max(c, 1e-300);
             return {std::sqrt(a * cx / d), std::sqrt(a * s * s / (cx * d))};
         });
    fill(out.s3, out.s3_bar, "sigma3", kQuarterPi, ts, false,
         [&](double th) -> std::array<double, 2> {
             return {2.0 * std::sqrt(a) / std::tan(th), 2.0 * std::sqrt(a)};
         });
    fill(out.s4, out.s4_bar, "sigma4", rho_eps, p.q_radius(), true,
         [&](double r) -> std::array<double, 2> {
             const double v = 1.0 / (std::sqrt(2.0) * r);
             return {v, v};
         });
    return out;
}

namespace {

double fd1(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

FieldBundle::Fn partial_r(const FieldBundle::Fn& f) {
    return [f](double th, double r) { return (f(th, r + 1e-5) - f(th, r - 1e-5)) / 2e-5; };
}
FieldBundle::Fn partial_rr(const FieldBundle::Fn& f) {
    return [f](double th, double r) {
        return (f(th, r + 1e-5) - 2.0 * f(th, r) + f(th, r - 1e-5)) / 1e-10;
    };
}

} // namespace

ExpansionCoefficients generic_slow_manifold_expansion(
    const FieldBundle& fields, std::function<double(double)> phi0_fn) {
    FieldBundle b = fields;
    if (!b.df0_dr) b.df0_dr = partial_r(b.f0);
    if (!b.dg0_dr) b.dg0_dr = partial_r(b.g0);
    if (!b.d2f0_drr) b.d2f0_drr = partial_rr(b.f0);
    if (!b.d2g0_drr) b.d2g0_drr = partial_rr(b.g0);
    if (!b.df1_dr) b.df1_dr = partial_r(b.f1);
    if (!b.dg1_dr) b.dg1_dr = partial_r(b.g1);

    auto denom = [b, phi0_fn](double th) {
        const double r0 = phi0_fn(th);
        const double d = b.dg0_dr(th, r0) - fd1(phi0_fn, th) * b.df0_dr(th, r0);
        if (d == 0.0 || !std::isfinite(d))
            throw DomainError("slow-manifold expansion: denominator vanishes (fold locus)");
        return d;
    };

    ExpansionCoefficients out;
    auto phi1_fn = [b, phi0_fn, denom](double th) {
        const double r0 = phi0_fn(th);
        return (fd1(phi0_fn, th) * b.f1(th, r0) - b.g1(th, r0)) / denom(th);
    };
    out.phi1 = phi1_fn;
    out.phi2 = [b, phi0_fn, denom, phi1_fn](double th) {
        const double r0 = phi0_fn(th);
        const double p0d = fd1(phi0_fn, th);
        const double p1 = phi1_fn(th);
        const double p1d = fd1(phi1_fn, th);
        const double num = 0.5 * p1 * p1 * (p0d * b.d2f0_drr(th, r0) - b.d2g0_drr(th, r0)) +
                           p1 * (p0d * b.df1_dr(th, r0) + p1d * b.df0_dr(th, r0) -
                                 b.dg1_dr(th, r0)) +
                           b.f1(th, r0) * p1d + b.f2(th, r0) * p0d - b.g2(th, r0);
        return num / denom(th);
    };
    out.phi3 = [b, phi0_fn, denom, phi1_fn](double th) {
        if (!b.f3 || !b.g3)
            throw DomainError("phi3 requires f3/g3 in the field bundle");
        const double r0 = phi0_fn(th);
        if (std::abs(b.f1(th, r0)) > 1e-14 || std::abs(b.g1(th, r0)) > 1e-14 ||
            std::abs(phi1_fn(th)) > 1e-10)
            throw DomainError("phi3 formula valid only when f1 = g1 = 0 and phi1 = 0");
        return (fd1(phi0_fn, th) * b.f3(th, r0) - b.g3(th, r0)) / denom(th);
    };
    return out;
}

FieldBundle brusselator_rescaled_bundle(const Params& p) {
    const double a = p.a;
    FieldBundle b;
    b.f0 = [a, p](double th, double r) {
        return -std::sin(th) * (std::sin(th) - std::cos(th)) * pfunc(th, r, p);
    };
    b.g0 = [a, p](double th, double r) {
        return -r * std::cos(th) * (std::sin(th) - std::cos(th)) * pfunc(th, r, p);
    };
    b.f1 = [](double, double) { return 0.0; };
    b.g1 = [](double, double) { return 0.0; };
    b.f2 = [](double th, double r) {
        return -r * r * std::cos(th) * (std::sin(th) - std::cos(th));
    };
    b.g2 = [](double th, double r) {
        return r * r * r * std::sin(th) * (std::sin(th) - std::cos(th));
    };
    b.f3 = [a](double th, double r) { return a * r * r * r * std::cos(th); };
    b.g3 = [a](double th, double r) { return -a * r * r * r * r * std::sin(th); };
    return b;
}

FieldBundle omega_s1_bundle(const Params& p) {
    // slow variable r, normal variable omega; the bundle's (theta, r)
    // arguments are (r, omega) in that order
    const double a = p.a;
    auto S = [](double w) { return std::sin(w); };
    auto C = [](double w) { return std::cos(w); };
    FieldBundle b;
    b.f0 = [a, S, C](double r, double w) {
        return -a * r * r * r * S(w) * (C(w) - S(w)) + r * S(w) * S(w) * (C(w) - S(w)) * (C(w) - S(w));
    };
    b.g0 = [a, S, C](double r, double w) {
        return -a * r * r * S(w) * (S(w) + C(w)) + S(w) * S(w) * (S(w) + C(w)) * (C(w) - S(w));
    };
    b.f1 = [](double, double) { return 0.0; };
    b.g1 = [](double, double) { return 0.0; };
    b.f2 = [S, C](double r, double w) { return r * r * r * S(w) * (S(w) + C(w)); };
    b.g2 = [S, C](double r, double w) { return -r * r * S(w) * (C(w) - S(w)); };
    b.f3 = [a, S, C](double r, double w) {
        return -a / std::sqrt(2.0) * r * r * r * r * (S(w) + C(w));
    };
    b.g3 = [a, S, C](double r, double w) {
        return a / std::sqrt(2.0) * r * r * r * (C(w) - S(w));
    };
    return b;
}

CurvePolyline resample_polyline(const CurvePolyline& c, int n) {
    CurvePolyline out;
    out.frame = c.frame;
    out.label = c.label;
    if (c.points.empty()) return out;
    if (c.points.size() == 1 || n < 2) {
        out.points = c.points;
        return out;
    }
    std::vector<double> cum(c.points.size(), 0.0);
    for (size_t i = 1; i < c.points.size(); ++i)
        cum[i] = cum[i - 1] + std::hypot(c.points[i][0] - c.points[i - 1][0],
                                         c.points[i][1] - c.points[i - 1][1]);
    const double L = cum.back();
    out.points.reserve(static_cast<size_t>(n));
    size_t k = 0;
    for (int i = 0; i < n; ++i) {
        const double s = L * static_cast<double>(i) / (n - 1);
        while (k + 1 < cum.size() && cum[k + 1] < s) ++k;
        if (k + 1 >= cum.size()) {
            out.points.push_back(c.points.back());
            continue;
        }
        const double seg = cum[k + 1] - cum[k];
        const double w = seg > 0.0 ? (s - cum[k]) / seg : 0.0;
        out.points.push_back({c.points[k][0] + w * (c.points[k + 1][0] - c.points[k][0]),
                              c.points[k][1] + w * (c.points[k + 1][1] - c.points[k][1])});
    }
    return out;
}

namespace {

double point_segment_dist(const std::array<double, 2>& p, const std::array<double, 2>& a,
                          const std::array<double, 2>& b) {
    const double vx = b[0] - a[0], vy = b[1] - a[1];
    const double wx = p[0] - a[0], wy = p[1] - a[1];
    const double vv = vx * vx + vy * vy;
    double t = vv > 0.0 ? (wx * vx + wy * vy) / vv : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p[0] - (a[0] + t * vx), p[1] - (a[1] + t * vy));
}

double one_sided(const CurvePolyline& A, const CurvePolyline& B) {
    double worst = 0.0;
    for (const auto& p : A.points) {
        double best = std::numeric_limits<double>::infinity();
        for (size_t j = 1; j < B.points.size(); ++j) {
            best = std::min(best, point_segment_dist(p, B.points[j - 1], B.points[j]));
            if (best == 0.0) break;
        }
        if (B.points.size() == 1)
            best = std::hypot(p[0] - B.points[0][0], p[1] - B.points[0][1]);
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace

double hausdorff_semidistance(const CurvePolyline& A, const CurvePolyline& B, int resample) {
    if (A.points.empty() || B.points.empty())
        throw DomainError("hausdorff: empty polyline");
    if (A.frame != B.frame) throw DomainError("hausdorff: frame mismatch");
    return one_sided(resample_polyline(A, resample), resample_polyline(B, resample));
}

double hausdorff_distance(const CurvePolyline& A, const CurvePolyline& B, int resample) {
    return std::max(hausdorff_semidistance(A, B, resample),
                    hausdorff_semidistance(B, A, resample));
}

} // namespace bruss
