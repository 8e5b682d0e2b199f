#include "bruss/blowup.hpp"

#include <algorithm>
#include <cmath>

namespace bruss {

BlowDownResult blow_down(const ChartPoint& pt) {
    BlowDownResult b;
    const double x0 = pt.coords[0], x1 = pt.coords[1], x2 = pt.coords[2];
    switch (pt.chart) {
        case FrameId::K1:
            b.omega = std::pow(x1, 6) * x0;
            b.rbar = x1 * x1 * x1;
            b.eps_blowup = x1 * x2;
            break;
        case FrameId::K2:
            b.omega = std::pow(x2, 6) * x0;
            b.rbar = x2 * x2 * x2 * x1;
            b.eps_blowup = x2;
            break;
        case FrameId::K3:
            b.omega = std::pow(x0, 6);
            b.rbar = x0 * x0 * x0 * x1;
            b.eps_blowup = x0 * x2;
            break;
        default:
            throw DomainError("blow_down: not a chart point");
    }
    return b;
}

ChartPoint chart_lift(const BlowDownResult& b, FrameId chart) {
    ChartPoint pt;
    pt.chart = chart;
    switch (chart) {
        case FrameId::K1: {
            if (b.rbar <= 0.0) throw SingularTransform("chart_lift K1: rbar must be > 0");
            const double eta = std::cbrt(b.rbar);
            pt.coords = {b.omega / (b.rbar * b.rbar), eta, b.eps_blowup / eta};
            break;
        }
        case FrameId::K2: {
            if (b.eps_blowup <= 0.0)
                throw SingularTransform("chart_lift K2: eps' must be > 0");
            const double e3 = b.eps_blowup * b.eps_blowup * b.eps_blowup;
            pt.coords = {b.omega / (e3 * e3), b.rbar / e3, b.eps_blowup};
            break;
        }
        case FrameId::K3: {
            if (b.omega <= 0.0) throw SingularTransform("chart_lift K3: omega must be > 0");
            const double eta = std::pow(b.omega, 1.0 / 6.0);
            pt.coords = {eta, b.rbar / std::sqrt(b.omega), b.eps_blowup / eta};
            break;
        }
        default:
            throw DomainError("chart_lift: not a chart frame");
    }
    return pt;
}

double k1_equilibrium_curve(double omega1, const Params& p) {
    if (omega1 < 0.0 || omega1 > p.a)
        throw DomainError("k1_equilibrium_curve: omega1 outside [0, a]");
    return std::cbrt(std::sqrt(2.0) * omega1 * (p.a - omega1) / p.a);
}

std::array<double, 2> k1_fold(const Params& p) {
    return {p.a / 2.0, std::cbrt(p.a / (2.0 * std::sqrt(2.0)))};
}

double k1_branch_minus(double eps1, const Params& p) {
    const double disc = p.a * p.a - 2.0 * std::sqrt(2.0) * p.a * eps1 * eps1 * eps1;
    if (disc < 0.0)
        throw DomainError("k1_branch_minus: eps1 beyond the fold");
    return (p.a - std::sqrt(disc)) / 2.0;
}

std::vector<double> k2_equilibrium_branches(double r2, const Params& p) {
    if (r2 <= 0.0) throw DomainError("k2_equilibrium_branches: r2 must be positive");
    const double a = p.a;
    const double disc = a * a * std::pow(r2, 4) - std::pow(2.0, 1.5) * a * r2 * r2 * r2;
    if (disc < -1e-12 * std::max(1.0, a * a * std::pow(r2, 4)))
        throw DomainError("k2_equilibrium_branches: no real branch below r2 = 2 sqrt2/a");
    const double rt = std::sqrt(std::max(disc, 0.0));
    return {(a * r2 * r2 - rt) / 2.0, (a * r2 * r2 + rt) / 2.0};
}

std::array<double, 2> k2_fold(const Params& p) {
    return {4.0 / p.a, 2.0 * std::sqrt(2.0) / p.a};
}

K2FoldData k2_fold_data(const Params& p) {
    const double a = p.a;
    auto f = [a](double w, double r) {
        return -a * r * r * w + w * w + a / std::sqrt(2.0) * r * r * r;
    };
    auto g = [a](double w, double r) {
        return r * (-a * r * r * w + w * w - a / std::sqrt(2.0) * r * r * r);
    };
    const auto fold = k2_fold(p);
    const double w = fold[0], r = fold[1], h = 1e-5;
    K2FoldData d;
    d.f = f(w, r);
    d.f_ww = (f(w + h, r) - 2.0 * f(w, r) + f(w - h, r)) / (h * h);
    d.f_r = (f(w, r + h) - f(w, r - h)) / (2.0 * h);
    d.g = g(w, r);
    return d;
}

K3Curves k3_equilibrium_curves(const Params& p) {
    const double a = p.a;
    K3Curves k;
    k.E = {0.0, 1.0 / std::sqrt(a), 0.0};
    k.eps3_of_r3 = [a](double r3) {
        // a r3^2 - 1 - (a/sqrt2) e^3 r3^3 = 0, bracketed bisection
        if (r3 <= 0.0) throw DomainError("k3 curve: r3 must be positive");
        const double target = a * r3 * r3 - 1.0;
        if (target < 0.0)
            throw DomainError("k3 curve: no root with eps3 > 0 for r3 <= 1/sqrt(a)");
        if (target == 0.0) return 0.0;
        auto h = [&](double e) {
            return a * r3 * r3 - 1.0 - a / std::sqrt(2.0) * e * e * e * r3 * r3 * r3;
        };
        double lo = 0.0;
        double hi = std::cbrt(std::sqrt(2.0) * target / (a * r3 * r3 * r3)) + 1.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (h(mid) > 0.0)
                lo = mid;
            else
                hi = mid;
            if (hi - lo < 1e-12) break;
        }
        return 0.5 * (lo + hi);
    };
    k.r3_of_eta3 = [a](double eta3) {
        const double u = std::pow(eta3, 6);
        const double v = (std::cos(u) - std::sin(u)) * taylor_h(u) / a;
        if (v < 0.0) throw DomainError("k3 curve: outside chart domain");
        return std::sqrt(v);
    };
    return k;
}

K1MonotoneReport verify_k1_monotone_eta(const FrameState& start, const Params& p,
                                        const IntegratorConfig& cfg, double duration) {
    if (start.frame != FrameId::K1)
        throw DomainError("verify_k1_monotone_eta: start must be a K1 state");
    K1MonotoneReport rep;
    rep.trajectory = integrate(start, duration, p, cfg);
    const double prod0 = start[1] * start[2];
    double worst = 0.0;
    double prev = start[1];
    bool monotone = true;
    for (size_t i = 1; i < rep.trajectory.states.size(); ++i) {
        const auto& s = rep.trajectory.states[i];
        if (s[1] >= prev) monotone = false;
        prev = s[1];
        if (prod0 != 0.0)
            worst = std::max(worst, std::abs(s[1] * s[2] - prod0) / std::abs(prod0));
        else
            worst = std::max(worst, std::abs(s[1] * s[2]));
    }
    rep.monotone = monotone;
    rep.product_drift = worst;
    return rep;
}

AppendixBConstants appendix_b_constants(double delta, double k0, double gamma_out,
                                        double beta_out, const Params& p) {
    if (!(delta > 0.0 && gamma_out > 0.0 && beta_out > 0.0 && k0 >= 0.0))
        throw ConstraintViolation("appendix_b_constants: inputs must be positive");
    const double a = p.a;
    const double d6 = std::pow(delta, 6);
    AppendixBConstants k;
    k.delta = delta;
    k.k0 = k0;
    k.gamma_out = gamma_out;
    k.beta_out = beta_out;
    k.C = std::pow(1.0 - 2.0 * d6, 3) * (0.5 - d6);
    k.D = (1.0 + d6) * ((a + k0 * k0) / 2.0 + d6 * k0 * k0);
    k.F = std::sqrt(k.C / k.D);
    if (beta_out >= k.F)
        throw ConstraintViolation("appendix_b_constants: beta_out must be below F");
    k.K = k.F * k.F / (k.F * k.F - beta_out * beta_out);
    k.C_tilde = (1.0 + d6) / 2.0;
    k.D_tilde = a * (1.0 - 2.0 * d6 - std::pow(gamma_out, 3) / std::sqrt(2.0)) / 2.0;
    if (k.D_tilde <= 0.0)
        throw ConstraintViolation("appendix_b_constants: D_tilde must be positive");
    k.d1 = 1.0 / (1.0 + d6);
    k.d2 = std::pow(1.0 - 2.0 * d6, -3);
    k.c1 = a * std::pow(gamma_out, 3) * std::pow(k.K, 3) / (3.0 * std::sqrt(2.0) * k.C);
    k.c2 = k.d2 * (1.0 + d6) * (a + k0 * k0) / (2.0 * k.C);
    return k;
}

ExitBoundReport verify_exit_bounds(const ChartPoint& initial, const AppendixBConstants& k,
                                   const Params& p, const IntegratorConfig& cfg) {
    if (initial.chart != FrameId::K3)
        throw DomainError("verify_exit_bounds: initial must be a K3 point");
    const double eta0 = initial.coords[0], r0 = initial.coords[1], e0 = initial.coords[2];
    if (eta0 < 0.0 || eta0 > k.delta || r0 < 0.0 || r0 > k.beta_out || e0 < 0.0 ||
        e0 > k.gamma_out || eta0 * e0 > k.delta * k.gamma_out + 1e-15)
        throw DomainError("verify_exit_bounds: initial outside the region Xi");

    ExitBoundReport rep;
    rep.start = initial.coords;

    if (eta0 >= k.delta * (1.0 - 1e-12)) {
        rep.T_plus = 0.0;
        rep.exit_r3 = r0;
        rep.lower = -k.c1 * r0 * r0 * r0;
        rep.upper = k.c2 * r0 * r0;
        rep.in_bounds = rep.lower <= 0.0 && 0.0 <= rep.upper;
        rep.sandwich_ok = true;
        return rep;
    }

    FrameState start(FrameId::K3, eta0, r0, e0);
    EventSpec exit_ev;
    const double delta = k.delta;
    exit_ev.fn = [delta](const FrameState& s) { return s[0] - delta; };
    exit_ev.direction = EventDirection::Rising;

    Trajectory dense;
    const double t_max = 12.0 * std::log(std::max(delta / std::max(eta0, 1e-12), 2.0)) + 200.0;
    EventResult r = integrate_to_event(start, exit_ev, p, cfg, t_max, {}, &dense);
    if (r.status != TerminalStatus::EventHit) {
        if (eta0 == 0.0)
            throw NoCrossing("verify_exit_bounds: eta3 = 0 is invariant");
        throw NoCrossing("verify_exit_bounds: exit face not reached (escaped Xi?)");
    }
    rep.T_plus = r.time;
    rep.exit_r3 = r.state[1];

    const double log_term = 6.0 * std::log(delta / eta0);
    rep.lower = k.d1 * log_term - k.c1 * r0 * r0 * r0;
    rep.upper = k.d2 * log_term + k.c2 * r0 * r0;
    rep.in_bounds = rep.lower <= rep.T_plus && rep.T_plus <= rep.upper;

    rep.sandwich_ok = true;
    for (size_t i = 0; i < dense.states.size(); ++i) {
        const double t = dense.times[i];
        const double r3 = dense.states[i][1];
        const double up = k.K * r0 * std::exp(-k.C * t);
        const double lo = r0 * std::exp(-k.C_tilde * t);
        // faces of Xi other than the exit must not be pierced
        if (dense.states[i][1] > k.beta_out * (1.0 + 1e-9) ||
            dense.states[i][2] > k.gamma_out * (1.0 + 1e-9))
            throw DomainError("verify_exit_bounds: trajectory escaped Xi through a "
                              "forbidden face");
        if (r3 > up * (1.0 + 1e-9) || r3 < lo * (1.0 - 1e-9)) rep.sandwich_ok = false;
    }
    return rep;
}

std::vector<ExitScalingPoint> exit_image_scaling(const std::vector<double>& eta30_grid,
                                                 double r30, double eps30,
                                                 const AppendixBConstants& k,
                                                 const Params& p,
                                                 const IntegratorConfig& cfg) {
    std::vector<ExitScalingPoint> out;
    for (double eta0 : eta30_grid) {
        ChartPoint pt;
        pt.chart = FrameId::K3;
        pt.coords = {eta0, r30, eps30};
        ExitBoundReport rep = verify_exit_bounds(pt, k, p, cfg);
        out.push_back({eta0, rep.exit_r3});
    }
    return out;
}

} // namespace bruss
