#include "bruss/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bruss {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kQuarterPi = kPi / 4.0;
constexpr double kHalfPi = kPi / 2.0;
constexpr int kMaxDim = 8;  // up to 3 state coords + 5 clock integrands

struct ClockMask {
    bool tau = true, t = true, t1 = true, tau2 = true;
};

// which coordinates must stay nonnegative (clamped at 0 when roundoff
// undershoots)
void nonneg_indices(FrameId f, int idx[3], int& count) {
    count = 0;
    switch (f) {
        case FrameId::Compact:
        case FrameId::Rescaled:
        case FrameId::Omega:
            idx[count++] = 1;
            break;
        case FrameId::K1:
        case FrameId::K2:
        case FrameId::K3:
            idx[count++] = 0;
            idx[count++] = 1;
            idx[count++] = 2;
            break;
        default:
            break;
    }
}

// d(clock)/d(active clock) integrands: tau, t, t1, t2, tau2 in this order.
// eps_eff is the state's own epsilon (for charts, (eta*eps_chart)^2).
void ledger_rates(FrameId f, const double* x, const Params& p, double eps_eff,
                  double out[5]) {
    const double eps = eps_eff;
    auto inv = [](double v) { return v > 0.0 ? 1.0 / v : std::numeric_limits<double>::quiet_NaN(); };
    switch (f) {
        case FrameId::XY:
        case FrameId::XYSlow: {
            double xf, yf;
            if (f == FrameId::XY) {
                xf = x[1];
                yf = x[0] + x[1];
            } else {
                xf = x[0];
                yf = x[1];
            }
            const double q = xf * xf + yf * yf;  // = 1 / r_polar^2
            out[0] = 1.0;
            out[1] = inv(eps);
            out[2] = inv(eps) * q;
            out[3] = q;
            out[4] = eps * q;
            break;
        }
        case FrameId::XYFast:
        case FrameId::Polar: {
            double r2;
            if (f == FrameId::Polar) {
                r2 = x[1] * x[1];
            } else {
                r2 = 1.0 / (x[0] * x[0] + x[1] * x[1]);
            }
            out[0] = eps;
            out[1] = 1.0;
            out[2] = inv(r2);
            out[3] = eps * inv(r2);
            out[4] = eps * eps * inv(r2);
            break;
        }
        case FrameId::Compact: {
            const double r2 = x[1] * x[1];
            out[0] = eps * r2;
            out[1] = r2;
            out[2] = 1.0;
            out[3] = eps;
            out[4] = eps * eps;
            break;
        }
        case FrameId::Rescaled:
        case FrameId::Omega: {
            const double rb2 = x[1] * x[1];
            out[0] = eps * rb2;
            out[1] = rb2;
            out[2] = inv(eps);
            out[3] = 1.0;
            out[4] = eps;
            break;
        }
        case FrameId::K1: {
            const double eta6 = std::pow(x[1], 6);
            out[0] = eps;  // dt/dchart = 1 since rbar^2 = eta^6
            out[1] = 1.0;
            out[2] = inv(eps) * inv(eta6);
            out[3] = inv(eta6);
            out[4] = eps * inv(eta6);
            break;
        }
        case FrameId::K2: {
            const double eta6 = std::pow(x[2], 6);
            const double r2 = x[1] * x[1];
            out[0] = eps * r2;
            out[1] = r2;
            out[2] = inv(eps) * inv(eta6);
            out[3] = inv(eta6);
            out[4] = eps * inv(eta6);
            break;
        }
        case FrameId::K3: {
            const double eta6 = std::pow(x[0], 6);
            const double r2 = x[1] * x[1];
            out[0] = eps * r2;
            out[1] = r2;
            out[2] = inv(eps) * inv(eta6);
            out[3] = inv(eta6);
            out[4] = eps * inv(eta6);
            break;
        }
    }
    (void)p;
}

double state_epsilon(const FrameState& s, const Params& p) {
    switch (s.frame) {
        case FrameId::K1: {
            const double e = s[1] * s[2];
            return e * e;
        }
        case FrameId::K2: {
            const double e = s[2];
            return e * e;
        }
        case FrameId::K3: {
            const double e = s[0] * s[2];
            return e * e;
        }
        default:
            return p.epsilon;
    }
}

struct Dopri5 {
    // Dormand-Prince 5(4) tableau
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

struct Engine {
    FrameId frame;
    const Params* params;
    IntegratorConfig cfg;
    int dim = 2;
    int n = 7;  // dim + 5 ledger integrands
    double eps_eff = 0.0;
    bool clamped = false;

    void rhs(const double* y, double* f) const {
        FrameState s;
        s.frame = frame;
        for (int i = 0; i < dim; ++i) s[i] = y[i];
        int idx[3];
        int cnt;
        nonneg_indices(frame, idx, cnt);
        for (int i = 0; i < cnt; ++i)
            if (s[idx[i]] < 0.0) s[idx[i]] = 0.0;
        const Vec3 v = eval_vector_field(s, *params);
        for (int i = 0; i < dim; ++i) f[i] = v[static_cast<size_t>(i)];
        double rates[5];
        ledger_rates(frame, s.x.data(), *params, eps_eff, rates);
        for (int i = 0; i < 5; ++i) {
            const double r = rates[i];
            f[dim + i] = std::isfinite(r) ? r : 0.0;
        }
    }

    double error_norm(const double* y0, const double* y1, const double* err) const {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            const double sc = cfg.abs_tol +
                              cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
            const double q = err[i] / sc;
            sum += q * q;
        }
        return std::sqrt(sum / n);
    }

    double initial_step(const double* y, const double* f) const {
        if (cfg.initial_step > 0.0) return std::min(cfg.initial_step, cfg.max_step);
        double dn = 0.0, yn = 0.0;
        for (int i = 0; i < n; ++i) {
            dn = std::max(dn, std::abs(f[i]));
            yn = std::max(yn, std::abs(y[i]));
        }
        double h = dn > 1e-300 ? 0.01 * std::max(yn, 1e-6) / dn : 1e-6;
        return std::clamp(h, 1e-12, cfg.max_step);
    }
};

struct EventTracker {
    const EventSpec* spec;
    double value = 0.0;
    bool have_sign = false;
    int sign = 0;
};

double eval_event(const EventSpec& ev, FrameId frame, int dim, const double* y) {
    FrameState s;
    s.frame = frame;
    for (int i = 0; i < dim; ++i) s[i] = y[i];
    return ev.fn(s);
}

// Hermite interpolant over the accepted step
void interp(int n, double h, const double* y0, const double* f0, const double* y1,
            const double* f1, double sigma, double* out) {
    const double s = sigma, s1 = 1.0 - sigma;
    for (int i = 0; i < n; ++i) {
        const double d = y1[i] - y0[i];
        out[i] = y0[i] + s * d +
                 s * (s - 1.0) * ((1.0 - 2.0 * s) * d + (s - 1.0) * h * f0[i] + s * h * f1[i]);
    }
}

TimeLedger make_ledger(FrameId frame, double active_time, const double* y, int dim,
                       const TimeLedger& base) {
    TimeLedger L = base;
    const ClockId active = clock_of(frame);
    double vals[5];
    for (int i = 0; i < 5; ++i) vals[i] = y[dim + i];
    // integrand slots: tau, t, t1, t2, tau2
    L.tau = base.tau + vals[0];
    L.t = base.t + vals[1];
    L.t1 = base.t1 + vals[2];
    L.t2 = base.t2 + vals[3];
    L.tau2 = base.tau2 + vals[4];
    switch (active) {
        case ClockId::Tau: L.tau = base.tau + active_time; break;
        case ClockId::T: L.t = base.t + active_time; break;
        case ClockId::T1: L.t1 = base.t1 + active_time; break;
        case ClockId::T2: L.t2 = base.t2 + active_time; break;
        default:
            L.chart = base.chart + active_time;
            L.chart_ok = true;
            break;
    }
    return L;
}

} // namespace

double TimeLedger::get(ClockId c) const {
    switch (c) {
        case ClockId::Tau: return tau;
        case ClockId::T: return t;
        case ClockId::T1: return t1;
        case ClockId::T2: return t2;
        case ClockId::Tau2: return tau2;
        default: return chart;
    }
}

bool TimeLedger::valid(ClockId c) const {
    switch (c) {
        case ClockId::Tau: return tau_ok;
        case ClockId::T: return t_ok;
        case ClockId::T1: return t1_ok;
        case ClockId::T2: return t2_ok;
        case ClockId::Tau2: return tau2_ok;
        default: return chart_ok;
    }
}

TimeLedger TimeLedger::operator-(const TimeLedger& o) const {
    TimeLedger d = *this;
    d.tau -= o.tau;
    d.t -= o.t;
    d.t1 -= o.t1;
    d.t2 -= o.t2;
    d.tau2 -= o.tau2;
    d.chart -= o.chart;
    return d;
}

namespace {

struct DriveResult {
    TerminalStatus status = TerminalStatus::DurationReached;
    double end_time = 0.0;
    FrameState end_state;
    TimeLedger end_ledger;
    std::vector<MarkerHit> marker_hits;
    bool clamped = false;
};

// single driver used by both entry points
DriveResult drive(const FrameState& start, double t_end, const Params& p,
                  const IntegratorConfig& cfg, const EventSpec* primary,
                  const std::vector<EventSpec>& markers, Trajectory* record,
                  double record_ds) {
    p.validate();
    if (!(t_end > 0.0)) throw DomainError("integration duration must be positive");

    Engine eng;
    eng.frame = start.frame;
    eng.params = &p;
    eng.cfg = cfg;
    eng.dim = start.dim();
    eng.n = eng.dim + 5;
    eng.eps_eff = state_epsilon(start, p);

    double y[kMaxDim], y1[kMaxDim], k1[kMaxDim], k2[kMaxDim], k3[kMaxDim], k4[kMaxDim],
        k5[kMaxDim], k6[kMaxDim], k7[kMaxDim], ytmp[kMaxDim], yerr[kMaxDim];
    for (int i = 0; i < eng.dim; ++i) y[i] = start[i];
    for (int i = eng.dim; i < eng.n; ++i) y[i] = 0.0;

    TimeLedger base;  // validity flags from start-state rates
    {
        double rates[5];
        ledger_rates(start.frame, start.x.data(), p, eng.eps_eff, rates);
        base.tau_ok = std::isfinite(rates[0]);
        base.t_ok = std::isfinite(rates[1]);
        base.t1_ok = std::isfinite(rates[2]);
        base.t2_ok = std::isfinite(rates[3]);
        base.tau2_ok = std::isfinite(rates[4]);
    }

    std::vector<EventTracker> trackers;
    if (primary) trackers.push_back({primary});
    for (const auto& m : markers) trackers.push_back({&m});
    for (auto& tr : trackers) {
        tr.value = eval_event(*tr.spec, eng.frame, eng.dim, y);
        tr.sign = tr.value > 0 ? 1 : (tr.value < 0 ? -1 : 0);
        tr.have_sign = tr.sign != 0;
    }

    DriveResult res;
    auto snapshot_state = [&](const double* yy) {
        FrameState s;
        s.frame = eng.frame;
        for (int i = 0; i < eng.dim; ++i) s[i] = yy[i];
        return s;
    };
    auto record_sample = [&](double tt, const double* yy) {
        if (!record) return;
        record->times.push_back(tt);
        record->states.push_back(snapshot_state(yy));
        record->ledgers.push_back(make_ledger(eng.frame, tt, yy, eng.dim, base));
    };

    try {
        eng.rhs(y, k1);
    } catch (const DomainError&) {
        res.status = TerminalStatus::DomainExit;
        res.end_state = start;
        res.end_ledger = base;
        return res;
    }
    double t = 0.0;
    double h = std::min(eng.initial_step(y, k1), t_end);
    double errold = 1.0;
    long steps = 0;

    if (record) {
        record->frame = eng.frame;
        record_sample(0.0, y);
    }

    while (t < t_end) {
        if (++steps > cfg.max_steps) {
            res.status = TerminalStatus::MaxSteps;
            break;
        }
        h = std::min(h, t_end - t);
        h = std::min(h, cfg.max_step);

        bool domain_exit = false;
        try {
            // FSAL stages
            for (int i = 0; i < eng.n; ++i) ytmp[i] = y[i] + h * Dopri5::a21 * k1[i];
            eng.rhs(ytmp, k2);
            for (int i = 0; i < eng.n; ++i)
                ytmp[i] = y[i] + h * (Dopri5::a31 * k1[i] + Dopri5::a32 * k2[i]);
            eng.rhs(ytmp, k3);
            for (int i = 0; i < eng.n; ++i)
                ytmp[i] = y[i] + h * (Dopri5::a41 * k1[i] + Dopri5::a42 * k2[i] +
                                      Dopri5::a43 * k3[i]);
            eng.rhs(ytmp, k4);
            for (int i = 0; i < eng.n; ++i)
                ytmp[i] = y[i] + h * (Dopri5::a51 * k1[i] + Dopri5::a52 * k2[i] +
                                      Dopri5::a53 * k3[i] + Dopri5::a54 * k4[i]);
            eng.rhs(ytmp, k5);
            for (int i = 0; i < eng.n; ++i)
                ytmp[i] = y[i] + h * (Dopri5::a61 * k1[i] + Dopri5::a62 * k2[i] +
                                      Dopri5::a63 * k3[i] + Dopri5::a64 * k4[i] +
                                      Dopri5::a65 * k5[i]);
            eng.rhs(ytmp, k6);
            for (int i = 0; i < eng.n; ++i)
                y1[i] = y[i] + h * (Dopri5::b1 * k1[i] + Dopri5::b3 * k3[i] +
                                    Dopri5::b4 * k4[i] + Dopri5::b5 * k5[i] +
                                    Dopri5::b6 * k6[i]);
            eng.rhs(y1, k7);
        } catch (const DomainError&) {
            domain_exit = true;
        }
        if (domain_exit) {
            // shrink; if already tiny, report domain exit
            if (h < 1e-13 * std::max(1.0, t)) {
                res.status = TerminalStatus::DomainExit;
                break;
            }
            h *= 0.25;
            continue;
        }
        for (int i = 0; i < eng.n; ++i)
            yerr[i] = h * (Dopri5::e1 * k1[i] + Dopri5::e3 * k3[i] + Dopri5::e4 * k4[i] +
                           Dopri5::e5 * k5[i] + Dopri5::e6 * k6[i] + Dopri5::e7 * k7[i]);
        const double err = eng.error_norm(y, y1, yerr);
        if (err > 1.0) {
            const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
            h *= fac;
            if (h < 1e-16 * std::max(1.0, std::abs(t))) {
                res.status = TerminalStatus::DomainExit;
                break;
            }
            continue;
        }

        // accepted
        const double t_new = t + h;

        // event scan over this step
        struct Hit {
            size_t tracker;
            double sigma;
        };
        std::vector<Hit> hits;
        for (size_t ti = 0; ti < trackers.size(); ++ti) {
            auto& tr = trackers[ti];
            const double e1v = eval_event(*tr.spec, eng.frame, eng.dim, y1);
            const int s1 = e1v > 0 ? 1 : (e1v < 0 ? -1 : 0);
            if (tr.have_sign && s1 != 0 && s1 != tr.sign) {
                const bool rising = tr.sign < 0;
                const bool dir_ok = tr.spec->direction == EventDirection::Any ||
                                    (rising && tr.spec->direction == EventDirection::Rising) ||
                                    (!rising && tr.spec->direction == EventDirection::Falling);
                if (dir_ok) {
                    // bisection on the Hermite interpolant
                    double lo = 0.0, hi = 1.0;
                    double elo = tr.value;
                    double tmp[kMaxDim];
                    double sig = 0.5;
                    for (int it = 0; it < 40; ++it) {
                        sig = 0.5 * (lo + hi);
                        interp(eng.n, h, y, k1, y1, k7, sig, tmp);
                        const double em = eval_event(*tr.spec, eng.frame, eng.dim, tmp);
                        if (std::abs(em) <= cfg.event_tol) break;
                        if ((em > 0) == (elo > 0)) {
                            lo = sig;
                            elo = em;
                        } else {
                            hi = sig;
                        }
                    }
                    hits.push_back({ti, sig});
                }
            }
            if (s1 != 0) {
                tr.sign = s1;
                tr.have_sign = true;
            }
            tr.value = e1v;
        }
        std::sort(hits.begin(), hits.end(),
                  [](const Hit& a, const Hit& b) { return a.sigma < b.sigma; });

        bool terminated = false;
        double prim_sigma = 1e300;
        for (const auto& hit : hits) {
            // markers coinciding with the primary crossing still count
            if (terminated && hit.sigma > prim_sigma + 1e-9) break;
            double tmp[kMaxDim];
            interp(eng.n, h, y, k1, y1, k7, hit.sigma, tmp);
            FrameState cs = snapshot_state(tmp);
            const double ct = t + hit.sigma * h;
            TimeLedger cl = make_ledger(eng.frame, ct, tmp, eng.dim, base);
            const bool is_primary = primary && hit.tracker == 0;
            if (is_primary) {
                const bool ok = !primary->bounds || primary->bounds(cs);
                if (ok && !terminated) {
                    if (record) record_sample(ct, tmp);
                    res.status = TerminalStatus::EventHit;
                    res.end_time = ct;
                    res.end_state = cs;
                    res.end_ledger = cl;
                    terminated = true;
                    prim_sigma = hit.sigma;
                    continue;
                }
                if (!terminated) res.marker_hits.push_back({-2, ct, cs, cl});
            } else {
                const auto& ms = *trackers[hit.tracker].spec;
                if (!ms.bounds || ms.bounds(cs)) {
                    const int mi = primary ? static_cast<int>(hit.tracker) - 1
                                           : static_cast<int>(hit.tracker);
                    res.marker_hits.push_back({mi, ct, cs, cl});
                }
            }
        }
        if (terminated) break;

        // clamp radius-like coordinates that round off below zero
        {
            int idx[3];
            int cnt;
            nonneg_indices(eng.frame, idx, cnt);
            for (int i = 0; i < cnt; ++i)
                if (y1[idx[i]] < 0.0) {
                    y1[idx[i]] = 0.0;
                    res.clamped = true;
                }
        }

        if (record) {
            if (record_ds > 0.0) {
                double d = 0.0;
                for (int i = 0; i < eng.dim; ++i) d += (y1[i] - y[i]) * (y1[i] - y[i]);
                d = std::sqrt(d);
                const int sub = std::min(64, static_cast<int>(d / record_ds));
                double tmp[kMaxDim];
                for (int j = 1; j <= sub; ++j) {
                    const double sg = static_cast<double>(j) / (sub + 1);
                    interp(eng.n, h, y, k1, y1, k7, sg, tmp);
                    record_sample(t + sg * h, tmp);
                }
            }
            record_sample(t_new, y1);
        }

        for (int i = 0; i < eng.n; ++i) {
            y[i] = y1[i];
            k1[i] = k7[i];
        }
        t = t_new;

        const double fac =
            std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.14) * std::pow(errold, 0.08),
                       0.2, 6.0);
        h *= fac;
        errold = std::max(err, 1e-10);
    }

    if (res.status == TerminalStatus::DurationReached ||
        res.status == TerminalStatus::MaxSteps || res.status == TerminalStatus::DomainExit) {
        if (res.status == TerminalStatus::DurationReached && primary)
            res.status = TerminalStatus::NoCrossing;
        res.end_time = t;
        res.end_state = snapshot_state(y);
        res.end_ledger = make_ledger(eng.frame, t, y, eng.dim, base);
    }
    return res;
}

} // namespace

Trajectory integrate(const FrameState& start, double duration, const Params& p,
                     const IntegratorConfig& cfg) {
    Trajectory traj;
    DriveResult r = drive(start, duration, p, cfg, nullptr, {}, &traj, 0.0);
    traj.status = r.status;
    traj.clamped = r.clamped;
    if (traj.status == TerminalStatus::MaxSteps)
        throw MaxStepsExceeded("integrate: max_steps exceeded");
    return traj;
}

EventResult integrate_to_event(const FrameState& start, const EventSpec& event,
                               const Params& p, const IntegratorConfig& cfg, double t_max,
                               const std::vector<EventSpec>& markers, Trajectory* dense,
                               double dense_ds) {
    DriveResult r = drive(start, t_max, p, cfg, &event, markers, dense, dense_ds);
    EventResult out;
    out.state = r.end_state;
    out.ledger = r.end_ledger;
    out.time = r.end_time;
    out.status = r.status;
    out.marker_hits = std::move(r.marker_hits);
    out.clamped = r.clamped;
    if (dense) {
        dense->status = r.status;
        dense->clamped = r.clamped;
    }
    return out;
}

namespace {

EventSpec level_event(int coord, double level, EventDirection dir) {
    EventSpec ev;
    ev.fn = [coord, level](const FrameState& s) { return s[coord] - level; };
    ev.direction = dir;
    return ev;
}

} // namespace

SlowManifoldResult extract_slow_manifold(SlowBranch branch, double window_lo,
                                         double window_hi, const Params& p,
                                         const IntegratorConfig& cfg, int samples) {
    if (!(window_lo < window_hi))
        throw DomainError("extract_slow_manifold: bad window");
    SlowManifoldResult res;
    res.curve.frame = FrameId::Rescaled;
    res.curve.label = branch == SlowBranch::S2 ? "S2_eps" : "S1_eps";

    if (branch == SlowBranch::S2 && p.epsilon == 0.0) {
        // layer relaxation onto the critical manifold, one start per sample
        for (int i = 0; i < samples; ++i) {
            const double th = window_lo + (window_hi - window_lo) * i / (samples - 1.0);
            FrameState s(FrameId::Rescaled, th, phi0(th, p) + 0.05);
            Trajectory tr = integrate(s, 400.0, p, cfg);
            res.curve.points.push_back({tr.back()[0], tr.back()[1]});
        }
        std::sort(res.curve.points.begin(), res.curve.points.end(),
                  [](auto& a, auto& b) { return a[0] < b[0]; });
        return res;
    }

    const bool s2 = branch == SlowBranch::S2;
    if (s2 && window_hi > kHalfPi - 0.1)
        throw DomainError("extract_slow_manifold: S2 window must avoid pi/2 by >= 0.1");
    if (s2 && window_lo < p.theta_star() + 0.1)
        throw DomainError("extract_slow_manifold: S2 window must avoid the fold");

    // markers at the sample grid, primary at the window's outflow end
    std::vector<EventSpec> grid;
    for (int i = 0; i < samples; ++i) {
        const double v = window_lo + (window_hi - window_lo) * i / (samples - 1.0);
        grid.push_back(level_event(s2 ? 0 : 1, v, EventDirection::Falling));
    }
    EventSpec primary = level_event(s2 ? 0 : 1, window_lo, EventDirection::Falling);

    const double t_max = s2 ? 5e4 / std::max(p.epsilon, 1e-3)
                            : 1e3 / std::max(std::pow(p.epsilon, 1.5) * 0.01, 1e-9);

    auto run = [&](double offset) {
        FrameState start;
        if (s2) {
            const double th0 = kHalfPi - 0.04;
            start = FrameState(FrameId::Rescaled, th0, phi0(th0, p) + offset);
        } else {
            start = FrameState(FrameId::Rescaled, kQuarterPi + offset, window_hi + 0.1);
        }
        EventResult r = integrate_to_event(start, primary, p, cfg, t_max, grid);
        if (r.status != TerminalStatus::EventHit)
            throw NotConverged("extract_slow_manifold: transient did not cross the window");
        return r;
    };

    const double off_a = s2 ? 0.02 : 0.05;
    const double off_b = s2 ? -0.02 : 0.0;
    EventResult ra = run(off_a);
    EventResult rb = run(off_b);

    auto collect = [&](const EventResult& r, std::vector<double>& vals) {
        vals.assign(static_cast<size_t>(samples), std::numeric_limits<double>::quiet_NaN());
        for (const auto& h : r.marker_hits) {
            if (h.marker >= 0 && h.marker < samples) {
                vals[static_cast<size_t>(h.marker)] = s2 ? h.state[1] : h.state[0];
            }
        }
    };
    std::vector<double> va, vb;
    collect(ra, va);
    collect(rb, vb);

    double entry_gap = 0.0;
    for (int i = 0; i < samples; ++i) {
        if (std::isnan(va[static_cast<size_t>(i)]) || std::isnan(vb[static_cast<size_t>(i)]))
            continue;
        const double grid_v = window_lo + (window_hi - window_lo) * i / (samples - 1.0);
        const double mid =
            0.5 * (va[static_cast<size_t>(i)] + vb[static_cast<size_t>(i)]);
        if (s2)
            res.curve.points.push_back({grid_v, mid});
        else
            res.curve.points.push_back({mid, grid_v});
        if (i == samples - 1)
            entry_gap = std::abs(va[static_cast<size_t>(i)] - vb[static_cast<size_t>(i)]);
    }
    if (res.curve.points.size() < 2)
        throw NotConverged("extract_slow_manifold: window not traversed");
    std::sort(res.curve.points.begin(), res.curve.points.end(),
              [](auto& a, auto& b) { return a[0] < b[0]; });
    res.merge_gap = entry_gap;
    return res;
}

} // namespace bruss
