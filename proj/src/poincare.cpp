#include "bruss/poincare.hpp"

#include <algorithm>
#include <cmath>

namespace bruss {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kQuarterPi = kPi / 4.0;
constexpr double kHalfPi = kPi / 2.0;
} // namespace

const char* section_name(SectionId id) {
    switch (id) {
        case SectionId::S1: return "Sigma1";
        case SectionId::S1b: return "Sigma1b";
        case SectionId::S2: return "Sigma2";
        case SectionId::S3: return "Sigma3";
        case SectionId::S4: return "Sigma4";
    }
    return "?";
}

SectionConfig section_profile(const Params& p) {
    // the cycle radius at the bottom corner grows like (2 sqrt2 / a) eps^{3/2},
    // so the sections widen with epsilon; values below are the calibrated
    // working set for a near 0.5
    SectionConfig c;
    if (p.epsilon > 0.11) {
        c.beta1 = 0.46;
        c.rmax_b = 0.40;
        c.alpha2 = 0.22;
        c.len3 = 0.55;
        c.beta4 = 0.42;
        c.trim_r_low = 0.40;
    } else if (p.epsilon > 0.06) {
        c.beta1 = 0.40;
        c.rmax_b = 0.32;
        c.alpha2 = 0.16;
        c.len3 = 0.42;
        c.beta4 = 0.30;
        c.trim_r_low = 0.36;
    }
    return c;
}

const SectionSpec& SectionSet::get(SectionId id) const {
    switch (id) {
        case SectionId::S1: return s1;
        case SectionId::S1b: return s1b;
        case SectionId::S2: return s2;
        case SectionId::S3: return s3;
        case SectionId::S4: return s4;
    }
    return s1;
}

double SectionSet::min_pairwise_distance(int samples) const {
    const SectionSpec* specs[5] = {&s1, &s1b, &s2, &s3, &s4};
    double best = 1e300;
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j)
            for (int k = 0; k < samples; ++k)
                for (int l = 0; l < samples; ++l) {
                    const FrameState a =
                        specs[i]->param(specs[i]->length * k / (samples - 1.0));
                    const FrameState b =
                        specs[j]->param(specs[j]->length * l / (samples - 1.0));
                    best = std::min(best, std::hypot(a[0] - b[0], a[1] - b[1]));
                }
    return best;
}

SectionSet build_sections(const Params& p) { return build_sections(p, section_profile(p)); }

SectionSet build_sections(const Params& p, const SectionConfig& cfg) {
    p.validate();
    const double ts = p.theta_star();
    if (!(cfg.alpha1 > 0 && cfg.beta1 > 0 && cfg.delta_b > 0 && cfg.alpha2 > 0 &&
          cfg.alpha3 > 0 && cfg.len3 > 0 && cfg.beta4 > 0 && cfg.alpha4 > 0))
        throw DomainError("build_sections: constants must be positive");
    if (cfg.beta4 >= p.q_radius())
        throw DomainError("build_sections: beta4 must be below the drop point radius");
    if (kQuarterPi + cfg.alpha1 >= ts - cfg.alpha3)
        throw DomainError("build_sections: Sigma1 must sit below the fold region");

    SectionSet S;
    S.cfg = cfg;

    // Sigma1: vertical section theta = pi/4 + alpha1
    {
        SectionSpec& s = S.s1;
        s.id = SectionId::S1;
        const double th = kQuarterPi + cfg.alpha1;
        s.anchor = FrameState(FrameId::Rescaled, th, 0.0);
        s.length = cfg.beta1;
        s.event.fn = [th](const FrameState& z) { return z[0] - th; };
        s.event.direction = EventDirection::Rising;
        const double b1 = cfg.beta1;
        s.event.bounds = [b1](const FrameState& z) { return z[1] >= 0.0 && z[1] <= b1; };
        s.param = [th](double u) { return FrameState(FrameId::Rescaled, th, u); };
        s.coord = [](const FrameState& z) { return z[1]; };
    }
    // Sigma1b: auxiliary split of sigma1 from sigma2 near P1
    {
        SectionSpec& s = S.s1b;
        s.id = SectionId::S1b;
        const double th = kHalfPi - cfg.delta_b;
        s.anchor = FrameState(FrameId::Rescaled, th, 0.0);
        s.length = cfg.rmax_b;
        s.event.fn = [th](const FrameState& z) { return z[0] - th; };
        s.event.direction = EventDirection::Rising;
        const double rb = cfg.rmax_b;
        s.event.bounds = [rb](const FrameState& z) { return z[1] >= 0.0 && z[1] <= rb; };
        s.param = [th](double u) { return FrameState(FrameId::Rescaled, th, u); };
        s.coord = [](const FrameState& z) { return z[1]; };
    }
    // Sigma2: fast-fiber arc through (theta*+alpha2, phi0(theta*+alpha2))
    {
        SectionSpec& s = S.s2;
        s.id = SectionId::S2;
        const double th2 = ts + cfg.alpha2;
        const double beta2 = phi0(th2, p) / std::sin(th2);
        const double lo = ts + cfg.alpha2 / 2.0, hi = ts + 1.5 * cfg.alpha2;
        s.anchor = FrameState(FrameId::Rescaled, th2, phi0(th2, p));
        s.length = hi - lo;
        s.event.fn = [beta2](const FrameState& z) {
            return z[1] - beta2 * std::sin(z[0]);
        };
        s.event.direction = EventDirection::Rising;
        s.event.bounds = [lo, hi](const FrameState& z) {
            return z[0] >= lo && z[0] <= hi;
        };
        s.param = [lo, beta2](double u) {
            return FrameState(FrameId::Rescaled, lo + u, beta2 * std::sin(lo + u));
        };
        s.coord = [lo](const FrameState& z) { return z[0] - lo; };
    }
    // Sigma3: straight segment through the fiber rho* at theta*-alpha3,
    // perpendicular to the fiber tangent
    {
        SectionSpec& s = S.s3;
        s.id = SectionId::S3;
        const double th3 = ts - cfg.alpha3;
        const double r3 = p.rho_star() * std::sin(th3);
        const double tx = 1.0, ty = p.rho_star() * std::cos(th3);
        const double tn = std::hypot(tx, ty);
        const double Tx = tx / tn, Ty = ty / tn;   // fiber tangent
        const double Nx = -Ty, Ny = Tx;            // points toward smaller theta, larger r
        const double half = cfg.len3 / 2.0;
        s.anchor = FrameState(FrameId::Rescaled, th3, r3);
        s.length = cfg.len3;
        s.event.fn = [th3, r3, Tx, Ty](const FrameState& z) {
            return (z[0] - th3) * Tx + (z[1] - r3) * Ty;
        };
        s.event.direction = EventDirection::Falling;
        s.event.bounds = [th3, r3, Nx, Ny, half](const FrameState& z) {
            return std::abs((z[0] - th3) * Nx + (z[1] - r3) * Ny) <= half;
        };
        s.param = [th3, r3, Nx, Ny, half](double u) {
            return FrameState(FrameId::Rescaled, th3 + (u - half) * Nx,
                              r3 + (u - half) * Ny);
        };
        s.coord = [th3, r3, Nx, Ny, half](const FrameState& z) {
            return (z[0] - th3) * Nx + (z[1] - r3) * Ny + half;
        };
    }
    // Sigma4: horizontal section r = beta4
    {
        SectionSpec& s = S.s4;
        s.id = SectionId::S4;
        const double b4 = cfg.beta4;
        s.anchor = FrameState(FrameId::Rescaled, kQuarterPi, b4);
        s.length = cfg.alpha4;
        s.event.fn = [b4](const FrameState& z) { return z[1] - b4; };
        s.event.direction = EventDirection::Falling;
        const double a4 = cfg.alpha4;
        s.event.bounds = [a4](const FrameState& z) {
            return z[0] >= kQuarterPi - 1e-6 && z[0] <= kQuarterPi + a4;
        };
        s.param = [b4](double u) { return FrameState(FrameId::Rescaled, kQuarterPi + u, b4); };
        s.coord = [](const FrameState& z) { return z[0] - kQuarterPi; };
    }
    return S;
}

namespace {

// trim marker ids (after the five sections)
struct TrimEvents {
    std::vector<EventSpec> events;
    std::vector<std::string> names;
};

TrimEvents make_trim_events(const Params& p, const SectionConfig& cfg) {
    TrimEvents te;
    const double ts = p.theta_star();
    auto theta_level = [](double level, EventDirection d) {
        EventSpec e;
        e.fn = [level](const FrameState& z) { return z[0] - level; };
        e.direction = d;
        return e;
    };
    auto r_level = [](double level, EventDirection d) {
        EventSpec e;
        e.fn = [level](const FrameState& z) { return z[1] - level; };
        e.direction = d;
        return e;
    };
    te.events = {
        theta_level(kQuarterPi + cfg.trim_theta, EventDirection::Rising),   // sigma1 start
        theta_level(kHalfPi - cfg.trim_theta, EventDirection::Rising),      // sigma1 end
        theta_level(kHalfPi - cfg.trim_theta, EventDirection::Falling),     // sigma2 start
        theta_level(ts + cfg.trim_theta, EventDirection::Falling),          // sigma2 end
        theta_level(ts - cfg.trim_theta, EventDirection::Falling),          // sigma3 start
        theta_level(kQuarterPi + cfg.trim_theta, EventDirection::Falling),  // sigma4... sigma3 end
        r_level(p.q_radius() - cfg.trim_r_high, EventDirection::Falling),   // sigma4 start
        r_level(cfg.trim_r_low, EventDirection::Falling),                   // sigma4 end
    };
    te.names = {"sigma1_start", "sigma1_end", "sigma2_start", "sigma2_end",
                "sigma3_start", "sigma3_end", "sigma4_start", "sigma4_end"};
    return te;
}

struct LegRun {
    EventResult result;
    Trajectory dense;
};

LegRun run_leg(const SectionSet& S, const FrameState& start, SectionId target,
               const Params& p, const IntegratorConfig& cfg, double t_max,
               const std::vector<EventSpec>& markers, bool record, double ds) {
    LegRun out;
    out.result = integrate_to_event(start, S.get(target).event, p, cfg, t_max, markers,
                                    record ? &out.dense : nullptr, ds);
    if (out.result.status == TerminalStatus::NoCrossing)
        throw NoCrossing(std::string("leg never reached ") + section_name(target));
    if (out.result.status != TerminalStatus::EventHit)
        throw NotConverged(std::string("leg toward ") + section_name(target) +
                           " terminated abnormally");
    return out;
}

double leg_t_max(const Params& p) {
    // the superslow corner costs t2 ~ a^2 eps^-6 / 96; generous factor
    const double e = std::max(p.epsilon, 5e-3);
    return 2.0 * p.a * p.a * std::pow(e, -6.0) + 1e6;
}

} // namespace

TransitionResult transition_map(const SectionSet& S, SectionId from, double u,
                                SectionId to, const Params& p,
                                const IntegratorConfig& cfg) {
    if (u < 0.0 || u > S.get(from).length)
        throw DomainError("transition_map: u outside the section");
    FrameState start = S.get(from).param(u);
    std::vector<EventSpec> markers;
    std::vector<SectionId> ids;
    for (SectionId sid : {SectionId::S1, SectionId::S1b, SectionId::S2, SectionId::S3,
                          SectionId::S4}) {
        if (sid == to) continue;
        markers.push_back(S.get(sid).event);
        ids.push_back(sid);
    }
    EventResult r = integrate_to_event(start, S.get(to).event, p, cfg, leg_t_max(p), markers);
    if (r.status == TerminalStatus::NoCrossing)
        throw NoCrossing("transition_map: target section never reached");
    if (r.status != TerminalStatus::EventHit)
        throw NotConverged("transition_map: integration terminated abnormally");
    TransitionResult out;
    out.state = r.state;
    out.ledger = r.ledger;
    out.v = S.get(to).coord(r.state);
    // the next section downstream may legitimately be crossed before the
    // target only when hunting a far target; any in-bounds marker before the
    // hit that is not the origin section flags ordering
    for (const auto& h : r.marker_hits) {
        if (h.marker >= 0 && ids[static_cast<size_t>(h.marker)] != from &&
            h.time < r.time) {
            out.ordering_ok = false;
        }
    }
    return out;
}

CircuitResult return_map(const SectionSet& S, double u, const Params& p,
                         const IntegratorConfig& cfg, Trajectory* dense, double dense_ds) {
    if (u <= 0.0 || u > S.get(SectionId::S1).length)
        throw DomainError("return_map: u outside Sigma1");
    TrimEvents te = make_trim_events(p, S.cfg);

    const SectionId targets[4] = {SectionId::S1b, SectionId::S3, SectionId::S4,
                                  SectionId::S1};
    CircuitResult res;
    for (const auto& n : te.names) res.dwell[n] = TimeLedger{};
    std::map<std::string, TimeLedger> marks;  // trimmed marker ledgers (circuit clock)
    for (auto id : {SectionId::S1, SectionId::S1b, SectionId::S2, SectionId::S3,
                    SectionId::S4})
        res.crossings[section_name(id)] = 0;

    FrameState cur = S.get(SectionId::S1).param(u);
    TimeLedger cum{};
    const double tmax = leg_t_max(p);
    const bool record = true;

    for (int leg = 0; leg < 4; ++leg) {
        // markers: 5 sections (target included, skipped via primary) + trims
        std::vector<EventSpec> markers;
        std::vector<std::string> mnames;
        for (SectionId sid : {SectionId::S1, SectionId::S1b, SectionId::S2, SectionId::S3,
                              SectionId::S4}) {
            if (sid == targets[leg]) continue;
            markers.push_back(S.get(sid).event);
            mnames.push_back(section_name(sid));
        }
        const size_t trim_base = markers.size();
        for (size_t i = 0; i < te.events.size(); ++i) {
            markers.push_back(te.events[i]);
            mnames.push_back(te.names[i]);
        }

        LegRun lr = run_leg(S, cur, targets[leg], p, cfg, tmax, markers, record, dense_ds);
        for (const auto& st : lr.dense.states) res.min_r = std::min(res.min_r, st[1]);
        for (const auto& h : lr.result.marker_hits) {
            if (h.marker < 0) continue;
            const std::string& nm = mnames[static_cast<size_t>(h.marker)];
            if (static_cast<size_t>(h.marker) < trim_base) {
                res.crossings[nm] += 1;
            } else {
                TimeLedger abs = h.ledger;
                abs.tau += cum.tau;
                abs.t += cum.t;
                abs.t1 += cum.t1;
                abs.t2 += cum.t2;
                abs.tau2 += cum.tau2;
                marks[nm] = abs;
            }
        }
        res.crossings[section_name(targets[leg])] += 1;
        if (targets[leg] == SectionId::S3)
            res.sigma3_deviation =
                std::abs(S.s3.coord(lr.result.state) - S.cfg.len3 / 2.0);
        res.legs[static_cast<size_t>(leg)] = lr.result.ledger;
        cum.tau += lr.result.ledger.tau;
        cum.t += lr.result.ledger.t;
        cum.t1 += lr.result.ledger.t1;
        cum.t2 += lr.result.ledger.t2;
        cum.tau2 += lr.result.ledger.tau2;
        cum.tau_ok = lr.result.ledger.tau_ok;
        cum.t_ok = lr.result.ledger.t_ok;
        cum.t1_ok = lr.result.ledger.t1_ok;
        cum.t2_ok = lr.result.ledger.t2_ok;
        cum.tau2_ok = lr.result.ledger.tau2_ok;
        cur = lr.result.state;

        if (dense) {
            for (size_t i = 0; i < lr.dense.states.size(); ++i) {
                dense->times.push_back(lr.dense.times[i]);
                dense->states.push_back(lr.dense.states[i]);
                dense->ledgers.push_back(lr.dense.ledgers[i]);
            }
            dense->frame = FrameId::Rescaled;
        }
    }

    res.u_out = S.get(SectionId::S1).coord(cur);
    res.circuit = cum;
    for (const auto& [name, count] : res.crossings)
        if (count != 1) res.ordering_ok = false;

    // Definition-1.1 dwells; sigma1 wraps around the circuit start
    auto dwell_of = [&](const std::string& start_m, const std::string& end_m) {
        TimeLedger d{};
        if (!marks.count(start_m) || !marks.count(end_m)) {
            d.tau_ok = d.t_ok = d.t1_ok = d.t2_ok = d.tau2_ok = false;
            return d;
        }
        d = marks[end_m] - marks[start_m];
        auto wrap = [&](double v, double period) { return v < 0.0 ? v + period : v; };
        d.tau = wrap(d.tau, cum.tau);
        d.t = wrap(d.t, cum.t);
        d.t1 = wrap(d.t1, cum.t1);
        d.t2 = wrap(d.t2, cum.t2);
        d.tau2 = wrap(d.tau2, cum.tau2);
        d.tau_ok = cum.tau_ok;
        d.t_ok = cum.t_ok;
        d.t1_ok = cum.t1_ok;
        d.t2_ok = cum.t2_ok;
        d.tau2_ok = cum.tau2_ok;
        return d;
    };
    res.dwell.clear();
    res.dwell["sigma1"] = dwell_of("sigma1_start", "sigma1_end");
    res.dwell["sigma2"] = dwell_of("sigma2_start", "sigma2_end");
    res.dwell["sigma3"] = dwell_of("sigma3_start", "sigma3_end");
    res.dwell["sigma4"] = dwell_of("sigma4_start", "sigma4_end");
    return res;
}

LimitCycle fixed_point(const Params& p, const IntegratorConfig& cfg) {
    return fixed_point(p, cfg, section_profile(p));
}

LimitCycle fixed_point(const Params& p, const IntegratorConfig& cfg,
                       const SectionConfig& sc) {
    SectionSet S = build_sections(p, sc);
    double u = 0.5 * S.s1.length;
    double last_delta = 1e300;
    int iters = 0;
    for (; iters < 10; ++iters) {
        CircuitResult r = return_map(S, u, p, cfg);
        last_delta = std::abs(r.u_out - u);
        u = r.u_out;
        if (last_delta < 1e-13) break;
    }
    if (last_delta > 1e-8)
        throw NotConverged("fixed_point: return map iteration did not settle "
                           "(epsilon outside working range?)");

    LimitCycle c;
    c.params = p;
    c.sections = sc;
    c.fixed_u = u;
    c.fixed_state = S.s1.param(u);
    c.iterations = iters + 1;
    c.rho_eps = u / std::sin(kQuarterPi + sc.alpha1);

    Trajectory dense;
    CircuitResult r = return_map(S, u, p, cfg, &dense, 2e-3);
    c.period = r.circuit;
    c.legs = r.legs;
    c.dwell = r.dwell;
    c.sigma3_deviation = r.sigma3_deviation;
    c.min_r = r.min_r;
    c.ordering_ok = r.ordering_ok;
    c.closure_gap = std::hypot(dense.states.back()[0] - c.fixed_state[0],
                               dense.states.back()[1] - c.fixed_state[1]);

    c.polyline.frame = FrameId::Rescaled;
    c.polyline.label = "limit_cycle";
    for (const auto& st : dense.states) c.polyline.points.push_back({st[0], st[1]});

    // leg segmentation of the polyline via the leg boundary states
    {
        const char* labels[4] = {"sigma1_leg", "sigma2_leg", "sigma3_leg", "sigma4_leg"};
        size_t start = 0;
        int leg = 0;
        const SectionId targets[4] = {SectionId::S1b, SectionId::S3, SectionId::S4,
                                      SectionId::S1};
        for (size_t i = 0; i < dense.states.size() && leg < 4; ++i) {
            const auto& ev = S.get(targets[leg]).event;
            if (i > start + 1 && std::abs(ev.fn(dense.states[i])) <= 10 * cfg.event_tol &&
                (!ev.bounds || ev.bounds(dense.states[i]))) {
                CurvePolyline& b = c.branches[static_cast<size_t>(leg)];
                b.frame = FrameId::Rescaled;
                b.label = labels[leg];
                for (size_t j = start; j <= i; ++j)
                    b.points.push_back({dense.states[j][0], dense.states[j][1]});
                start = i;
                ++leg;
            }
        }
        // tail belongs to the last leg
        if (leg < 4) {
            CurvePolyline& b = c.branches[3];
            b.frame = FrameId::Rescaled;
            b.label = labels[3];
            for (size_t j = start; j < dense.states.size(); ++j)
                b.points.push_back({dense.states[j][0], dense.states[j][1]});
        }
    }
    return c;
}

ContractionEstimate contraction_estimate(const Params& p, const IntegratorConfig& cfg) {
    SectionSet S = build_sections(p);
    LimitCycle c = fixed_point(p, cfg);
    const double h = std::max(1e-6, 10.0 * cfg.event_tol);
    CircuitResult rp = return_map(S, c.fixed_u + h, p, cfg);
    CircuitResult rm = return_map(S, std::max(c.fixed_u - h, 1e-9), p, cfg);
    const double du = (c.fixed_u + h) - std::max(c.fixed_u - h, 1e-9);
    const double dv = std::abs(rp.u_out - rm.u_out);
    ContractionEstimate est;
    est.below_resolution = dv < 100.0 * cfg.event_tol;
    est.log_derivative = std::log(std::max(dv, 1e-16) / du);
    return est;
}

std::map<std::string, std::map<std::string, double>> dwell_times(const LimitCycle& c) {
    std::map<std::string, std::map<std::string, double>> out;
    for (const auto& [branch, led] : c.dwell) {
        std::map<std::string, double> row;
        if (led.tau_ok) row["tau"] = led.tau;
        if (led.t_ok) row["t"] = led.t;
        if (led.t1_ok) row["t1"] = led.t1;
        if (led.t2_ok) row["t2"] = led.t2;
        if (led.tau2_ok) row["tau2"] = led.tau2;
        out[branch] = row;
    }
    return out;
}

} // namespace bruss
