#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "bruss/frames.hpp"
#include "bruss/geometry.hpp"

namespace bruss {

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 1e6;
    long max_steps = 10'000'000;
    double event_tol = 1e-12;
    double initial_step = 0.0;  // 0 = auto
};

enum class EventDirection { Rising, Falling, Any };

struct EventSpec {
    std::function<double(const FrameState&)> fn;
    EventDirection direction = EventDirection::Any;
    std::function<bool(const FrameState&)> bounds;  // optional admissibility
};

// accumulated values of every clock along one trajectory; entries for clocks
// whose rate degenerates at the start are invalid (NaN)
struct TimeLedger {
    double tau = 0, t = 0, t1 = 0, t2 = 0, tau2 = 0, chart = 0;
    bool tau_ok = true, t_ok = true, t1_ok = true, t2_ok = true, tau2_ok = true,
         chart_ok = false;
    double get(ClockId c) const;
    bool valid(ClockId c) const;
    TimeLedger operator-(const TimeLedger& o) const;
};

enum class TerminalStatus { DurationReached, EventHit, MaxSteps, DomainExit, NoCrossing };

struct Trajectory {
    FrameId frame = FrameId::Rescaled;
    std::vector<double> times;  // active clock
    std::vector<FrameState> states;
    std::vector<TimeLedger> ledgers;
    TerminalStatus status = TerminalStatus::DurationReached;
    bool clamped = false;  // negative radius clamped to 0 at least once
    const FrameState& back() const { return states.back(); }
};

struct MarkerHit {
    int marker = -1;
    double time = 0;
    FrameState state;
    TimeLedger ledger;
};

struct EventResult {
    FrameState state;
    TimeLedger ledger;
    double time = 0;  // active clock at crossing
    TerminalStatus status = TerminalStatus::EventHit;
    std::vector<MarkerHit> marker_hits;
    bool clamped = false;
};

// generic adaptive DOPRI5(4) drive over a frame field; the state is augmented
// with the clock-rate integrands so the ledger carries integrator accuracy
Trajectory integrate(const FrameState& start, double duration, const Params& p,
                     const IntegratorConfig& cfg);

// integrates until the primary event fires within bounds. Crossings whose
// bounds_fn rejects are recorded as marker -2 hits and integration continues.
EventResult integrate_to_event(const FrameState& start, const EventSpec& event,
                               const Params& p, const IntegratorConfig& cfg, double t_max,
                               const std::vector<EventSpec>& markers = {},
                               Trajectory* dense = nullptr, double dense_ds = 0.0);

enum class SlowBranch { S1, S2 };

// numerical slow manifold over a window, transient discarded by launching a
// bracketing pair of trajectories and keeping their midpoint
struct SlowManifoldResult {
    CurvePolyline curve;  // Rescaled frame
    double merge_gap = 0.0;  // bracket separation at window entry
};
SlowManifoldResult extract_slow_manifold(SlowBranch branch, double window_lo,
                                         double window_hi, const Params& p,
                                         const IntegratorConfig& cfg, int samples = 33);

} // namespace bruss
