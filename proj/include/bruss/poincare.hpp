#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bruss/flow.hpp"

namespace bruss {

enum class SectionId { S1, S1b, S2, S3, S4 };
const char* section_name(SectionId id);

// One-dimensional transverse section with an event function and an intrinsic
// parameterization u in [0, length].
struct SectionSpec {
    SectionId id = SectionId::S1;
    FrameState anchor;
    double length = 0.0;
    EventSpec event;
    std::function<FrameState(double)> param;      // u -> state
    std::function<double(const FrameState&)> coord;  // state -> u
};

// constants defining the five sections; spec defaults, overridable
struct SectionConfig {
    double alpha1 = 0.15, beta1 = 0.3;     // Sigma1: theta = pi/4 + alpha1, r <= beta1
    double delta_b = 0.1, rmax_b = 0.15;   // Sigma1b: theta = pi/2 - delta_b, r <= rmax_b
    double alpha2 = 0.1;                   // Sigma2: fiber arc near theta* + alpha2
    double alpha3 = 0.2, len3 = 0.3;       // Sigma3: perpendicular segment
    double beta4 = 0.25, alpha4 = 0.12;    // Sigma4: r = beta4, theta in [pi/4, pi/4+alpha4]
    // Definition-1.1 dwell trim levels
    double trim_theta = 0.1;
    double trim_r_high = 0.05;   // below Q on sigma4
    double trim_r_low = 0.35;    // lower sigma4 cutoff (must stay above min r)
};

// widened constants for large epsilon where the cycle is fat; documented in
// the README
SectionConfig section_profile(const Params& p);

struct SectionSet {
    SectionConfig cfg;
    SectionSpec s1, s1b, s2, s3, s4;
    const SectionSpec& get(SectionId id) const;
    // smallest pairwise distance between section point sets
    double min_pairwise_distance(int samples = 64) const;
};

SectionSet build_sections(const Params& p, const SectionConfig& cfg);
SectionSet build_sections(const Params& p);  // profile defaults

struct TransitionResult {
    double v = 0.0;  // section coordinate on the target
    FrameState state;
    TimeLedger ledger;
    bool ordering_ok = true;  // no other section crossed in-bounds first
};

TransitionResult transition_map(const SectionSet& sections, SectionId from, double u,
                                SectionId to, const Params& p, const IntegratorConfig& cfg);

struct CircuitResult {
    double u_out = 0.0;
    TimeLedger circuit;                      // full circuit ledger
    std::array<TimeLedger, 4> legs;          // S1->S1b->S3->S4->S1
    std::map<std::string, TimeLedger> dwell; // Definition-1.1 trimmed dwells
    std::map<std::string, int> crossings;    // in-bounds section crossing counts
    bool ordering_ok = true;
    double sigma3_deviation = 0.0;  // |u - u_ref| at the Sigma3 crossing
    double min_r = 1e300;
};

CircuitResult return_map(const SectionSet& sections, double u, const Params& p,
                         const IntegratorConfig& cfg, Trajectory* dense = nullptr,
                         double dense_ds = 0.0);

struct LimitCycle {
    Params params;
    SectionConfig sections;
    double fixed_u = 0.0;
    FrameState fixed_state;
    double rho_eps = 0.0;
    int iterations = 0;
    double closure_gap = 0.0;
    CurvePolyline polyline;                 // Rescaled frame, one full circuit
    std::array<CurvePolyline, 4> branches;  // leg segmentation
    TimeLedger period;
    std::array<TimeLedger, 4> legs;
    std::map<std::string, TimeLedger> dwell;  // trimmed dwells
    double sigma3_deviation = 0.0;
    double min_r = 0.0;
    bool ordering_ok = true;
};

LimitCycle fixed_point(const Params& p, const IntegratorConfig& cfg);
LimitCycle fixed_point(const Params& p, const IntegratorConfig& cfg,
                       const SectionConfig& sc);

struct ContractionEstimate {
    double log_derivative = 0.0;
    bool below_resolution = false;
};
ContractionEstimate contraction_estimate(const Params& p, const IntegratorConfig& cfg);

// per-branch dwell table (clock -> value), from the cycle's trimmed ledgers
std::map<std::string, std::map<std::string, double>> dwell_times(const LimitCycle& c);

} // namespace bruss
