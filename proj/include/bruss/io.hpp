#pragma once

#include <string>
#include <vector>

#include "bruss/flow.hpp"
#include "bruss/geometry.hpp"
#include "bruss/poincare.hpp"
#include "bruss/sweep.hpp"

namespace bruss {

// comma-separated, header row, 17 significant digits
std::string format_double(double v);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
void write_polylines_csv(const std::string& path,
                         const std::vector<const CurvePolyline*>& curves);
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

// minimal SVG phase plot: polylines with axis labels
struct SvgCurve {
    const CurvePolyline* curve;
    std::string color = "#1f6fb2";
    bool dotted = false;
};
void write_svg(const std::string& path, const std::vector<SvgCurve>& curves,
               const std::string& x_label, const std::string& y_label);

} // namespace bruss
