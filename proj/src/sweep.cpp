#include "bruss/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bruss {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kQuarterPi = kPi / 4.0;
constexpr double kHalfPi = kPi / 2.0;
} // namespace

PowerLawFit fit_power_law(const std::vector<std::array<double, 2>>& table) {
    if (table.size() < 4)
        throw DomainError("fit_power_law: need at least 4 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(table.size());
    std::vector<std::array<double, 2>> logs;
    for (const auto& row : table) {
        if (!(row[0] > 0.0) || !(row[1] > 0.0))
            throw DomainError("fit_power_law: values must be strictly positive");
        logs.push_back({std::log(row[0]), std::log(row[1])});
        sx += logs.back()[0];
        sy += logs.back()[1];
        sxx += logs.back()[0] * logs.back()[0];
        sxy += logs.back()[0] * logs.back()[1];
    }
    PowerLawFit fit;
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw DomainError("fit_power_law: degenerate abscissae");
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean = sy / n;
    for (const auto& l : logs) {
        const double pred = fit.intercept + fit.slope * l[0];
        fit.residuals.push_back(l[1] - pred);
        ss_res += (l[1] - pred) * (l[1] - pred);
        ss_tot += (l[1] - mean) * (l[1] - mean);
    }
    fit.r_squared = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 1.0;
    return fit;
}

double fit_jackknife_spread(const std::vector<std::array<double, 2>>& table) {
    const double full = fit_power_law(table).slope;
    double spread = 0.0;
    for (size_t i = 0; i < table.size(); ++i) {
        if (table.size() - 1 < 4) break;
        std::vector<std::array<double, 2>> sub;
        for (size_t j = 0; j < table.size(); ++j)
            if (j != i) sub.push_back(table[j]);
        spread = std::max(spread, std::abs(fit_power_law(sub).slope - full));
    }
    return spread;
}

const CycleMeasurement& cycle_measurement(const Params& p, const IntegratorConfig& cfg) {
    struct Key {
        double a, eps, rel;
        bool operator<(const Key& o) const {
            if (a != o.a) return a < o.a;
            if (eps != o.eps) return eps < o.eps;
            return rel < o.rel;
        }
    };
    static std::map<Key, CycleMeasurement> cache;
    const Key key{p.a, p.epsilon, cfg.rel_tol};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    CycleMeasurement m;
    try {
        LimitCycle c = fixed_point(p, cfg);
        m.ok = true;
        m.rho_eps = c.rho_eps;
        m.closure_gap = c.closure_gap;
        m.min_r = c.min_r;
        m.fold_deviation = c.sigma3_deviation;
        m.iterations = c.iterations;
        m.dwell = dwell_times(c);
    } catch (const Error& e) {
        m.ok = false;
        m.error = e.what();
    }
    return cache.emplace(key, std::move(m)).first->second;
}

namespace {

double s2_residual(const Params& p, const IntegratorConfig& cfg) {
    const double lo = p.theta_star() + 0.2, hi = kHalfPi - 0.2;
    SlowManifoldResult sm = extract_slow_manifold(SlowBranch::S2, lo, hi, p, cfg);
    double worst = 0.0;
    for (const auto& pt : sm.curve.points) {
        const double model = phi0(pt[0], p) + p.epsilon * phi1(pt[0], p);
        worst = std::max(worst, std::abs(pt[1] - model));
    }
    return worst;
}

double s1_theta_offset(const Params& p, const IntegratorConfig& cfg, double r_at) {
    SlowManifoldResult sm =
        extract_slow_manifold(SlowBranch::S1, r_at - 0.1, r_at + 0.1, p, cfg, 21);
    // take the sample closest to r_at
    double best = 1e300, val = 0.0;
    for (const auto& pt : sm.curve.points) {
        if (std::abs(pt[1] - r_at) < best) {
            best = std::abs(pt[1] - r_at);
            val = pt[0] - kQuarterPi;
        }
    }
    return val;
}

} // namespace

std::vector<SweepRow> run_sweep(const SweepPlan& plan) {
    if (plan.grid.empty()) throw DomainError("run_sweep: empty grid");
    for (size_t i = 1; i < plan.grid.size(); ++i)
        if (plan.grid[i] <= plan.grid[i - 1])
            throw DomainError("run_sweep: grid must be strictly increasing");

    std::vector<SweepRow> rows;
    for (double eps : plan.grid) {
        Params p = plan.base;
        p.epsilon = eps;
        SweepRow row;
        row.epsilon = eps;
        try {
            if (plan.quantity == "rho_eps") {
                const auto& m = cycle_measurement(p, plan.config);
                if (!m.ok) throw NotConverged(m.error);
                row.value = m.rho_eps;
            } else if (plan.quantity.rfind("dwell:", 0) == 0) {
                std::stringstream ss(plan.quantity);
                std::string tag, branch, clock;
                std::getline(ss, tag, ':');
                std::getline(ss, branch, ':');
                std::getline(ss, clock, ':');
                const auto& m = cycle_measurement(p, plan.config);
                if (!m.ok) throw NotConverged(m.error);
                if (!m.dwell.count(branch) || !m.dwell.at(branch).count(clock))
                    throw DomainError("run_sweep: unknown dwell branch/clock");
                row.value = m.dwell.at(branch).at(clock);
            } else if (plan.quantity == "fold_deviation") {
                const auto& m = cycle_measurement(p, plan.config);
                if (!m.ok) throw NotConverged(m.error);
                row.value = m.fold_deviation;
            } else if (plan.quantity == "s2_residual") {
                row.value = s2_residual(p, plan.config);
            } else if (plan.quantity == "s1_theta_offset") {
                row.value = s1_theta_offset(p, plan.config, 0.4);
            } else {
                throw DomainError("run_sweep: unknown quantity '" + plan.quantity + "'");
            }
        } catch (const Error& e) {
            row.status = std::string("error: ") + e.what();
            row.value = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(row);
    }
    return rows;
}

namespace {

std::vector<std::array<double, 2>> valid_table(const std::vector<SweepRow>& rows) {
    std::vector<std::array<double, 2>> t;
    for (const auto& r : rows)
        if (r.status == "ok" && std::isfinite(r.value)) t.push_back({r.epsilon, r.value});
    return t;
}

CheckResult slope_check(const std::string& name, const SweepPlan& plan, double lo,
                        double hi, double r2_min = 0.0) {
    CheckResult c;
    c.name = name;
    c.kind = "slope";
    c.lo = lo;
    c.hi = hi;
    c.table = run_sweep(plan);
    auto t = valid_table(c.table);
    if (t.size() < 4) {
        c.pass = false;
        c.value = std::numeric_limits<double>::quiet_NaN();
        return c;
    }
    PowerLawFit fit = fit_power_law(t);
    c.value = fit.slope;
    c.r_squared = fit.r_squared;
    c.pass = fit.slope >= lo && fit.slope <= hi && fit.r_squared >= r2_min;
    return c;
}

CheckResult ratio_check(const std::string& name, const SweepPlan& plan, double max_ratio) {
    CheckResult c;
    c.name = name;
    c.kind = "ratio";
    c.lo = 0.0;
    c.hi = max_ratio;
    c.table = run_sweep(plan);
    auto t = valid_table(c.table);
    if (t.size() < 4) {
        c.pass = false;
        c.value = std::numeric_limits<double>::quiet_NaN();
        return c;
    }
    double vmin = 1e300, vmax = 0.0;
    for (const auto& row : t) {
        vmin = std::min(vmin, row[1]);
        vmax = std::max(vmax, row[1]);
    }
    c.value = vmin > 0.0 ? vmax / vmin : std::numeric_limits<double>::infinity();
    c.pass = c.value <= max_ratio;
    return c;
}

} // namespace

ScalingReport scaling_report(const Params& base, const IntegratorConfig& cfg) {
    ScalingReport rep;
    SweepPlan plan;
    plan.base = base;
    plan.config = cfg;

    auto add = [&](CheckResult c) {
        rep.checks.push_back(std::move(c));
        if (!rep.checks.back().pass) rep.pass = false;
    };

    plan.quantity = "rho_eps";
    {
        CheckResult c = slope_check("rho_eps", plan, 1.35, 1.65, 0.98);
        add(c);
    }
    plan.quantity = "dwell:sigma1:t";
    add(slope_check("dwell_sigma1_t", plan, 2.6, 3.4));
    plan.quantity = "dwell:sigma2:t";
    add(slope_check("dwell_sigma2_t", plan, -1.25, -0.75));
    plan.quantity = "dwell:sigma3:t";
    add(ratio_check("dwell_sigma3_t", plan, 3.0));
    plan.quantity = "dwell:sigma4:t";
    add(slope_check("dwell_sigma4_t", plan, -1.75, -1.25));
    plan.quantity = "dwell:sigma1:t2";
    add(ratio_check("dwell_sigma1_t2", plan, 3.0));
    plan.quantity = "dwell:sigma2:t2";
    add(slope_check("dwell_sigma2_t2", plan, -1.25, -0.75));
    plan.quantity = "dwell:sigma3:t2";
    add(ratio_check("dwell_sigma3_t2", plan, 3.0));
    plan.quantity = "dwell:sigma4:t2";
    add(slope_check("dwell_sigma4_t2", plan, -1.75, -1.25));
    plan.quantity = "s2_residual";
    {
        CheckResult c = slope_check("s2_residual", plan, 1.25, 10.0);
        add(c);
    }
    plan.quantity = "fold_deviation";
    add(slope_check("fold_deviation", plan, 0.5, 0.85));

    // S1 expansion match at r = 0.4 for eps in {0.05, 0.1}, within 25%
    {
        CheckResult c;
        c.name = "s1_expansion_match";
        c.kind = "match";
        c.lo = 0.75;
        c.hi = 1.25;
        c.pass = true;
        double worst = 1.0;
        for (double eps : {0.05, 0.1}) {
            Params p = base;
            p.epsilon = eps;
            SweepRow row;
            row.epsilon = eps;
            try {
                const double measured = s1_theta_offset(p, cfg, 0.4);
                const double model = std::pow(eps, 1.5) * 0.4 / std::sqrt(2.0);
                row.value = measured / model;
                if (row.value < c.lo || row.value > c.hi) c.pass = false;
                if (std::abs(row.value - 1.0) > std::abs(worst - 1.0)) worst = row.value;
            } catch (const Error& e) {
                row.status = std::string("error: ") + e.what();
                c.pass = false;
            }
            c.table.push_back(row);
        }
        c.value = worst;
        add(c);
    }

    // exit image r~1 = Theta(r3 eta3^3): slope vs eta3,0
    {
        CheckResult c;
        c.name = "exit_image";
        c.kind = "slope";
        c.lo = 2.7;
        c.hi = 3.3;
        try {
            AppendixBConstants k = appendix_b_constants(0.2, 0.02, 0.1, 0.3, base);
            auto pts = exit_image_scaling({0.02, 0.04, 0.08, 0.12}, 0.2, 0.1, k, base, cfg);
            std::vector<std::array<double, 2>> t;
            for (const auto& q : pts) {
                c.table.push_back({q.eta30, q.exit_r3, "ok"});
                t.push_back({q.eta30, q.exit_r3});
            }
            PowerLawFit fit = fit_power_law(t);
            c.value = fit.slope;
            c.r_squared = fit.r_squared;
            c.pass = fit.slope >= c.lo && fit.slope <= c.hi;
        } catch (const Error& e) {
            c.pass = false;
            c.table.push_back({0.0, 0.0, std::string("error: ") + e.what()});
        }
        add(c);
    }
    return rep;
}

} // namespace bruss
