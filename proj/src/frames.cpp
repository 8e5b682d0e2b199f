#include "bruss/frames.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace bruss {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kQuarterPi = kPi / 4.0;
constexpr double kHalfPi = kPi / 2.0;
// admissibility slack around the angular range; events and RK stages may
// probe slightly past the boundaries
constexpr double kSlack = 0.05;

void require(bool ok, const char* msg) {
    if (!ok) throw DomainError(msg);
}

void check_admissible(const FrameState& s, const Params& p) {
    for (int i = 0; i < s.dim(); ++i)
        require(std::isfinite(s[i]), "state has non-finite coordinate");
    switch (s.frame) {
        case FrameId::XY:
            require(s[0] > -kSlack && s[1] > -kSlack, "XY state outside R+^2");
            break;
        case FrameId::XYSlow:
        case FrameId::XYFast:
            break;
        case FrameId::Polar:
            require(s[1] > 0.0, "Polar state requires r > 0");
            require(s[0] > kQuarterPi - kSlack && s[0] < kHalfPi + kSlack,
                    "Polar theta outside [pi/4, pi/2]");
            break;
        case FrameId::Compact:
        case FrameId::Rescaled:
            require(s[1] >= -1e-12, "radius must be nonnegative");
            require(s[0] > kQuarterPi - kSlack && s[0] < kHalfPi + kSlack,
                    "theta outside [pi/4, pi/2]");
            break;
        case FrameId::Omega:
            require(s[1] >= -1e-12, "radius must be nonnegative");
            require(s[0] > -kSlack && s[0] < kQuarterPi + kSlack,
                    "omega outside [0, pi/4]");
            break;
        case FrameId::K1:
        case FrameId::K2:
        case FrameId::K3:
            require(s[0] >= -1e-12 && s[1] >= -1e-12 && s[2] >= -1e-12,
                    "chart coordinates must be nonnegative");
            break;
    }
    (void)p;
}

} // namespace

int dimension(FrameId f) {
    switch (f) {
        case FrameId::K1:
        case FrameId::K2:
        case FrameId::K3:
            return 3;
        default:
            return 2;
    }
}

ClockId clock_of(FrameId f) {
    switch (f) {
        case FrameId::XY:
        case FrameId::XYSlow:
            return ClockId::Tau;
        case FrameId::XYFast:
        case FrameId::Polar:
            return ClockId::T;
        case FrameId::Compact:
            return ClockId::T1;
        case FrameId::Rescaled:
        case FrameId::Omega:
            return ClockId::T2;
        case FrameId::K1:
            return ClockId::Chart1;
        case FrameId::K2:
            return ClockId::Chart2;
        case FrameId::K3:
            return ClockId::Chart3;
    }
    return ClockId::T2;
}

const char* frame_name(FrameId f) {
    switch (f) {
        case FrameId::XY: return "xy";
        case FrameId::XYSlow: return "xyslow";
        case FrameId::XYFast: return "xyfast";
        case FrameId::Polar: return "polar";
        case FrameId::Compact: return "compact";
        case FrameId::Rescaled: return "rescaled";
        case FrameId::Omega: return "omega";
        case FrameId::K1: return "k1";
        case FrameId::K2: return "k2";
        case FrameId::K3: return "k3";
    }
    return "?";
}

const char* clock_name(ClockId c) {
    switch (c) {
        case ClockId::Tau: return "tau";
        case ClockId::T: return "t";
        case ClockId::T1: return "t1";
        case ClockId::T2: return "t2";
        case ClockId::Tau2: return "tau2";
        case ClockId::Chart1: return "chart1";
        case ClockId::Chart2: return "chart2";
        case ClockId::Chart3: return "chart3";
    }
    return "?";
}

bool parse_frame(const std::string& s, FrameId& out) {
    std::string t;
    for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    for (FrameId f : {FrameId::XY, FrameId::XYSlow, FrameId::XYFast, FrameId::Polar,
                      FrameId::Compact, FrameId::Rescaled, FrameId::Omega, FrameId::K1,
                      FrameId::K2, FrameId::K3}) {
        if (t == frame_name(f)) {
            out = f;
            return true;
        }
    }
    return false;
}

double taylor_h(double u) {
    if (std::abs(u) >= 0.1)
        throw DomainError("taylor_h: |u| must be < 0.1 (remainder bound)");
    const double u2 = u * u;
    return 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
}

double pfunc(double theta, double r, const Params& p) {
    return p.a * r * r - std::cos(theta) * (std::sin(theta) - std::cos(theta));
}

Vec3 eval_vector_field(const FrameState& st, const Params& p) {
    p.validate();
    check_admissible(st, p);
    const double a = p.a;
    const double eps = p.epsilon;
    Vec3 out{0.0, 0.0, 0.0};

    switch (st.frame) {
        case FrameId::XY: {
            const double b = p.b();
            const double X = st[0], Y = st[1];
            out[0] = a - (1.0 + b) * X + X * X * Y;
            out[1] = b * X - X * X * Y;
            break;
        }
        case FrameId::XYSlow: {
            require(eps > 0.0, "XYSlow field requires epsilon > 0");
            const double x = st[0], y = st[1], d = y - x;
            out[0] = (a * d - eps * x * d * d) / eps;
            out[1] = a - d;
            break;
        }
        case FrameId::XYFast: {
            const double x = st[0], y = st[1], d = y - x;
            out[0] = a * d - eps * x * d * d;
            out[1] = eps * (a - d);
            break;
        }
        case FrameId::Polar: {
            const double th = st[0], r = st[1];
            const double s = std::sin(th), c = std::cos(th), sc = s - c;
            out[0] = -a * s * sc +
                     eps * (s * c * sc * sc / (r * r) - c * sc + a * r * c);
            out[1] = -a * r * c * sc +
                     eps * (c * c * sc * sc / r + r * s * sc - a * r * r * s);
            break;
        }
        case FrameId::Compact: {
            const double th = st[0], r = st[1];
            const double s = std::sin(th), c = std::cos(th), sc = s - c;
            const double r2 = r * r, r3 = r2 * r, r4 = r3 * r;
            out[0] = -a * r2 * s * sc +
                     eps * (s * c * sc * sc - r2 * c * sc + a * r3 * c);
            out[1] = -a * r3 * c * sc +
                     eps * (r * c * c * sc * sc + r3 * s * sc - a * r4 * s);
            break;
        }
        case FrameId::Rescaled: {
            const double th = st[0], r = st[1];
            const double s = std::sin(th), c = std::cos(th), sc = s - c;
            const double se = std::sqrt(std::max(eps, 0.0));
            const double r2 = r * r, r3 = r2 * r, r4 = r3 * r;
            const double g1 = -r2 * c * sc + se * a * r3 * c;
            const double g2 = r3 * s * sc - se * a * r4 * s;
            out[0] = -a * r2 * s * sc + s * c * sc * sc + eps * g1;
            out[1] = -a * r3 * c * sc + r * c * c * sc * sc + eps * g2;
            break;
        }
        case FrameId::Omega: {
            const double w = st[0], r = st[1];
            const double s = std::sin(w), c = std::cos(w);
            const double sp = s + c, sm = c - s;  // sin/cos of theta up to 1/sqrt2
            const double e2 = eps, e3 = eps * std::sqrt(std::max(eps, 0.0));
            const double r2 = r * r, r3 = r2 * r, r4 = r3 * r;
            out[0] = -a * r2 * s * sp + s * s * sp * sm +
                     e2 * (-r2 * s * sm) + e3 * (a / std::sqrt(2.0)) * r3 * sm;
            out[1] = -a * r3 * s * sm + r * s * s * sm * sm +
                     e2 * r3 * s * sp - e3 * (a / std::sqrt(2.0)) * r4 * sp;
            break;
        }
        case FrameId::K1: {
            const double w = st[0], eta = st[1], e = st[2];
            const double u = std::pow(eta, 6) * w;
            const double H = taylor_h(u);
            const double s = std::sin(u), c = std::cos(u);
            const double sp = s + c, sm = c - s;
            const double e3 = e * e * e, eta2 = eta * eta, eta6 = std::pow(eta, 6);
            const double gfun = -a * w * H * sp + w * w * H * H * sp * sm -
                                eta2 * w * e * e * H * sm +
                                (a / std::sqrt(2.0)) * e3 * sm;
            const double hfun = -a * w * H * sm + w * w * H * H * sm * sm +
                                eta2 * w * e * e * H * sp -
                                (a / std::sqrt(2.0)) * e3 * sp;
            out[0] = gfun - 2.0 * w * eta6 * hfun;
            out[1] = eta6 * eta / 3.0 * hfun;
            out[2] = -e * eta6 / 3.0 * hfun;
            break;
        }
        case FrameId::K2: {
            const double w = st[0], r = st[1], eta = st[2];
            const double eta6 = std::pow(eta, 6);
            const double u = eta6 * w;
            const double H = taylor_h(u);
            const double s = std::sin(u), c = std::cos(u);
            const double sp = s + c, sm = c - s;
            const double r2 = r * r, r3 = r2 * r;
            out[0] = -a * r2 * w * H * sp + w * w * H * H * sp * sm +
                     (a / std::sqrt(2.0)) * r3 * sm - eta * eta * r2 * w * H * sm;
            out[1] = eta6 * r *
                     (-a * r2 * w * H * sm + w * w * H * H * sm * sm +
                      eta * eta * r2 * w * H * sp - (a / std::sqrt(2.0)) * r3 * sp);
            out[2] = 0.0;
            break;
        }
        case FrameId::K3: {
            const double eta = st[0], r = st[1], e = st[2];
            const double u = std::pow(eta, 6);
            const double H = taylor_h(u);
            const double s = std::sin(u), c = std::cos(u);
            const double sp = s + c, sm = c - s;
            const double r2 = r * r, r3 = r2 * r, e3 = e * e * e;
            const double A = -a * r2 * H * sp + H * H * sp * sm +
                             (a / std::sqrt(2.0)) * e3 * r3 * sm -
                             eta * eta * e * e * r2 * H * sm;
            const double B = r * (-a * r2 * H * sm + H * H * sm * sm +
                                  eta * eta * e * e * r2 * H * sp) -
                             (a / std::sqrt(2.0)) * e3 * r3 * r * sp;
            out[0] = eta / 6.0 * A;
            out[1] = -r / 2.0 * A + u * B;
            out[2] = -e / 6.0 * A;
            break;
        }
    }
    return out;
}

namespace {

int backbone_index(FrameId f) {
    switch (f) {
        case FrameId::XY: return 0;
        case FrameId::XYSlow: return 1;
        case FrameId::XYFast: return 2;
        case FrameId::Polar: return 3;
        case FrameId::Compact: return 4;
        case FrameId::Rescaled: return 5;
        case FrameId::Omega: return 6;
        default: return -1;  // charts
    }
}

FrameState step_up(const FrameState& s, const Params& p) {
    // one step away from XY along the backbone
    switch (s.frame) {
        case FrameId::XY:
            return {FrameId::XYSlow, s[1], s[0] + s[1]};
        case FrameId::XYSlow:
            return {FrameId::XYFast, s[0], s[1]};
        case FrameId::XYFast: {
            const double x = s[0], y = s[1];
            const double n = std::hypot(x, y);
            if (n <= 0.0) throw SingularTransform("polar transform at origin");
            return {FrameId::Polar, std::atan2(y, x), 1.0 / n};
        }
        case FrameId::Polar:
            return {FrameId::Compact, s[0], s[1]};
        case FrameId::Compact: {
            if (p.epsilon <= 0.0)
                throw SingularTransform("Compact->Rescaled requires epsilon > 0");
            return {FrameId::Rescaled, s[0], s[1] / p.sqrt_eps()};
        }
        case FrameId::Rescaled:
            return {FrameId::Omega, s[0] - kQuarterPi, s[1]};
        default:
            throw SingularTransform("step_up: not a backbone frame");
    }
}

FrameState step_down(const FrameState& s, const Params& p) {
    switch (s.frame) {
        case FrameId::XYSlow:
            return {FrameId::XY, s[1] - s[0], s[0]};
        case FrameId::XYFast:
            return {FrameId::XYSlow, s[0], s[1]};
        case FrameId::Polar: {
            if (s[1] <= 0.0) throw SingularTransform("Polar->XYFast requires r > 0");
            return {FrameId::XYFast, std::cos(s[0]) / s[1], std::sin(s[0]) / s[1]};
        }
        case FrameId::Compact:
            return {FrameId::Polar, s[0], s[1]};
        case FrameId::Rescaled: {
            if (p.epsilon <= 0.0)
                throw SingularTransform("Rescaled->Compact requires epsilon > 0");
            return {FrameId::Compact, s[0], s[1] * p.sqrt_eps()};
        }
        case FrameId::Omega:
            return {FrameId::Rescaled, s[0] + kQuarterPi, s[1]};
        default:
            throw SingularTransform("step_down: not a backbone frame");
    }
}

FrameState omega_to_chart(const FrameState& s, FrameId chart, const Params& p) {
    const double w = s[0], r = s[1];
    const double ep = p.sqrt_eps();
    switch (chart) {
        case FrameId::K1: {
            if (r <= 0.0) throw SingularTransform("Omega->K1 requires rbar > 0");
            const double eta = std::cbrt(r);
            return {FrameId::K1, w / (r * r), eta, ep / eta};
        }
        case FrameId::K2: {
            if (ep <= 0.0) throw SingularTransform("Omega->K2 requires epsilon > 0");
            const double ep3 = ep * ep * ep;
            return {FrameId::K2, w / (ep3 * ep3), r / ep3, ep};
        }
        case FrameId::K3: {
            if (w <= 0.0) throw SingularTransform("Omega->K3 requires omega > 0");
            const double eta = std::pow(w, 1.0 / 6.0);
            return {FrameId::K3, eta, r / std::sqrt(w), ep / eta};
        }
        default:
            throw SingularTransform("omega_to_chart: bad target");
    }
}

FrameState chart_to_omega(const FrameState& s) {
    switch (s.frame) {
        case FrameId::K1: {
            const double eta3 = s[1] * s[1] * s[1];
            return {FrameId::Omega, std::pow(s[1], 6) * s[0], eta3};
        }
        case FrameId::K2: {
            const double eta3 = s[2] * s[2] * s[2];
            return {FrameId::Omega, std::pow(s[2], 6) * s[0], eta3 * s[1]};
        }
        case FrameId::K3: {
            const double eta3 = s[0] * s[0] * s[0];
            return {FrameId::Omega, std::pow(s[0], 6), eta3 * s[1]};
        }
        default:
            throw SingularTransform("chart_to_omega: not a chart state");
    }
}

// eq:coordsChange_second and inverses
FrameState t12(const FrameState& s) {
    const double w1 = s[0], eta1 = s[1], e1 = s[2];
    if (e1 <= 0.0) throw SingularTransform("T12 requires eps1 > 0");
    const double e1c = e1 * e1 * e1;
    return {FrameId::K2, w1 / (e1c * e1c), 1.0 / e1c, eta1 * e1};
}
FrameState t12_inv(const FrameState& s) {
    const double w2 = s[0], r2 = s[1], eta2 = s[2];
    if (r2 <= 0.0) throw SingularTransform("T12 inverse requires r2 > 0");
    const double e1 = 1.0 / std::cbrt(r2);
    return {FrameId::K1, w2 / (r2 * r2), eta2 / e1, e1};
}
FrameState t23(const FrameState& s) {
    const double w2 = s[0], r2 = s[1], eta2 = s[2];
    if (w2 <= 0.0) throw SingularTransform("T23 requires omega2 > 0");
    const double w16 = std::pow(w2, 1.0 / 6.0);
    return {FrameId::K3, eta2 * w16, r2 / std::sqrt(w2), 1.0 / w16};
}
FrameState t23_inv(const FrameState& s) {
    const double eta3 = s[0], r3 = s[1], e3 = s[2];
    if (e3 <= 0.0) throw SingularTransform("T23 inverse requires eps3 > 0");
    const double e3c = e3 * e3 * e3;
    return {FrameId::K2, 1.0 / (e3c * e3c), r3 / e3c, eta3 * e3};
}

FrameState chart_to_chart(const FrameState& s, FrameId target) {
    if (s.frame == FrameId::K1 && target == FrameId::K2) return t12(s);
    if (s.frame == FrameId::K2 && target == FrameId::K1) return t12_inv(s);
    if (s.frame == FrameId::K2 && target == FrameId::K3) return t23(s);
    if (s.frame == FrameId::K3 && target == FrameId::K2) return t23_inv(s);
    if (s.frame == FrameId::K1 && target == FrameId::K3) return t23(t12(s));
    if (s.frame == FrameId::K3 && target == FrameId::K1) return t12_inv(t23_inv(s));
    throw SingularTransform("chart_to_chart: bad pair");
}

} // namespace

FrameState transform_state(const FrameState& s, FrameId target, const Params& p) {
    p.validate();
    if (s.frame == target) return s;
    const bool src_chart = backbone_index(s.frame) < 0;
    const bool tgt_chart = backbone_index(target) < 0;
    if (src_chart && tgt_chart) return chart_to_chart(s, target);
    if (src_chart) {
        FrameState w = chart_to_omega(s);
        return transform_state(w, target, p);
    }
    if (tgt_chart) {
        FrameState w = transform_state(s, FrameId::Omega, p);
        return omega_to_chart(w, target, p);
    }
    FrameState cur = s;
    const int from = backbone_index(s.frame), to = backbone_index(target);
    while (backbone_index(cur.frame) < to) cur = step_up(cur, p);
    while (backbone_index(cur.frame) > to) cur = step_down(cur, p);
    (void)from;
    return cur;
}

namespace {

// elementary adjacent-clock rates; composition along the chain is exact
struct ClockChain {
    // positions along tau - t - t1 - t2; tau2 and charts hang off t2
    static int pos(ClockId c) {
        switch (c) {
            case ClockId::Tau: return 0;
            case ClockId::T: return 1;
            case ClockId::T1: return 2;
            default: return 3;
        }
    }
};

double polar_radius(const FrameState& s, const Params& p) {
    switch (s.frame) {
        case FrameId::Polar:
        case FrameId::Compact:
            return s[1];
        case FrameId::XY:
        case FrameId::XYSlow:
        case FrameId::XYFast: {
            FrameState f = transform_state(s, FrameId::XYFast, p);
            return 1.0 / std::hypot(f[0], f[1]);
        }
        default: {
            // rescaled-like frames: r = sqrt(eps) rbar
            FrameState r = transform_state(s, FrameId::Rescaled, p);
            return p.sqrt_eps() * r[1];
        }
    }
}

double chart_eta(const FrameState& s, ClockId chart_clock, const Params& p) {
    FrameId chart = chart_clock == ClockId::Chart1   ? FrameId::K1
                    : chart_clock == ClockId::Chart2 ? FrameId::K2
                                                     : FrameId::K3;
    FrameState c = s.frame == chart ? s : transform_state(s, chart, p);
    return chart == FrameId::K1 ? c[1] : (chart == FrameId::K2 ? c[2] : c[0]);
}

} // namespace

double clock_rate(const FrameState& s, ClockId source, ClockId target, const Params& p) {
    p.validate();
    if (source == target) return 1.0;

    // factor to move one edge along tau - t - t1 - t2, and the t2-anchored
    // legs for tau2 and the chart clocks
    auto edge_up = [&](ClockId from) -> double {
        // rate d(next)/d(from)
        switch (from) {
            case ClockId::Tau:
                if (p.epsilon <= 0.0) throw UndefinedRate("d t/d tau undefined at eps=0");
                return 1.0 / p.epsilon;  // t
            case ClockId::T: {
                const double r = polar_radius(s, p);
                if (r <= 0.0) throw UndefinedRate("d t1/d t undefined at r=0");
                return 1.0 / (r * r);  // t1
            }
            case ClockId::T1:
                return p.epsilon;  // t2
            default:
                throw UndefinedRate("bad chain edge");
        }
    };
    auto edge_down = [&](ClockId from) -> double {
        switch (from) {
            case ClockId::T:
                return p.epsilon;  // tau
            case ClockId::T1: {
                const double r = polar_radius(s, p);
                if (r <= 0.0) throw UndefinedRate("d t/d t1 undefined at r=0");
                return r * r;  // t
            }
            case ClockId::T2:
                if (p.epsilon <= 0.0) throw UndefinedRate("d t1/d t2 undefined at eps=0");
                return 1.0 / p.epsilon;  // t1
            default:
                throw UndefinedRate("bad chain edge");
        }
    };
    auto leg_from_t2 = [&](ClockId c) -> double {
        // rate d(c)/d(t2) for the clocks hanging off t2
        switch (c) {
            case ClockId::T2:
                return 1.0;
            case ClockId::Tau2:
                return p.epsilon;
            case ClockId::Chart1:
            case ClockId::Chart2:
            case ClockId::Chart3: {
                const double eta = chart_eta(s, c, p);
                if (eta <= 0.0) throw UndefinedRate("chart clock rate undefined at eta=0");
                return std::pow(eta, 6);
            }
            default:
                return 0.0;  // unreachable
        }
    };

    const bool src_leg = ClockChain::pos(source) == 3 && source != ClockId::T2;
    const bool tgt_leg = ClockChain::pos(target) == 3 && target != ClockId::T2;

    double rate = 1.0;
    ClockId cur = source;
    if (src_leg) {
        rate /= leg_from_t2(source);
        cur = ClockId::T2;
    }
    ClockId goal = tgt_leg ? ClockId::T2 : target;
    while (ClockChain::pos(cur) < ClockChain::pos(goal)) {
        rate *= edge_up(cur);
        cur = cur == ClockId::Tau ? ClockId::T : (cur == ClockId::T ? ClockId::T1 : ClockId::T2);
    }
    while (ClockChain::pos(cur) > ClockChain::pos(goal)) {
        rate *= edge_down(cur);
        cur = cur == ClockId::T2 ? ClockId::T1 : (cur == ClockId::T1 ? ClockId::T : ClockId::Tau);
    }
    if (tgt_leg) rate *= leg_from_t2(target);
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw UndefinedRate("degenerate clock rate");
    return rate;
}

Factorization factorization_parts(const FrameState& s, const Params& p) {
    if (s.frame != FrameId::Rescaled)
        throw DomainError("factorization_parts: state must be in the Rescaled frame");
    check_admissible(s, p);
    const double th = s[0], r = s[1], a = p.a;
    const double sn = std::sin(th), cs = std::cos(th), sc = sn - cs;
    const double se = p.sqrt_eps();
    Factorization F;
    F.N = {-sn, -r * cs, 0.0};
    F.f = sc * pfunc(th, r, p);
    F.G = {-r * r * cs * sc + se * a * r * r * r * cs,
           r * r * r * sn * sc - se * a * r * r * r * r * sn, 0.0};
    return F;
}

Mat3 jacobian(const FrameState& s, const Params& p) {
    Mat3 J;
    J.n = s.dim();
    for (int j = 0; j < J.n; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(s[j]));
        FrameState sp = s, sm = s;
        sp[j] += h;
        sm[j] -= h;
        const Vec3 fp = eval_vector_field(sp, p);
        const Vec3 fm = eval_vector_field(sm, p);
        for (int i = 0; i < J.n; ++i)
            J.m[i][j] = (fp[static_cast<size_t>(i)] - fm[static_cast<size_t>(i)]) / (2.0 * h);
    }
    return J;
}

std::array<double, 2> eigenvalues_2x2(const Mat3& J) {
    const double tr = J.m[0][0] + J.m[1][1];
    const double det = J.m[0][0] * J.m[1][1] - J.m[0][1] * J.m[1][0];
    const double disc = tr * tr / 4.0 - det;
    if (disc >= 0.0) {
        const double rt = std::sqrt(disc);
        return {tr / 2.0 - rt, tr / 2.0 + rt};
    }
    return {tr / 2.0, tr / 2.0};
}

} // namespace bruss
