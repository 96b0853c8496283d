#include "ropf/envelopes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ropf {

namespace {

constexpr double kPi = std::numbers::pi;

// Tangent pair around a zero crossing of sin at center c. 'down' flips the
// slope sign for the decreasing crossings (centers +/- pi).
void add_tangent_pair(TrigEnvelope& env, double lo, double hi, double c, bool down) {
    double xm = std::max(std::abs(lo - c), std::abs(hi - c));
    double slope = (down ? -1.0 : 1.0) * std::cos(0.5 * xm);
    double off = std::sin(0.5 * xm) - slope * (c + 0.5 * xm * (down ? -1.0 : 1.0));
    // upper: S <= slope * (x - c -/+ xm/2) + sin(xm/2)
    env.rows.push_back({1.0, -slope, Sense::LessEq, off});
    // lower: mirrored tangent
    double off_lo = -std::sin(0.5 * xm) - slope * (c - 0.5 * xm * (down ? -1.0 : 1.0));
    env.rows.push_back({1.0, -slope, Sense::GreaterEq, off_lo});
}

void add_secant(TrigEnvelope& env, double lo, double hi, Sense sense) {
    double slope = (std::sin(lo) - std::sin(hi)) / (lo - hi);
    env.rows.push_back({1.0, -slope, sense, std::sin(lo) - slope * lo});
}

// Quadratic cap centered at the extremum of sin; sign +1 caps from above
// (around a maximum), -1 from below.
void add_quad(TrigEnvelope& env, double lo, double hi, double center, double sign) {
    double xm = std::max(std::abs(lo - center), std::abs(hi - center));
    if (xm == 0.0) return;
    double k = (1.0 - std::cos(xm)) / (xm * xm);
    env.quad = EnvelopeQuad{sign, k, center, 1.0};
}

TrigEnvelope sine_envelope_normalized(double lo, double hi, EnvelopeFallback fallback) {
    TrigEnvelope env;
    env.x_lo = lo;
    env.x_hi = hi;
    if (lo == hi) {
        env.rows.push_back({1.0, 0.0, Sense::Eq, std::sin(lo)});
        return env;
    }
    if (lo >= 0.0 && hi <= kPi) {            // concave segment
        add_quad(env, lo, hi, 0.5 * kPi, 1.0);
        add_secant(env, lo, hi, Sense::GreaterEq);
    } else if (lo >= -kPi && hi <= 0.0) {    // convex segment
        add_quad(env, lo, hi, -0.5 * kPi, -1.0);
        add_secant(env, lo, hi, Sense::LessEq);
    } else if (lo >= -0.5 * kPi && hi <= 0.5 * kPi) {
        add_tangent_pair(env, lo, hi, 0.0, false);
    } else if (lo >= 0.5 * kPi && hi <= 1.5 * kPi) {
        add_tangent_pair(env, lo, hi, kPi, true);
    } else if (lo >= -1.5 * kPi && hi <= -0.5 * kPi) {
        add_tangent_pair(env, lo, hi, -kPi, true);
    } else if (lo >= -2.0 * kPi && hi <= -kPi) {
        add_quad(env, lo, hi, -1.5 * kPi, 1.0);
        add_secant(env, lo, hi, Sense::GreaterEq);
    } else if (lo >= kPi && hi <= 2.0 * kPi) {
        add_quad(env, lo, hi, 1.5 * kPi, -1.0);
        add_secant(env, lo, hi, Sense::LessEq);
    } else if (fallback == EnvelopeFallback::BoxBounds) {
        TrigBounds tb = trig_bounds(lo, hi);
        env.rows.push_back({1.0, 0.0, Sense::LessEq, tb.sin_max});
        env.rows.push_back({1.0, 0.0, Sense::GreaterEq, tb.sin_min});
    } else {
        std::ostringstream os;
        os << "no supported envelope range covers [" << lo << ", " << hi << "] rad";
        throw EnvelopeError(os.str());
    }
    return env;
}

} // namespace

double TrigEnvelope::violation(double x, double f) const {
    double worst = -1e300;
    for (const auto& row : rows) {
        double lhs = row.f_coef * f + row.x_coef * x;
        double v;
        switch (row.sense) {
            case Sense::LessEq: v = lhs - row.rhs; break;
            case Sense::GreaterEq: v = row.rhs - lhs; break;
            default: v = std::abs(lhs - row.rhs); break;
        }
        worst = std::max(worst, v);
    }
    if (quad) {
        double dx = x - quad->x0;
        worst = std::max(worst, quad->f_sign * f + quad->k * dx * dx - quad->r);
    }
    return worst;
}

TrigEnvelope sine_envelope(double x_lo, double x_hi, EnvelopeFallback fallback) {
    if (x_lo > x_hi) throw EnvelopeError("sine_envelope: lo > hi");
    if (x_hi - x_lo > 2.0 * kPi) throw EnvelopeError("sine_envelope: range wider than 2*pi");
    double mid = 0.5 * (x_lo + x_hi);
    double shift = 2.0 * kPi * std::round(mid / (2.0 * kPi));
    TrigEnvelope env = sine_envelope_normalized(x_lo - shift, x_hi - shift, fallback);
    env.x_lo = x_lo;
    env.x_hi = x_hi;
    if (shift != 0.0) {
        for (auto& row : env.rows) row.rhs += row.x_coef * shift;
        if (env.quad) env.quad->x0 += shift;
    }
    return env;
}

TrigEnvelope cosine_envelope(double x_lo, double x_hi, EnvelopeFallback fallback) {
    // cos(x) = sin(x + pi/2): build the sine envelope on the shifted interval
    // and substitute back.
    TrigEnvelope env = sine_envelope(x_lo + 0.5 * kPi, x_hi + 0.5 * kPi, fallback);
    env.x_lo = x_lo;
    env.x_hi = x_hi;
    for (auto& row : env.rows) row.rhs -= row.x_coef * 0.5 * kPi;
    if (env.quad) env.quad->x0 -= 0.5 * kPi;
    return env;
}

SquareEnvelope square_envelope(double x_lo, double x_hi) {
    if (x_lo > x_hi) throw EnvelopeError("square_envelope: lo > hi");
    SquareEnvelope env;
    env.x_lo = x_lo;
    env.x_hi = x_hi;
    env.secant_slope = x_lo + x_hi;
    env.secant_offset = -x_lo * x_hi;
    return env;
}

TrigBounds trig_bounds(double x_lo, double x_hi) {
    if (x_lo > x_hi) throw EnvelopeError("trig_bounds: lo > hi");
    if (x_hi - x_lo > 2.0 * kPi) throw EnvelopeError("trig_bounds: range wider than 2*pi");
    TrigBounds tb;
    auto scan = [&](auto fn, double crit_offset, double& mn, double& mx) {
        mn = std::min(fn(x_lo), fn(x_hi));
        mx = std::max(fn(x_lo), fn(x_hi));
        // critical points crit_offset + k*pi
        long k0 = static_cast<long>(std::floor((x_lo - crit_offset) / kPi)) - 1;
        long k1 = static_cast<long>(std::ceil((x_hi - crit_offset) / kPi)) + 1;
        for (long k = k0; k <= k1; ++k) {
            double xc = crit_offset + static_cast<double>(k) * kPi;
            if (xc >= x_lo && xc <= x_hi) {
                mn = std::min(mn, fn(xc));
                mx = std::max(mx, fn(xc));
            }
        }
    };
    scan([](double x) { return std::sin(x); }, 0.5 * kPi, tb.sin_min, tb.sin_max);
    scan([](double x) { return std::cos(x); }, 0.0, tb.cos_min, tb.cos_max);
    return tb;
}

DominanceVerdict dominance_test(double theta_lo, double theta_hi, double delta) {
    if (!(theta_lo < theta_hi))
        throw std::invalid_argument("dominance_test requires theta_lo < theta_hi");
    DominanceVerdict out;
    double chi = std::cos(theta_hi - delta), clo = std::cos(theta_lo - delta);
    double slope = (chi - clo) / (theta_hi - theta_lo);

    double mid = 0.5 * (theta_lo + theta_hi);
    out.f_mid = std::cos(mid - delta) - chi - slope * (mid - theta_hi);

    if (std::abs(slope) > 1.0) {
        out.reason = "secant slope magnitude exceeds 1; derivative has no zeros";
        return out;
    }
    // zeros of F': theta = delta + (-1)^kappa * asin(-slope) + pi*kappa
    double a = std::asin(-slope);
    int count = 0;
    long k0 = static_cast<long>(std::floor((theta_lo - delta) / kPi)) - 2;
    long k1 = static_cast<long>(std::ceil((theta_hi - delta) / kPi)) + 2;
    for (long k = k0; k <= k1; ++k) {
        double sgn = (k % 2 == 0) ? 1.0 : -1.0;
        double z = delta + sgn * a + static_cast<double>(k) * kPi;
        if (z > theta_lo && z < theta_hi) ++count;
    }
    out.critical_points = count;
    if (count == 1 && out.f_mid > 0.0) {
        out.verdict = Dominance::LowerBoundaryTighter;
    } else if (count == 1 && out.f_mid < 0.0) {
        out.verdict = Dominance::UpperBoundaryTighter;
    } else {
        std::ostringstream os;
        os << "conditions not met: " << count << " interior critical points, F(mid)=" << out.f_mid;
        out.reason = os.str();
    }
    return out;
}

} // namespace ropf
