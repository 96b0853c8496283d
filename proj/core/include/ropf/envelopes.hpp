// envelopes.hpp - convex envelopes for squares, sines and cosines, plus the
// chord/curve dominance test
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ropf {

struct EnvelopeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Sense { LessEq, GreaterEq, Eq };

// f_coef * f + x_coef * x  (sense)  rhs, where f is the lifted value and x the
// angle.
struct EnvelopeRow {
    double f_coef = 1.0;
    double x_coef = 0.0;
    Sense sense = Sense::LessEq;
    double rhs = 0.0;
};

// f_sign * f + k * (x - x0)^2 <= r  (the quadratic cap of the cosine-style
// envelope; f_sign -1 encodes the reflected lower bound)
struct EnvelopeQuad {
    double f_sign = 1.0;
    double k = 0.0;
    double x0 = 0.0;
    double r = 1.0;
};

enum class EnvelopeFallback { None, BoxBounds };

struct TrigEnvelope {
    double x_lo = 0.0, x_hi = 0.0;
    std::vector<EnvelopeRow> rows;
    std::optional<EnvelopeQuad> quad;

    // largest violation of any constraint at (x, f); <= 0 means inside
    double violation(double x, double f) const;
};

TrigEnvelope sine_envelope(double x_lo, double x_hi,
                           EnvelopeFallback fallback = EnvelopeFallback::None);
TrigEnvelope cosine_envelope(double x_lo, double x_hi,
                             EnvelopeFallback fallback = EnvelopeFallback::None);

struct SquareEnvelope {
    // lower: w >= x^2 (conic); upper secant: w <= secant_slope * x + secant_rhs
    double x_lo = 0.0, x_hi = 0.0;
    double secant_slope = 0.0, secant_offset = 0.0;
};
SquareEnvelope square_envelope(double x_lo, double x_hi);

struct TrigBounds {
    double sin_min = 0.0, sin_max = 0.0;
    double cos_min = 0.0, cos_max = 0.0;
};
// exact extrema of sin/cos over [x_lo, x_hi]; width must be <= 2*pi
TrigBounds trig_bounds(double x_lo, double x_hi);

enum class Dominance { LowerBoundaryTighter, UpperBoundaryTighter, ConditionsNotMet };

struct DominanceVerdict {
    Dominance verdict = Dominance::ConditionsNotMet;
    int critical_points = 0;
    double f_mid = 0.0;
    std::string reason;
};

// Chord/curve test for cos(theta - delta) over [theta_lo, theta_hi].
DominanceVerdict dominance_test(double theta_lo, double theta_hi, double delta);

} // namespace ropf
