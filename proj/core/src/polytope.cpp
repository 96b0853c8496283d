#include "ropf/polytope.hpp"

#include <cmath>

namespace ropf {

namespace {

constexpr double kDedupTol = 1e-9;

// Sutherland-Hodgman clip of a convex polygon against a*c + b*s <= rhs.
std::vector<Point2> clip_half_plane(const std::vector<Point2>& poly, double a, double b,
                                    double rhs) {
    std::vector<Point2> out;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Point2& p = poly[i];
        const Point2& q = poly[(i + 1) % n];
        double dp = a * p.c + b * p.s - rhs;
        double dq = a * q.c + b * q.s - rhs;
        bool pin = dp <= 0.0, qin = dq <= 0.0;
        if (pin) out.push_back(p);
        if (pin != qin) {
            double t = dp / (dp - dq);
            out.push_back({p.c + t * (q.c - p.c), p.s + t * (q.s - p.s)});
        }
    }
    return out;
}

std::vector<Point2> dedup(const std::vector<Point2>& poly) {
    std::vector<Point2> out;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Point2& p = poly[i];
        const Point2& prev = out.empty() ? poly[n - 1] : out.back();
        if (out.empty() ||
            std::abs(p.c - prev.c) > kDedupTol || std::abs(p.s - prev.s) > kDedupTol)
            out.push_back(p);
    }
    while (out.size() > 1 && std::abs(out.front().c - out.back().c) <= kDedupTol &&
           std::abs(out.front().s - out.back().s) <= kDedupTol)
        out.pop_back();
    return out;
}

} // namespace

TrigBox box_from_bounds(const TrigBounds& tb) {
    return {tb.cos_min, tb.cos_max, tb.sin_min, tb.sin_max};
}

TrigPolytope intersect_trig_polytopes(const TrigBox& sending, const TrigBox& receiving,
                                      const TerminalRelation& relation) {
    if (sending.c_lo > sending.c_hi || sending.s_lo > sending.s_hi ||
        receiving.c_lo > receiving.c_hi || receiving.s_lo > receiving.s_hi)
        throw EnvelopeError("intersect_trig_polytopes: empty input box");

    // counterclockwise sending box
    std::vector<Point2> poly = {{sending.c_lo, sending.s_lo},
                                {sending.c_hi, sending.s_lo},
                                {sending.c_hi, sending.s_hi},
                                {sending.c_lo, sending.s_hi}};
    double a = relation.alpha, b = relation.beta;
    struct HalfPlane {
        double ac, as, rhs;
    };
    const HalfPlane planes[] = {
        {a, -b, receiving.c_hi},  {-a, b, -receiving.c_lo},
        {b, a, receiving.s_hi},   {-b, -a, -receiving.s_lo},
    };
    for (const auto& hp : planes) {
        poly = clip_half_plane(poly, hp.ac, hp.as, hp.rhs);
        if (poly.empty())
            throw EnvelopeError(
                "intersect_trig_polytopes: empty intersection (inconsistent angle bounds)");
    }
    poly = dedup(poly);
    if (poly.empty())
        throw EnvelopeError(
            "intersect_trig_polytopes: empty intersection (inconsistent angle bounds)");
    TrigPolytope out;
    out.vertices = std::move(poly);
    out.sending = sending;
    out.receiving = receiving;
    return out;
}

} // namespace ropf
