// polytope.hpp - intersection of the sending/receiving trig bound boxes in the
// lifted (C, S) plane
#pragma once

#include <vector>

#include "ropf/envelopes.hpp"
#include "ropf/rotation.hpp"

namespace ropf {

struct Point2 {
    double c = 0.0, s = 0.0;
};

// Axis-aligned bounds on the lifted cosine/sine pair.
struct TrigBox {
    double c_lo = -1.0, c_hi = 1.0;
    double s_lo = -1.0, s_hi = 1.0;
};

TrigBox box_from_bounds(const TrigBounds& tb);

struct TrigPolytope {
    std::vector<Point2> vertices; // counterclockwise, deduplicated
    TrigBox sending, receiving;
};

// Clips the sending box against the four half-plane pairs
//   c_lo^r <= alpha*C - beta*S <= c_hi^r,  s_lo^r <= beta*C + alpha*S <= s_hi^r
// induced by the receiving box through the terminal relation. Throws
// EnvelopeError when the intersection is empty.
TrigPolytope intersect_trig_polytopes(const TrigBox& sending, const TrigBox& receiving,
                                      const TerminalRelation& relation);

} // namespace ropf
