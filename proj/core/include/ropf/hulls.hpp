// hulls.hpp - extreme-point hulls of trilinear/quadrilinear monomials and the
// linking row tying the two trilinear weight vectors together
#pragma once

#include <vector>

#include "ropf/envelopes.hpp"
#include "ropf/polytope.hpp"

namespace ropf {

struct Interval {
    double lo = 0.0, hi = 0.0;
};

// coefficients over program variable ids; sense lhs (sense) rhs
struct AffineConstraint {
    std::vector<std::pair<int, double>> terms;
    Sense sense = Sense::Eq;
    double rhs = 0.0;
};

struct ExtremePointHull {
    std::vector<std::vector<double>> points; // coordinate tuples, one per weight
    std::vector<int> weight_vars;            // simplex weights, same order
    std::vector<int> coord_vars;             // recovered coordinates
    std::vector<int> product_vars;
    std::vector<AffineConstraint> rows;      // product + recovery + simplex rows
};

// Hull of p = V_l * V_m * T over a box. Extreme points are ordered
// lexicographically in (V_l, V_m, T) with the low bound before the high one,
// so weights pair up into four fixed (V_l, V_m) corner groups.
ExtremePointHull trilinear_hull(Interval v_l, Interval v_m, Interval t,
                                int var_vl, int var_vm, int var_t, int var_p,
                                const std::vector<int>& weight_vars);

// The single equality coupling the cosine-hull weights (lambda) with the
// sine-hull weights (gamma) through the four voltage corner products.
AffineConstraint linking_constraint(const std::vector<int>& lambda_vars,
                                    const std::vector<int>& gamma_vars,
                                    Interval v_l, Interval v_m);

// Shared hull of c = V_l*V_m*C and s = V_l*V_m*S with (C, S) ranging over the
// vertices of the intersection polytope; 4*N extreme points.
ExtremePointHull quadrilinear_hull(Interval v_l, Interval v_m, const TrigPolytope& polytope,
                                   int var_vl, int var_vm, int var_c_lift, int var_s_lift,
                                   int var_c_prod, int var_s_prod,
                                   const std::vector<int>& weight_vars);

} // namespace ropf
