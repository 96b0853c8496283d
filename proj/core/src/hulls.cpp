#include "ropf/hulls.hpp"

#include <stdexcept>

namespace ropf {

namespace {

// row: var = sum_k coef_k * lambda_k
AffineConstraint recovery_row(int var, const std::vector<int>& weights,
                              const std::vector<double>& coefs) {
    AffineConstraint row;
    row.terms.reserve(weights.size() + 1);
    row.terms.emplace_back(var, -1.0);
    for (size_t k = 0; k < weights.size(); ++k) row.terms.emplace_back(weights[k], coefs[k]);
    row.sense = Sense::Eq;
    row.rhs = 0.0;
    return row;
}

AffineConstraint simplex_row(const std::vector<int>& weights) {
    AffineConstraint row;
    for (int w : weights) row.terms.emplace_back(w, 1.0);
    row.sense = Sense::Eq;
    row.rhs = 1.0;
    return row;
}

} // namespace

ExtremePointHull trilinear_hull(Interval v_l, Interval v_m, Interval t,
                                int var_vl, int var_vm, int var_t, int var_p,
                                const std::vector<int>& weight_vars) {
    if (weight_vars.size() != 8)
        throw std::invalid_argument("trilinear_hull expects 8 weight variables");
    ExtremePointHull hull;
    hull.weight_vars = weight_vars;
    hull.coord_vars = {var_vl, var_vm, var_t};
    hull.product_vars = {var_p};
    const double a[2] = {v_l.lo, v_l.hi};
    const double b[2] = {v_m.lo, v_m.hi};
    const double c[2] = {t.lo, t.hi};
    std::vector<double> prod, c1, c2, c3;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                hull.points.push_back({a[i], b[j], c[k]});
                c1.push_back(a[i]);
                c2.push_back(b[j]);
                c3.push_back(c[k]);
                prod.push_back(a[i] * b[j] * c[k]);
            }
    hull.rows.push_back(recovery_row(var_p, weight_vars, prod));
    hull.rows.push_back(recovery_row(var_vl, weight_vars, c1));
    hull.rows.push_back(recovery_row(var_vm, weight_vars, c2));
    hull.rows.push_back(recovery_row(var_t, weight_vars, c3));
    hull.rows.push_back(simplex_row(weight_vars));
    return hull;
}

AffineConstraint linking_constraint(const std::vector<int>& lambda_vars,
                                    const std::vector<int>& gamma_vars,
                                    Interval v_l, Interval v_m) {
    if (lambda_vars.size() != 8 || gamma_vars.size() != 8)
        throw std::invalid_argument("linking_constraint expects 8 weights per hull");
    // corner products in the same lexicographic (V_l, V_m) order as the hull
    const double w[4] = {v_l.lo * v_m.lo, v_l.lo * v_m.hi, v_l.hi * v_m.lo, v_l.hi * v_m.hi};
    AffineConstraint row;
    for (int g = 0; g < 4; ++g) {
        row.terms.emplace_back(lambda_vars[2 * g], w[g]);
        row.terms.emplace_back(lambda_vars[2 * g + 1], w[g]);
        row.terms.emplace_back(gamma_vars[2 * g], -w[g]);
        row.terms.emplace_back(gamma_vars[2 * g + 1], -w[g]);
    }
    row.sense = Sense::Eq;
    row.rhs = 0.0;
    return row;
}

ExtremePointHull quadrilinear_hull(Interval v_l, Interval v_m, const TrigPolytope& polytope,
                                   int var_vl, int var_vm, int var_c_lift, int var_s_lift,
                                   int var_c_prod, int var_s_prod,
                                   const std::vector<int>& weight_vars) {
    size_t n = polytope.vertices.size();
    if (n == 0) throw std::invalid_argument("quadrilinear_hull: empty polytope");
    if (weight_vars.size() != 4 * n)
        throw std::invalid_argument("quadrilinear_hull expects 4*N weight variables");
    ExtremePointHull hull;
    hull.weight_vars = weight_vars;
    hull.coord_vars = {var_vl, var_vm, var_c_lift, var_s_lift};
    hull.product_vars = {var_c_prod, var_s_prod};
    const double a[2] = {v_l.lo, v_l.hi};
    const double b[2] = {v_m.lo, v_m.hi};
    std::vector<double> c1, c2, c3, c4, pc, ps;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (const Point2& v : polytope.vertices) {
                hull.points.push_back({a[i], b[j], v.c, v.s});
                c1.push_back(a[i]);
                c2.push_back(b[j]);
                c3.push_back(v.c);
                c4.push_back(v.s);
                pc.push_back(a[i] * b[j] * v.c);
                ps.push_back(a[i] * b[j] * v.s);
            }
    hull.rows.push_back(recovery_row(var_c_prod, weight_vars, pc));
    hull.rows.push_back(recovery_row(var_s_prod, weight_vars, ps));
    hull.rows.push_back(recovery_row(var_vl, weight_vars, c1));
    hull.rows.push_back(recovery_row(var_vm, weight_vars, c2));
    hull.rows.push_back(recovery_row(var_c_lift, weight_vars, c3));
    hull.rows.push_back(recovery_row(var_s_lift, weight_vars, c4));
    hull.rows.push_back(simplex_row(weight_vars));
    return hull;
}

} // namespace ropf
