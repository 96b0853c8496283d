#include "ropf/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ropf/hulls.hpp"
#include "ropf/polytope.hpp"

namespace ropf {

namespace {

using Terms = std::vector<std::pair<int, double>>;

void add_term(Terms& t, int var, double coef) {
    if (coef != 0.0) t.emplace_back(var, coef);
}

Terms scaled(const Terms& t, double k) {
    Terms out;
    out.reserve(t.size());
    for (const auto& [v, c] : t) out.emplace_back(v, c * k);
    return out;
}

struct PairKey {
    int l, m;
    bool operator<(const PairKey& o) const { return std::tie(l, m) < std::tie(o.l, o.m); }
};

struct Builder {
    const NetworkCase& net;
    RelaxationKind kind;
    double psi;
    BuildOptions opts;

    BuiltRelaxation out;
    ConicProgram& prog;
    int half = -1;
    int counter = 0;

    std::vector<int> v_var, th_var, w_var;
    std::vector<int> pg_var, qg_var;       // original coordinates
    std::vector<int> pgr_var, qgr_var;     // rotated (RQC/TRQC only)
    std::vector<Terms> bus_p, bus_q;       // balance accumulators

    Builder(const NetworkCase& n, RelaxationKind k, double p, const BuildOptions& o)
        : net(n), kind(k), psi(p), opts(o), prog(out.program) {
        out.kind = k;
        out.psi = p;
    }

    int var(const std::string& name, double lo = -kInf, double hi = kInf, double cost = 0.0) {
        int id = prog.add_variable(name, lo, hi, cost);
        out.vars.idx.emplace(name, id);
        return id;
    }
    int fresh(const char* tag, double lo = -kInf, double hi = kInf) {
        std::ostringstream os;
        os << tag << ":" << counter++;
        return var(os.str(), lo, hi);
    }
    void eq(Terms t, double rhs) { prog.add_equality(std::move(t), rhs); }
    void le(Terms t, double rhs) {
        t.emplace_back(fresh("slk", 0.0), 1.0);
        prog.add_equality(std::move(t), rhs);
    }
    void ge(Terms t, double rhs) {
        t.emplace_back(fresh("slk", 0.0), -1.0);
        prog.add_equality(std::move(t), rhs);
    }
    void constraint(const AffineConstraint& row) {
        switch (row.sense) {
            case Sense::LessEq: le(row.terms, row.rhs); break;
            case Sense::GreaterEq: ge(row.terms, row.rhs); break;
            default: eq(row.terms, row.rhs); break;
        }
    }

    // membership of the affine expression f in the envelope of a trig function
    // of x = x_var + x_offset
    void apply_envelope(const TrigEnvelope& env, const Terms& f_expr, int x_var,
                        double x_offset) {
        for (const auto& row : env.rows) {
            Terms t = scaled(f_expr, row.f_coef);
            add_term(t, x_var, row.x_coef);
            double rhs = row.rhs - row.x_coef * x_offset;
            switch (row.sense) {
                case Sense::LessEq: le(std::move(t), rhs); break;
                case Sense::GreaterEq: ge(std::move(t), rhs); break;
                default: eq(std::move(t), rhs); break;
            }
        }
        if (env.quad) {
            const auto& q = *env.quad;
            int d = fresh("aux"); // x - x0
            eq({{d, 1.0}, {x_var, -1.0}}, x_offset - q.x0);
            int r = fresh("aux"); // (r - f_sign*f)/k >= d^2
            Terms t = scaled(f_expr, q.f_sign);
            add_term(t, r, q.k);
            eq(std::move(t), q.r);
            prog.add_cone(ConeKind::RotatedSecondOrder, {r, half, d});
        }
    }

    std::string tagged(const char* tag, int i) {
        std::ostringstream os;
        os << tag << ":" << i;
        return os.str();
    }

    void add_buses() {
        int nb = static_cast<int>(net.buses.size());
        v_var.resize(nb);
        th_var.resize(nb);
        w_var.resize(nb);
        bus_p.resize(nb);
        bus_q.resize(nb);
        for (int i = 0; i < nb; ++i) {
            const Bus& bus = net.buses[i];
            v_var[i] = var(tagged("V", i), bus.v_min, bus.v_max);
            th_var[i] = var(tagged("theta", i));
            w_var[i] = var(tagged("w", i), bus.v_min * bus.v_min, bus.v_max * bus.v_max);
            // square envelope: conic lower bound + secant upper bound
            prog.add_cone(ConeKind::RotatedSecondOrder, {w_var[i], half, v_var[i]});
            SquareEnvelope se = square_envelope(bus.v_min, bus.v_max);
            le({{w_var[i], 1.0}, {v_var[i], -se.secant_slope}}, se.secant_offset);
        }
        for (int ref : net.reference_buses) eq({{th_var[net.bus_index(ref)], 1.0}}, 0.0);
    }

    void add_generators() {
        int ng = static_cast<int>(net.generators.size());
        pg_var.resize(ng);
        qg_var.resize(ng);
        bool rotated = kind != RelaxationKind::QC;
        if (rotated) {
            pgr_var.resize(ng);
            qgr_var.resize(ng);
        }
        double cp = std::cos(psi), sp = std::sin(psi);
        for (int g = 0; g < ng; ++g) {
            const Generator& gen = net.generators[g];
            int bus = net.bus_index(gen.bus);
            pg_var[g] = var(tagged("Pg", g), gen.p_min, gen.p_max, gen.c1);
            qg_var[g] = var(tagged("Qg", g), gen.q_min, gen.q_max);
            prog.obj_constant += gen.c0;
            if (gen.c2 > 0.0) {
                int t = var(tagged("cost", g), -kInf, kInf, 1.0);
                int a = fresh("aux");
                eq({{a, 1.0}, {pg_var[g], -std::sqrt(gen.c2)}}, 0.0);
                prog.add_cone(ConeKind::RotatedSecondOrder, {t, half, a});
            }
            if (rotated) {
                pgr_var[g] = var(tagged("Pg~", g));
                qgr_var[g] = var(tagged("Qg~", g));
                // original = inverse rotation of the tilde dispatch
                eq({{pg_var[g], 1.0}, {pgr_var[g], -cp}, {qgr_var[g], sp}}, 0.0);
                eq({{qg_var[g], 1.0}, {pgr_var[g], -sp}, {qgr_var[g], -cp}}, 0.0);
                add_term(bus_p[bus], pgr_var[g], 1.0);
                add_term(bus_q[bus], qgr_var[g], 1.0);
            } else {
                add_term(bus_p[bus], pg_var[g], 1.0);
                add_term(bus_q[bus], qg_var[g], 1.0);
            }
        }
    }

    // angle-difference variable per connected bus pair, bounded by the
    // intersection of the member branches' limits
    std::map<PairKey, std::vector<int>> group_branches() const {
        std::map<PairKey, std::vector<int>> groups;
        for (int b = 0; b < static_cast<int>(net.branches.size()); ++b) {
            const Branch& br = net.branches[b];
            groups[{net.bus_index(br.from_bus), net.bus_index(br.to_bus)}].push_back(b);
        }
        return groups;
    }

    struct PairInfo {
        int theta = -1;     // theta_l - theta_m
        double lo = 0, hi = 0;
        int c_lift = -1, s_lift = -1; // owner's unit-level lifted pair
        int c_prod = -1, s_prod = -1; // owner's product-level pair (V V trig)
        int owner = -1;
    };

    void record_pair_lift(const PairKey& key, int count) {
        out.trig_lifted_per_pair[{key.l, key.m}] += count;
    }

    PairInfo make_pair(const PairKey& key, const std::vector<int>& members) {
        PairInfo pi;
        pi.owner = members.front();
        pi.lo = -kInf;
        pi.hi = kInf;
        for (int b : members) {
            pi.lo = std::max(pi.lo, net.branches[b].ang_min);
            pi.hi = std::min(pi.hi, net.branches[b].ang_max);
        }
        if (pi.lo > pi.hi) {
            std::ostringstream os;
            os << "empty angle-difference interval between buses " << net.buses[key.l].id
               << " and " << net.buses[key.m].id;
            throw std::invalid_argument(os.str());
        }
        std::ostringstream os;
        os << "theta_d:" << key.l << "-" << key.m;
        pi.theta = var(os.str(), pi.lo, pi.hi);
        eq({{pi.theta, 1.0}, {th_var[key.l], -1.0}, {th_var[key.m], 1.0}}, 0.0);
        return pi;
    }

    std::vector<int> weight_vars(const char* tag, int branch, int count) {
        std::vector<int> w(count);
        for (int k = 0; k < count; ++k) {
            std::ostringstream os;
            os << tag << ":" << branch << ":" << k;
            w[k] = var(os.str(), 0.0, 1.0);
        }
        return w;
    }

    void flow_caps(int b, int p_lm, int q_lm, int p_ml, int q_ml) {
        const Branch& br = net.branches[b];
        if (!br.s_rating) return;
        int cap1 = fresh("aux");
        eq({{cap1, 1.0}}, *br.s_rating);
        prog.add_cone(ConeKind::SecondOrder, {cap1, p_lm, q_lm});
        int cap2 = fresh("aux");
        eq({{cap2, 1.0}}, *br.s_rating);
        prog.add_cone(ConeKind::SecondOrder, {cap2, p_ml, q_ml});
    }

    // P^2 + Q^2 <= w_ll * ell via a rotated cone with an ell/2 head; ell is
    // the squared current magnitude into terminal l, so it is nonnegative and
    // capped by the apparent-power rating over the lowest terminal voltage
    void current_link(int b, int w_ll, const Terms& ell_expr, double ell_const, int p_lm,
                      int q_lm) {
        const Branch& br = net.branches[b];
        double ell_hi = kInf;
        if (br.s_rating) {
            double v_lo = net.buses[net.bus_index(br.from_bus)].v_min;
            if (v_lo > 0.0) ell_hi = (*br.s_rating / v_lo) * (*br.s_rating / v_lo);
        }
        int ell = var(tagged("l", b), 0.0, ell_hi);
        Terms t = ell_expr;
        add_term(t, ell, -1.0);
        eq(std::move(t), -ell_const);
        int aux = fresh("aux");
        eq({{aux, 1.0}, {ell, -0.5}}, 0.0);
        prog.add_cone(ConeKind::RotatedSecondOrder, {aux, w_ll, p_lm, q_lm});
    }

    // ---- QC branch assembly (original coordinates, rectangular g/b)

    void build_qc_pair(const PairKey& key, const std::vector<int>& members) {
        PairInfo pi = make_pair(key, members);
        const Branch& ob = net.branches[pi.owner];
        double xlo = pi.lo - ob.shift, xhi = pi.hi - ob.shift;
        TrigBounds tb = trig_bounds(xlo, xhi);

        pi.c_lift = var(tagged("C", pi.owner), tb.cos_min, tb.cos_max);
        pi.s_lift = var(tagged("S", pi.owner), tb.sin_min, tb.sin_max);
        pi.c_prod = var(tagged("c", pi.owner));
        pi.s_prod = var(tagged("s", pi.owner));
        record_pair_lift(key, 2);

        Interval vl{net.buses[key.l].v_min, net.buses[key.l].v_max};
        Interval vm{net.buses[key.m].v_min, net.buses[key.m].v_max};
        std::vector<int> lam = weight_vars("lam", pi.owner, 8);
        std::vector<int> gam = weight_vars("gam", pi.owner, 8);
        ExtremePointHull ch = trilinear_hull(vl, vm, {tb.cos_min, tb.cos_max}, v_var[key.l],
                                             v_var[key.m], pi.c_lift, pi.c_prod, lam);
        ExtremePointHull sh = trilinear_hull(vl, vm, {tb.sin_min, tb.sin_max}, v_var[key.l],
                                             v_var[key.m], pi.s_lift, pi.s_prod, gam);
        for (const auto& row : ch.rows) constraint(row);
        for (const auto& row : sh.rows) constraint(row);
        constraint(linking_constraint(lam, gam, vl, vm));

        apply_envelope(cosine_envelope(xlo, xhi, opts.fallback), {{pi.c_lift, 1.0}}, pi.theta,
                       -ob.shift);
        apply_envelope(sine_envelope(xlo, xhi, opts.fallback), {{pi.s_lift, 1.0}}, pi.theta,
                       -ob.shift);

        for (int b : members) build_qc_branch(key, pi, b);
    }

    void build_qc_branch(const PairKey& key, const PairInfo& pi, int b) {
        const Branch& br = net.branches[b];
        const Branch& ob = net.branches[pi.owner];
        // product-level lifted pair of this branch as an affine image of the
        // owner's (x_b = x_owner + delta)
        double delta = ob.shift - br.shift;
        double cd = std::cos(delta), sd = std::sin(delta);
        Terms c_b, s_b;
        add_term(c_b, pi.c_prod, cd);
        add_term(c_b, pi.s_prod, -sd);
        add_term(s_b, pi.c_prod, sd);
        add_term(s_b, pi.s_prod, cd);

        if (b != pi.owner) {
            // unit-level envelope memberships through the same image
            double xlo = pi.lo - br.shift, xhi = pi.hi - br.shift;
            Terms cu = {{pi.c_lift, cd}, {pi.s_lift, -sd}};
            Terms su = {{pi.c_lift, sd}, {pi.s_lift, cd}};
            apply_envelope(cosine_envelope(xlo, xhi, opts.fallback), cu, pi.theta, -br.shift);
            apply_envelope(sine_envelope(xlo, xhi, opts.fallback), su, pi.theta, -br.shift);
        }

        double g = br.g, bb = br.b, bt = br.b + 0.5 * br.b_charge;
        double t2 = br.tau * br.tau, t1 = br.tau;
        int wl = w_var[key.l], wm = w_var[key.m];
        int p_lm = var(tagged("Plm", b)), q_lm = var(tagged("Qlm", b));
        int p_ml = var(tagged("Pml", b)), q_ml = var(tagged("Qml", b));

        Terms t;
        t = scaled(c_b, g / t1);
        for (auto& [v, c] : scaled(s_b, bb / t1)) add_term(t, v, c);
        add_term(t, wl, -g / t2);
        add_term(t, p_lm, 1.0);
        eq(std::move(t), 0.0);

        t = scaled(s_b, g / t1);
        for (auto& [v, c] : scaled(c_b, -bb / t1)) add_term(t, v, c);
        add_term(t, wl, bt / t2);
        add_term(t, q_lm, 1.0);
        eq(std::move(t), 0.0);

        t = scaled(c_b, g / t1);
        for (auto& [v, c] : scaled(s_b, -bb / t1)) add_term(t, v, c);
        add_term(t, wm, -g);
        add_term(t, p_ml, 1.0);
        eq(std::move(t), 0.0);

        t = scaled(s_b, -g / t1);
        for (auto& [v, c] : scaled(c_b, -bb / t1)) add_term(t, v, c);
        add_term(t, wm, bt);
        add_term(t, q_ml, 1.0);
        eq(std::move(t), 0.0);

        // squared current magnitude leaving the sending end
        double y2 = g * g + bb * bb;
        double bc = br.b_charge;
        Terms ell = scaled(c_b, -2.0 * y2 / (t2 * t1));
        add_term(ell, wl, (y2 - 0.25 * bc * bc) / (t2 * t2));
        add_term(ell, wm, y2 / t2);
        add_term(ell, q_lm, -bc / t2);
        current_link(b, wl, ell, 0.0, p_lm, q_lm);
        flow_caps(b, p_lm, q_lm, p_ml, q_ml);

        add_term(bus_p[key.l], p_lm, -1.0);
        add_term(bus_q[key.l], q_lm, -1.0);
        add_term(bus_p[key.m], p_ml, -1.0);
        add_term(bus_q[key.m], q_ml, -1.0);
    }

    // ---- RQC/TRQC branch assembly (rotated coordinates, polar Y/delta)

    void build_rqc_pair(const PairKey& key, const std::vector<int>& members) {
        PairInfo pi = make_pair(key, members);
        const Branch& ob = net.branches[pi.owner];
        double delta_o = ob.admittance_angle();
        double sig_o = delta_o + ob.shift + psi;
        double xs_lo = pi.lo - sig_o, xs_hi = pi.hi - sig_o;
        double xr_off = delta_o - ob.shift + psi;
        double xr_lo = pi.lo + xr_off, xr_hi = pi.hi + xr_off;

        TrigBounds send_tb = trig_bounds(xs_lo, xs_hi);
        TrigBounds recv_tb = trig_bounds(xr_lo, xr_hi);
        TerminalRelation rel = terminal_relation(ob, psi);
        TrigPolytope poly =
            intersect_trig_polytopes(box_from_bounds(send_tb), box_from_bounds(recv_tb), rel);

        pi.c_lift = var(tagged("C", pi.owner), send_tb.cos_min, send_tb.cos_max);
        pi.s_lift = var(tagged("S", pi.owner), send_tb.sin_min, send_tb.sin_max);
        pi.c_prod = var(tagged("c", pi.owner));
        pi.s_prod = var(tagged("s", pi.owner));
        record_pair_lift(key, 2);

        Interval vl{net.buses[key.l].v_min, net.buses[key.l].v_max};
        Interval vm{net.buses[key.m].v_min, net.buses[key.m].v_max};
        int nw = 4 * static_cast<int>(poly.vertices.size());
        std::vector<int> lam = weight_vars("lam", pi.owner, nw);
        ExtremePointHull hull =
            quadrilinear_hull(vl, vm, poly, v_var[key.l], v_var[key.m], pi.c_lift, pi.s_lift,
                              pi.c_prod, pi.s_prod, lam);
        for (const auto& row : hull.rows) constraint(row);

        // four trig memberships: sending pair directly, receiving pair through
        // the terminal relation
        apply_envelope(cosine_envelope(xs_lo, xs_hi, opts.fallback), {{pi.c_lift, 1.0}},
                       pi.theta, -sig_o);
        apply_envelope(sine_envelope(xs_lo, xs_hi, opts.fallback), {{pi.s_lift, 1.0}},
                       pi.theta, -sig_o);
        apply_envelope(cosine_envelope(xr_lo, xr_hi, opts.fallback),
                       {{pi.c_lift, rel.alpha}, {pi.s_lift, -rel.beta}}, pi.theta, xr_off);
        apply_envelope(sine_envelope(xr_lo, xr_hi, opts.fallback),
                       {{pi.c_lift, rel.beta}, {pi.s_lift, rel.alpha}}, pi.theta, xr_off);

        if (kind == RelaxationKind::TRQC) {
            Mat2 m = m_matrix(ob, psi);
            Terms cos_theta = {{pi.s_lift, m.a11}, {pi.c_lift, m.a12}};
            Terms sin_theta = {{pi.s_lift, m.a21}, {pi.c_lift, m.a22}};
            apply_envelope(cosine_envelope(pi.lo, pi.hi, opts.fallback), cos_theta, pi.theta,
                           0.0);
            apply_envelope(sine_envelope(pi.lo, pi.hi, opts.fallback), sin_theta, pi.theta,
                           0.0);
        }

        for (int b : members) build_rqc_branch(key, pi, b);
    }

    void build_rqc_branch(const PairKey& key, const PairInfo& pi, int b) {
        const Branch& br = net.branches[b];
        const Branch& ob = net.branches[pi.owner];
        double y = br.admittance_magnitude();
        double delta = br.admittance_angle();
        double sig = delta + br.shift + psi;
        double sig_o = ob.admittance_angle() + ob.shift + psi;
        // [s_b; c_b] = [[cos d, sin d], [-sin d, cos d]] [s_o; c_o], d = sig_o - sig
        double d = sig_o - sig;
        double cd = std::cos(d), sd = std::sin(d);
        Terms c_b = {{pi.s_prod, -sd}, {pi.c_prod, cd}};
        Terms s_b = {{pi.s_prod, cd}, {pi.c_prod, sd}};

        TerminalRelation rel = terminal_relation(br, psi);
        if (b != pi.owner) {
            Terms cu = {{pi.s_lift, -sd}, {pi.c_lift, cd}};
            Terms su = {{pi.s_lift, cd}, {pi.c_lift, sd}};
            double xs_lo = pi.lo - sig, xs_hi = pi.hi - sig;
            double xr_off = delta - br.shift + psi;
            apply_envelope(cosine_envelope(xs_lo, xs_hi, opts.fallback), cu, pi.theta, -sig);
            apply_envelope(sine_envelope(xs_lo, xs_hi, opts.fallback), su, pi.theta, -sig);
            Terms cr, sr;
            for (auto& [v, c] : cu) add_term(cr, v, rel.alpha * c);
            for (auto& [v, c] : su) add_term(cr, v, -rel.beta * c);
            for (auto& [v, c] : cu) add_term(sr, v, rel.beta * c);
            for (auto& [v, c] : su) add_term(sr, v, rel.alpha * c);
            apply_envelope(cosine_envelope(pi.lo + xr_off, pi.hi + xr_off, opts.fallback), cr,
                           pi.theta, xr_off);
            apply_envelope(sine_envelope(pi.lo + xr_off, pi.hi + xr_off, opts.fallback), sr,
                           pi.theta, xr_off);
        }

        double dh = delta + psi;
        double self_p = y * std::cos(dh) - 0.5 * br.b_charge * std::sin(psi);
        double self_q = -y * std::sin(dh) - 0.5 * br.b_charge * std::cos(psi);
        double t1 = br.tau, t2 = br.tau * br.tau;
        int wl = w_var[key.l], wm = w_var[key.m];
        int p_lm = var(tagged("Plm", b)), q_lm = var(tagged("Qlm", b));
        int p_ml = var(tagged("Pml", b)), q_ml = var(tagged("Qml", b));

        Terms t = scaled(c_b, y / t1);
        add_term(t, wl, -self_p / t2);
        add_term(t, p_lm, 1.0);
        eq(std::move(t), 0.0);

        t = scaled(s_b, y / t1);
        add_term(t, wl, -self_q / t2);
        add_term(t, q_lm, 1.0);
        eq(std::move(t), 0.0);

        // receiving end through the terminal relation
        t = scaled(c_b, rel.alpha * y / t1);
        for (auto& [v, c] : scaled(s_b, -rel.beta * y / t1)) add_term(t, v, c);
        add_term(t, wm, -self_p);
        add_term(t, p_ml, 1.0);
        eq(std::move(t), 0.0);

        t = scaled(c_b, -rel.beta * y / t1);
        for (auto& [v, c] : scaled(s_b, -rel.alpha * y / t1)) add_term(t, v, c);
        add_term(t, wm, -self_q);
        add_term(t, q_ml, 1.0);
        eq(std::move(t), 0.0);

        double bc = br.b_charge;
        double y2 = y * y;
        Terms ell;
        add_term(ell, wl,
                 (y2 + 0.25 * bc * bc) / (t2 * t2) +
                     (y * bc / (t2 * t2)) * std::sin(delta));
        add_term(ell, wm, y2 / t2);
        double c_coef = (y * bc / (t2 * t1)) * std::sin(psi) -
                        (2.0 * y2 / (t2 * t1)) * std::cos(dh);
        double s_coef = (y * bc / (t2 * t1)) * std::cos(psi) +
                        (2.0 * y2 / (t2 * t1)) * std::sin(dh);
        for (auto& [v, c] : scaled(c_b, c_coef)) add_term(ell, v, c);
        for (auto& [v, c] : scaled(s_b, s_coef)) add_term(ell, v, c);
        current_link(b, wl, ell, 0.0, p_lm, q_lm);
        flow_caps(b, p_lm, q_lm, p_ml, q_ml);

        add_term(bus_p[key.l], p_lm, -1.0);
        add_term(bus_q[key.l], q_lm, -1.0);
        add_term(bus_p[key.m], p_ml, -1.0);
        add_term(bus_q[key.m], q_ml, -1.0);
    }

    void add_balances() {
        double cp = std::cos(psi), sp = std::sin(psi);
        bool rotated = kind != RelaxationKind::QC;
        for (int i = 0; i < static_cast<int>(net.buses.size()); ++i) {
            const Bus& bus = net.buses[i];
            double pd = bus.p_demand, qd = bus.q_demand;
            double gsh = bus.g_shunt, bsh = bus.b_shunt;
            double pd_r = pd, qd_r = qd, gsh_p = gsh, bsh_q = bsh;
            if (rotated) {
                auto dem = rotate_pq(pd, qd, psi);
                pd_r = dem[0];
                qd_r = dem[1];
                // rotated shunt consumption coefficients on w
                gsh_p = gsh * cp - bsh * sp;  // P~ = (g cos - b sin) w
                bsh_q = gsh * sp + bsh * cp;  // Q~ consumption = -(g sin + b cos) w
            }
            Terms tp = bus_p[i];
            add_term(tp, w_var[i], -gsh_p);
            eq(std::move(tp), pd_r);
            Terms tq = bus_q[i];
            add_term(tq, w_var[i], bsh_q);
            eq(std::move(tq), qd_r);
        }
    }

    BuiltRelaxation build() {
        auto problems = validate_case(net);
        if (!problems.empty())
            throw std::invalid_argument("invalid case: " + problems.front());
        half = var("half");
        eq({{half, 1.0}}, 0.5);
        add_buses();
        add_generators();
        for (const auto& [key, members] : group_branches()) {
            if (kind == RelaxationKind::QC)
                build_qc_pair(key, members);
            else
                build_rqc_pair(key, members);
        }
        add_balances();
        return std::move(out);
    }
};

} // namespace

const char* to_string(RelaxationKind kind) {
    switch (kind) {
        case RelaxationKind::QC: return "qc";
        case RelaxationKind::RQC: return "rqc";
        default: return "trqc";
    }
}

int VariableMap::at(const std::string& name) const {
    auto it = idx.find(name);
    if (it == idx.end()) throw std::out_of_range("unknown variable '" + name + "'");
    return it->second;
}

BuiltRelaxation build_qc(const NetworkCase& net, const BuildOptions& opts) {
    return Builder(net, RelaxationKind::QC, 0.0, opts).build();
}

BuiltRelaxation build_rqc(const NetworkCase& net, double psi, const BuildOptions& opts) {
    return Builder(net, RelaxationKind::RQC, psi, opts).build();
}

BuiltRelaxation build_trqc(const NetworkCase& net, double psi, const BuildOptions& opts) {
    return Builder(net, RelaxationKind::TRQC, psi, opts).build();
}

RelaxationResult solve_relaxation(const BuiltRelaxation& relax, const SolverOptions& opts) {
    RelaxationResult res;
    SolveReport rep = solve(relax.program, opts);
    res.iterations = rep.iterations;
    res.max_kkt_residual = rep.max_kkt_residual;
    res.solve_time_s = rep.wall_time_s;
    res.message = rep.message;
    switch (rep.status) {
        case SolveStatus::Optimal: res.status = SolveStatus::Optimal; break;
        case SolveStatus::Infeasible: res.status = SolveStatus::Infeasible; break;
        default:
            res.status = SolveStatus::NumericalFailure;
            return res;
    }
    if (res.status != SolveStatus::Optimal) return res;
    res.bound = rep.primal_objective;
    res.x = rep.x;
    int g = 0;
    while (true) {
        std::ostringstream os;
        os << "Pg:" << g;
        if (!relax.vars.contains(os.str())) break;
        std::ostringstream oq;
        oq << "Qg:" << g;
        res.p_gen.push_back(res.x[relax.vars.at(os.str())]);
        res.q_gen.push_back(res.x[relax.vars.at(oq.str())]);
        ++g;
    }
    return res;
}

Dispatch recover_original(const BuiltRelaxation& relax, const RelaxationResult& result) {
    if (result.status != SolveStatus::Optimal)
        throw std::invalid_argument("recover_original requires an Optimal result");
    Dispatch d;
    int g = 0;
    while (true) {
        std::ostringstream op, oq;
        op << "Pg~:" << g;
        oq << "Qg~:" << g;
        if (relax.vars.contains(op.str())) {
            auto pq = inverse_rotation(result.x[relax.vars.at(op.str())],
                                       result.x[relax.vars.at(oq.str())], relax.psi);
            d.p.push_back(pq[0]);
            d.q.push_back(pq[1]);
        } else {
            std::ostringstream p0, q0;
            p0 << "Pg:" << g;
            q0 << "Qg:" << g;
            if (!relax.vars.contains(p0.str())) break;
            d.p.push_back(result.x[relax.vars.at(p0.str())]);
            d.q.push_back(result.x[relax.vars.at(q0.str())]);
        }
        ++g;
    }
    return d;
}

std::vector<double> ac_residuals(const NetworkCase& net, const OperatingPoint& pt) {
    std::vector<double> out;
    int nb = static_cast<int>(net.buses.size());
    std::vector<double> inj_p(nb, 0.0), inj_q(nb, 0.0);
    for (size_t g = 0; g < net.generators.size(); ++g) {
        int bus = net.bus_index(net.generators[g].bus);
        inj_p[bus] += pt.p_gen[g];
        inj_q[bus] += pt.q_gen[g];
    }
    std::vector<double> flow_p(nb, 0.0), flow_q(nb, 0.0);
    for (const auto& br : net.branches) {
        BranchFlows fl = rectangular_flows(net, pt, br);
        int l = net.bus_index(br.from_bus), m = net.bus_index(br.to_bus);
        flow_p[l] += fl.p_lm;
        flow_q[l] += fl.q_lm;
        flow_p[m] += fl.p_ml;
        flow_q[m] += fl.q_ml;
    }
    for (int i = 0; i < nb; ++i) {
        const Bus& bus = net.buses[i];
        double v2 = pt.v[i] * pt.v[i];
        out.push_back(inj_p[i] - bus.p_demand - bus.g_shunt * v2 - flow_p[i]);
        out.push_back(inj_q[i] - bus.q_demand + bus.b_shunt * v2 - flow_q[i]);
        out.push_back(std::max(0.0, bus.v_min - pt.v[i]));
        out.push_back(std::max(0.0, pt.v[i] - bus.v_max));
    }
    for (int ref : net.reference_buses) out.push_back(pt.theta[net.bus_index(ref)]);
    for (size_t g = 0; g < net.generators.size(); ++g) {
        const Generator& gen = net.generators[g];
        out.push_back(std::max(0.0, gen.p_min - pt.p_gen[g]));
        out.push_back(std::max(0.0, pt.p_gen[g] - gen.p_max));
        out.push_back(std::max(0.0, gen.q_min - pt.q_gen[g]));
        out.push_back(std::max(0.0, pt.q_gen[g] - gen.q_max));
    }
    for (const auto& br : net.branches) {
        int l = net.bus_index(br.from_bus), m = net.bus_index(br.to_bus);
        double dth = pt.theta[l] - pt.theta[m];
        out.push_back(std::max(0.0, br.ang_min - dth));
        out.push_back(std::max(0.0, dth - br.ang_max));
        if (br.s_rating) {
            BranchFlows fl = rectangular_flows(net, pt, br);
            out.push_back(std::max(0.0, std::hypot(fl.p_lm, fl.q_lm) - *br.s_rating));
            out.push_back(std::max(0.0, std::hypot(fl.p_ml, fl.q_ml) - *br.s_rating));
        }
    }
    return out;
}

double dispatch_cost(const NetworkCase& net, const OperatingPoint& pt) {
    double cost = 0.0;
    for (size_t g = 0; g < net.generators.size(); ++g) {
        const Generator& gen = net.generators[g];
        double p = pt.p_gen[g];
        cost += gen.c2 * p * p + gen.c1 * p + gen.c0;
    }
    return cost;
}

double optimality_gap(double local_objective, double bound) {
    if (!(local_objective > 0.0))
        throw std::invalid_argument("optimality_gap requires a positive local objective");
    return (local_objective - bound) / local_objective;
}

} // namespace ropf
