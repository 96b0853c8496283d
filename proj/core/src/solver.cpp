#include "ropf/solver.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <cstdio>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace ropf {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Trip = Eigen::Triplet<double>;

constexpr double kReg = 1e-12;  // static regularization of the equilibrated KKT system
constexpr double kHuge = 1e300;

struct ConeDims {
    int l = 0;              // nonnegative-orthant rows
    std::vector<int> soc;   // second-order block sizes (rotated blocks converted)
    int total() const {
        int t = l;
        for (int k : soc) t += k;
        return t;
    }
    int degree() const { return l + static_cast<int>(soc.size()); }
};

struct InternalForm {
    int n = 0;
    Vec c;
    double obj_const = 0.0;
    SpMat A; Vec b;  // p x n equality rows
    SpMat G; Vec h;  // m x n, G x + s = h, s in cone
    ConeDims dims;
    std::vector<int> var_map;       // program var -> internal index or -1
    std::vector<double> fixed_value; // per program var, valid when var_map < 0
    bool trivially_infeasible = false;
    std::string message;

    // data equilibration (identity until equilibrate() is applied):
    // scaled data are A <- Dra A Dc, G <- Drg G Dc, b <- rho Dra b,
    // h <- rho Drg h, c <- sigma Dc c
    Vec dc, dra, drg;
    double obj_scale = 1.0; // sigma
    double rhs_scale = 1.0; // rho
};

void equilibrate(InternalForm& f) {
    int n = f.n, p = static_cast<int>(f.b.size()), m = static_cast<int>(f.h.size());
    f.dc = Vec::Ones(n);
    f.dra = Vec::Ones(p);
    f.drg = Vec::Ones(m);
    for (int pass = 0; pass < 10; ++pass) {
        Vec cmax = Vec::Zero(n), ramax = Vec::Zero(p), rgmax = Vec::Zero(m);
        for (int k = 0; k < f.A.outerSize(); ++k)
            for (SpMat::InnerIterator it(f.A, k); it; ++it) {
                double v = std::abs(it.value()) * f.dra[it.row()] * f.dc[it.col()];
                cmax[it.col()] = std::max(cmax[it.col()], v);
                ramax[it.row()] = std::max(ramax[it.row()], v);
            }
        for (int k = 0; k < f.G.outerSize(); ++k)
            for (SpMat::InnerIterator it(f.G, k); it; ++it) {
                double v = std::abs(it.value()) * f.drg[it.row()] * f.dc[it.col()];
                cmax[it.col()] = std::max(cmax[it.col()], v);
                rgmax[it.row()] = std::max(rgmax[it.row()], v);
            }
        // second-order blocks must be scaled uniformly to stay cones
        int off = f.dims.l;
        for (int k : f.dims.soc) {
            double mx = rgmax.segment(off, k).maxCoeff();
            rgmax.segment(off, k).setConstant(mx);
            off += k;
        }
        for (int i = 0; i < n; ++i)
            if (cmax[i] > 0.0) f.dc[i] /= std::sqrt(cmax[i]);
        for (int i = 0; i < p; ++i)
            if (ramax[i] > 0.0) f.dra[i] /= std::sqrt(ramax[i]);
        for (int i = 0; i < m; ++i)
            if (rgmax[i] > 0.0) f.drg[i] /= std::sqrt(rgmax[i]);
    }
    f.A = f.dra.asDiagonal() * f.A * f.dc.asDiagonal();
    f.G = f.drg.asDiagonal() * f.G * f.dc.asDiagonal();
    f.c = f.c.cwiseProduct(f.dc);
    double cn = f.c.lpNorm<Eigen::Infinity>();
    f.obj_scale = cn > 1.0 ? 1.0 / cn : 1.0;
    f.c *= f.obj_scale;
    f.b = f.b.cwiseProduct(f.dra);
    f.h = f.h.cwiseProduct(f.drg);
    double rn = std::max(f.b.size() ? f.b.lpNorm<Eigen::Infinity>() : 0.0,
                         f.h.size() ? f.h.lpNorm<Eigen::Infinity>() : 0.0);
    f.rhs_scale = rn > 1.0 ? 1.0 / rn : 1.0;
    f.b *= f.rhs_scale;
    f.h *= f.rhs_scale;
}

InternalForm build_internal(const ConicProgram& prog) {
    InternalForm f;
    int np = prog.num_vars();
    std::vector<char> in_cone(np, 0);
    for (const auto& cone : prog.cones)
        for (int v : cone.vars) in_cone[v] = 1;

    f.var_map.assign(np, -1);
    f.fixed_value.assign(np, 0.0);
    for (int i = 0; i < np; ++i) {
        if (!in_cone[i] && prog.lb[i] == prog.ub[i] && std::isfinite(prog.lb[i]))
            f.fixed_value[i] = prog.lb[i];
        else
            f.var_map[i] = f.n++;
    }

    f.c = Vec::Zero(f.n);
    f.obj_const = prog.obj_constant;
    for (int i = 0; i < np; ++i) {
        if (f.var_map[i] >= 0)
            f.c[f.var_map[i]] = prog.obj[i];
        else
            f.obj_const += prog.obj[i] * f.fixed_value[i];
    }

    // equality rows: program rows plus pinning rows for cone members whose
    // bounds coincide (keeps the cone interior nonempty at the bound level)
    std::vector<Trip> at;
    std::vector<double> bv;
    for (const auto& row : prog.rows) {
        double rhs = row.rhs;
        int r = static_cast<int>(bv.size());
        bool empty = true;
        for (const auto& [idx, coef] : row.terms) {
            if (f.var_map[idx] >= 0) {
                at.emplace_back(r, f.var_map[idx], coef);
                empty = false;
            } else {
                rhs -= coef * f.fixed_value[idx];
            }
        }
        if (empty && std::abs(rhs) > 1e-9) {
            f.trivially_infeasible = true;
            f.message = "equality row with all variables fixed is violated";
        }
        bv.push_back(rhs);
    }
    for (int i = 0; i < np; ++i) {
        if (in_cone[i] && prog.lb[i] == prog.ub[i] && std::isfinite(prog.lb[i])) {
            int r = static_cast<int>(bv.size());
            at.emplace_back(r, f.var_map[i], 1.0);
            bv.push_back(prog.lb[i]);
        }
    }
    int p = static_cast<int>(bv.size());
    f.A.resize(p, f.n);
    f.A.setFromTriplets(at.begin(), at.end());
    f.b = Eigen::Map<Vec>(bv.data(), p);

    // inequality part: bound rows first (the orthant), then cone blocks
    std::vector<Trip> gt;
    std::vector<double> hv;
    for (int i = 0; i < np; ++i) {
        if (f.var_map[i] < 0) continue;
        bool pinned = in_cone[i] && prog.lb[i] == prog.ub[i] && std::isfinite(prog.lb[i]);
        if (pinned) continue;
        if (std::isfinite(prog.lb[i])) {
            gt.emplace_back(static_cast<int>(hv.size()), f.var_map[i], -1.0);
            hv.push_back(-prog.lb[i]);
        }
        if (std::isfinite(prog.ub[i])) {
            gt.emplace_back(static_cast<int>(hv.size()), f.var_map[i], 1.0);
            hv.push_back(prog.ub[i]);
        }
    }
    f.dims.l = static_cast<int>(hv.size());
    const double sqrt2 = std::sqrt(2.0);
    for (const auto& cone : prog.cones) {
        int r0 = static_cast<int>(hv.size());
        if (cone.kind == ConeKind::SecondOrder) {
            for (size_t k = 0; k < cone.vars.size(); ++k) {
                gt.emplace_back(r0 + static_cast<int>(k), f.var_map[cone.vars[k]], -1.0);
                hv.push_back(0.0);
            }
        } else {
            // (u, v, w..) with ||w||^2 <= 2uv  ->  (u+v, u-v, sqrt(2) w) in SOC
            int u = f.var_map[cone.vars[0]], v = f.var_map[cone.vars[1]];
            gt.emplace_back(r0, u, -1.0);
            gt.emplace_back(r0, v, -1.0);
            hv.push_back(0.0);
            gt.emplace_back(r0 + 1, u, -1.0);
            gt.emplace_back(r0 + 1, v, 1.0);
            hv.push_back(0.0);
            for (size_t k = 2; k < cone.vars.size(); ++k) {
                gt.emplace_back(r0 + static_cast<int>(k), f.var_map[cone.vars[k]], -sqrt2);
                hv.push_back(0.0);
            }
        }
        f.dims.soc.push_back(static_cast<int>(cone.vars.size()));
    }
    int m = static_cast<int>(hv.size());
    f.G.resize(m, f.n);
    f.G.setFromTriplets(gt.begin(), gt.end());
    f.h = Eigen::Map<Vec>(hv.data(), m);
    return f;
}

// ---- cone algebra over the internal layout (orthant block, then SOC blocks)

struct ConeOps {
    const ConeDims& dims;

    explicit ConeOps(const ConeDims& d) : dims(d) {}

    template <typename F>
    void for_blocks(F&& fn) const {
        int off = dims.l;
        for (int k : dims.soc) {
            fn(off, k);
            off += k;
        }
    }

    Vec identity() const {
        Vec e = Vec::Zero(dims.total());
        e.head(dims.l).setOnes();
        for_blocks([&](int off, int) { e[off] = 1.0; });
        return e;
    }

    // largest nonnegative violation of cone membership (<= 0 means inside)
    double violation(const Vec& u) const {
        double v = dims.l > 0 ? -u.head(dims.l).minCoeff() : -kHuge;
        for_blocks([&](int off, int k) {
            v = std::max(v, u.segment(off + 1, k - 1).norm() - u[off]);
        });
        return v;
    }

    // sup { t >= 0 : u + t du in cone }, u strictly inside
    double max_step(const Vec& u, const Vec& du) const {
        double t = kHuge;
        for (int i = 0; i < dims.l; ++i)
            if (du[i] < 0.0) t = std::min(t, -u[i] / du[i]);
        for_blocks([&](int off, int k) {
            double u0 = u[off], d0 = du[off];
            auto u1 = u.segment(off + 1, k - 1);
            auto d1 = du.segment(off + 1, k - 1);
            double a = d0 * d0 - d1.squaredNorm();
            double bq = 2.0 * (u0 * d0 - u1.dot(d1));
            double cq = std::max(u0 * u0 - u1.squaredNorm(), 0.0);
            double best = kHuge;
            if (a == 0.0) {
                if (bq < 0.0) best = -cq / bq;
            } else {
                double disc = bq * bq - 4.0 * a * cq;
                if (disc >= 0.0) {
                    double sq = std::sqrt(disc);
                    double q = -0.5 * (bq + (bq >= 0.0 ? sq : -sq));
                    double r1 = q / a;
                    double r2 = q != 0.0 ? cq / q : kHuge;
                    for (double r : {r1, r2})
                        if (r > 0.0) best = std::min(best, r);
                    if (a > 0.0 && bq >= 0.0) best = kHuge; // leaves cone never
                }
            }
            t = std::min(t, best);
        });
        return t;
    }

    Vec jprod(const Vec& u, const Vec& v) const {
        Vec out(dims.total());
        out.head(dims.l) = u.head(dims.l).cwiseProduct(v.head(dims.l));
        for_blocks([&](int off, int k) {
            auto u1 = u.segment(off + 1, k - 1);
            auto v1 = v.segment(off + 1, k - 1);
            out[off] = u.segment(off, k).dot(v.segment(off, k));
            out.segment(off + 1, k - 1) = u[off] * v1 + v[off] * u1;
        });
        return out;
    }

    // solve Arw(lam) x = d
    Vec jdiv(const Vec& lam, const Vec& d) const {
        Vec out(dims.total());
        out.head(dims.l) = d.head(dims.l).cwiseQuotient(lam.head(dims.l));
        for_blocks([&](int off, int k) {
            double a = lam[off];
            auto b1 = lam.segment(off + 1, k - 1);
            double det = a * a - b1.squaredNorm();
            double x0 = (a * d[off] - b1.dot(d.segment(off + 1, k - 1))) / det;
            out[off] = x0;
            out.segment(off + 1, k - 1) = (d.segment(off + 1, k - 1) - x0 * b1) / a;
        });
        return out;
    }
};

struct Scaling {
    Vec w_lin;   // orthant scaling
    Vec lambda;  // scaled point, full length
    struct Soc {
        double eta = 1.0;
        Vec wbar;
    };
    std::vector<Soc> socs;
    bool identity = false;
};

bool compute_scaling(const ConeOps& ops, const Vec& s, const Vec& z, Scaling& sc) {
    const ConeDims& dims = ops.dims;
    sc.identity = false;
    sc.w_lin.resize(dims.l);
    sc.lambda.resize(dims.total());
    for (int i = 0; i < dims.l; ++i) {
        if (s[i] <= 0.0 || z[i] <= 0.0) return false;
        sc.w_lin[i] = std::sqrt(s[i] / z[i]);
        sc.lambda[i] = std::sqrt(s[i] * z[i]);
    }
    sc.socs.assign(dims.soc.size(), {});
    int bi = 0;
    bool ok = true;
    ops.for_blocks([&](int off, int k) {
        auto sb = s.segment(off, k);
        auto zb = z.segment(off, k);
        double sres = sb[0] * sb[0] - sb.tail(k - 1).squaredNorm();
        double zres = zb[0] * zb[0] - zb.tail(k - 1).squaredNorm();
        if (sres <= 0.0 || zres <= 0.0 || sb[0] <= 0.0 || zb[0] <= 0.0) {
            ok = false;
            ++bi;
            return;
        }
        double snorm = std::sqrt(sres), znorm = std::sqrt(zres);
        Vec sbar = sb / snorm, zbar = zb / znorm;
        double inner = sbar[0] * zbar[0] - sbar.tail(k - 1).dot(zbar.tail(k - 1)); // sbar' J zbar
        // gamma^2 = (1 + sbar' zbar) / 2 with plain inner product
        double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
        Vec wbar(k);
        wbar[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
        wbar.tail(k - 1) = (sbar.tail(k - 1) - zbar.tail(k - 1)) / (2.0 * gamma);
        double eta = std::sqrt(snorm / znorm);
        auto& blk = sc.socs[bi++];
        blk.eta = eta;
        blk.wbar = wbar;
        // lambda = W z with W = eta * [[w0, w1'], [w1, I + w1 w1'/(1+w0)]]
        double d = wbar.tail(k - 1).dot(zb.tail(k - 1));
        Vec lam(k);
        lam[0] = eta * (wbar[0] * zb[0] + d);
        lam.tail(k - 1) =
            eta * (zb[0] * wbar.tail(k - 1) + zb.tail(k - 1) +
                   (d / (1.0 + wbar[0])) * wbar.tail(k - 1));
        sc.lambda.segment(off, k) = lam;
        (void)inner;
    });
    return ok;
}

Vec apply_w(const ConeOps& ops, const Scaling& sc, const Vec& u) {
    Vec out(u.size());
    if (sc.identity) return u;
    out.head(ops.dims.l) = sc.w_lin.cwiseProduct(u.head(ops.dims.l));
    int bi = 0;
    ops.for_blocks([&](int off, int k) {
        const auto& blk = sc.socs[bi++];
        auto ub = u.segment(off, k);
        double d = blk.wbar.tail(k - 1).dot(ub.tail(k - 1));
        Vec r(k);
        r[0] = blk.eta * (blk.wbar[0] * ub[0] + d);
        r.tail(k - 1) =
            blk.eta * (ub[0] * blk.wbar.tail(k - 1) + ub.tail(k - 1) +
                       (d / (1.0 + blk.wbar[0])) * blk.wbar.tail(k - 1));
        out.segment(off, k) = r;
    });
    return out;
}

Vec apply_winv(const ConeOps& ops, const Scaling& sc, const Vec& u) {
    Vec out(u.size());
    if (sc.identity) return u;
    out.head(ops.dims.l) = u.head(ops.dims.l).cwiseQuotient(sc.w_lin);
    int bi = 0;
    ops.for_blocks([&](int off, int k) {
        const auto& blk = sc.socs[bi++];
        auto ub = u.segment(off, k);
        // W^-1 = (1/eta) * [[w0, -w1'], [-w1, I + w1 w1'/(1+w0)]]
        double d = blk.wbar.tail(k - 1).dot(ub.tail(k - 1));
        Vec r(k);
        r[0] = (blk.wbar[0] * ub[0] - d) / blk.eta;
        r.tail(k - 1) =
            (-ub[0] * blk.wbar.tail(k - 1) + ub.tail(k - 1) +
             (d / (1.0 + blk.wbar[0])) * blk.wbar.tail(k - 1)) /
            blk.eta;
        out.segment(off, k) = r;
    });
    return out;
}

// ---- regularized quasi-definite KKT system

struct KktSolver {
    const InternalForm& f;
    ConeOps ops;
    int n, p, m, dim;
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> ldlt;
    bool analyzed = false;
    const Scaling* sc = nullptr;

    explicit KktSolver(const InternalForm& form)
        : f(form), ops(form.dims), n(form.n), p(static_cast<int>(form.b.size())),
          m(static_cast<int>(form.h.size())), dim(n + p + m) {}

    Vec dscale; // diagonal equilibration of the assembled KKT matrix
    bool debug_refine = false;

    bool factorize(const Scaling& scal) {
        sc = &scal;
        std::vector<Trip> t;
        t.reserve(f.A.nonZeros() * 2 + f.G.nonZeros() * 2 + dim + m * 4);
        for (int k = 0; k < f.A.outerSize(); ++k)
            for (SpMat::InnerIterator it(f.A, k); it; ++it) {
                t.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()),
                               it.value());
                t.emplace_back(static_cast<int>(it.col()), n + static_cast<int>(it.row()),
                               it.value());
            }
        for (int k = 0; k < f.G.outerSize(); ++k)
            for (SpMat::InnerIterator it(f.G, k); it; ++it) {
                t.emplace_back(n + p + static_cast<int>(it.row()), static_cast<int>(it.col()),
                               it.value());
                t.emplace_back(static_cast<int>(it.col()), n + p + static_cast<int>(it.row()),
                               it.value());
            }
        // -W'W
        for (int i = 0; i < f.dims.l; ++i) {
            double w2 = scal.identity ? 1.0 : scal.w_lin[i] * scal.w_lin[i];
            t.emplace_back(n + p + i, n + p + i, -w2);
        }
        int bi = 0;
        ops.for_blocks([&](int off, int k) {
            Eigen::MatrixXd w2(k, k);
            if (scal.identity) {
                w2.setIdentity();
            } else {
                // W^2 = eta^2 * (2 wbar wbar' - J)
                const auto& blk = scal.socs[bi];
                w2 = 2.0 * (blk.eta * blk.eta) * blk.wbar * blk.wbar.transpose();
                for (int i = 0; i < k; ++i)
                    w2(i, i) += (blk.eta * blk.eta) * (i == 0 ? -1.0 : 1.0);
            }
            ++bi;
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    t.emplace_back(n + p + off + i, n + p + off + j, -w2(i, j));
        });
        SpMat kmat(dim, dim);
        kmat.setFromTriplets(t.begin(), t.end());

        // Ruiz equilibration keeps the mix of O(1/mu) and O(mu) scaling
        // blocks from destroying the factorization accuracy
        dscale = Vec::Ones(dim);
        for (int pass = 0; pass < 3; ++pass) {
            Vec rmax = Vec::Zero(dim);
            for (int k = 0; k < kmat.outerSize(); ++k)
                for (SpMat::InnerIterator it(kmat, k); it; ++it) {
                    double v = std::abs(it.value()) * dscale[it.row()] * dscale[it.col()];
                    rmax[it.row()] = std::max(rmax[it.row()], v);
                }
            for (int i = 0; i < dim; ++i)
                if (rmax[i] > 0.0) dscale[i] /= std::sqrt(rmax[i]);
        }
        for (int k = 0; k < kmat.outerSize(); ++k)
            for (SpMat::InnerIterator it(kmat, k); it; ++it)
                it.valueRef() *= dscale[it.row()] * dscale[it.col()];
        // signed static regularization, uniform in the equilibrated frame;
        // escalate if the factorization still hits a zero pivot
        for (double reg = kReg; reg <= 1e-6; reg *= 100.0) {
            std::vector<Trip> rt;
            rt.reserve(dim);
            for (int i = 0; i < dim; ++i) rt.emplace_back(i, i, i < n ? reg : -reg);
            SpMat regm(dim, dim);
            regm.setFromTriplets(rt.begin(), rt.end());
            SpMat kreg = kmat + regm;
            if (!analyzed) {
                ldlt.analyzePattern(kreg);
                analyzed = true;
            }
            ldlt.factorize(kreg);
            if (ldlt.info() == Eigen::Success) return true;
        }
        return false;
    }

    // unregularized K0 * v, for iterative refinement
    Vec apply_k0(const Vec& v) const {
        Vec r = Vec::Zero(dim);
        auto vx = v.head(n);
        auto vy = v.segment(n, p);
        auto vz = v.tail(m);
        r.head(n) = f.A.transpose() * vy + f.G.transpose() * vz;
        r.segment(n, p) = f.A * vx;
        Vec wwz = apply_w(ops, *sc, apply_w(ops, *sc, vz));
        r.tail(m) = f.G * vx - wwz;
        return r;
    }

    Vec solve3(const Vec& bx, const Vec& by, const Vec& bz) const {
        Vec rhs(dim);
        rhs.head(n) = bx;
        rhs.segment(n, p) = by;
        if (m > 0) rhs.tail(m) = bz;
        auto reg_solve = [&](const Vec& r) -> Vec {
            return dscale.cwiseProduct(ldlt.solve(dscale.cwiseProduct(r).eval()));
        };
        Vec sol = reg_solve(rhs);
        double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
        Vec best = sol;
        double best_res = kHuge;
        for (int round = 0; round < 30; ++round) {
            Vec resid = rhs - apply_k0(sol);
            double rn = resid.lpNorm<Eigen::Infinity>() / scale;
            if (rn < best_res) {
                best_res = rn;
                best = sol;
            } else {
                break; // refinement stopped improving
            }
            if (rn < 1e-14) break;
            sol += reg_solve(resid);
        }
        if (debug_refine)
            std::fprintf(stderr, "      refine best_res %.3e scale %.3e\n", best_res, scale);
        return best;
    }
};

double safe_norm1p(const Vec& v) { return 1.0 + v.norm(); }

// Least-norm primal correction against the original-frame data: pins the
// equality rows plus the active or violated inequality rows and projects the
// iterate onto them. Interior-point iterates carry O(solver tolerance) cone
// violations; this removes them without disturbing the inactive rows.
void polish_primal(const InternalForm& f0, const ConeOps& ops, Vec& x, const Vec& z) {
    int n = f0.n, p = static_cast<int>(f0.b.size());
    Eigen::SparseMatrix<double, Eigen::RowMajor> gr(f0.G);
    for (int pass = 0; pass < 2; ++pass) {
        Vec slack = f0.h - f0.G * x;
        std::vector<Trip> et;
        std::vector<double> rhs;
        int row = 0;
        for (int k = 0; k < f0.A.outerSize(); ++k)
            for (SpMat::InnerIterator it(f0.A, k); it; ++it)
                et.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                it.value());
        Vec req = f0.b - f0.A * x;
        for (int i = 0; i < p; ++i) rhs.push_back(req[i]);
        row = p;
        for (int i = 0; i < f0.dims.l; ++i) {
            if (!(slack[i] < 0.0 || z[i] > slack[i])) continue;
            for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gr, i); it;
                 ++it)
                et.emplace_back(row, static_cast<int>(it.col()), it.value());
            rhs.push_back(slack[i]);
            ++row;
        }
        ops.for_blocks([&](int off, int k) {
            auto sb = slack.segment(off, k);
            double tn = sb.tail(k - 1).norm();
            double sgap = sb[0] - tn;
            bool active = sgap < 0.0 || z[off] > sgap;
            if (!active) return;
            // an active block whose dual also sits on the cone boundary leaks
            // duality gap when the two rays are misaligned; one extra row per
            // such block rotates the slack toward the dual ray to first order
            Vec zb = z.segment(off, k);
            double zbn = zb.norm();
            double prod = sb.dot(zb);
            if (z[off] > 1e-6 && zb.tail(k - 1).norm() > 0.5 * z[off] &&
                std::abs(prod) > 1e-9 && std::abs(prod) < 1e-3 * zbn) {
                for (int j = 0; j < k; ++j) {
                    if (zb[j] == 0.0) continue;
                    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(
                             gr, off + j);
                         it; ++it)
                        et.emplace_back(row, static_cast<int>(it.col()),
                                        (zb[j] / zbn) * it.value());
                }
                rhs.push_back(prod / zbn);
                ++row;
            }
            if (tn < 1e-300) {
                for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gr, off);
                     it; ++it)
                    et.emplace_back(row, static_cast<int>(it.col()), it.value());
            } else {
                // linearized boundary row: (G_head - u' G_tail) d = sgap with
                // u the unit tail direction; the correction is tiny so the
                // linearization error is second order
                Vec u = sb.tail(k - 1) / tn;
                for (int j = 0; j < k; ++j) {
                    double coef = j == 0 ? 1.0 : -u[j - 1];
                    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(
                             gr, off + j);
                         it; ++it)
                        et.emplace_back(row, static_cast<int>(it.col()),
                                        coef * it.value());
                }
            }
            rhs.push_back(sgap);
            ++row;
        });
        if (row == 0) return;
        // pin the dual pairing <h - Gx, z> as well, so the correction cannot
        // drift along the dual gradient and reopen the objective gap
        {
            Vec grad = f0.G.transpose() * z;
            double gn = grad.norm();
            if (gn > 1e-300) {
                for (int j = 0; j < n; ++j)
                    if (grad[j] != 0.0) et.emplace_back(row, j, grad[j] / gn);
                rhs.push_back(slack.dot(z) / gn);
                ++row;
            }
        }
        SpMat emat(row, n);
        emat.setFromTriplets(et.begin(), et.end());
        Vec r = Eigen::Map<Vec>(rhs.data(), row);
        if (pass > 0 && r.lpNorm<Eigen::Infinity>() < 1e-15) return;
        SpMat mmat = (emat * SpMat(emat.transpose())).pruned();
        double dmax = 0.0;
        for (int i = 0; i < row; ++i) dmax = std::max(dmax, std::abs(mmat.coeff(i, i)));
        SpMat ident(row, row);
        ident.setIdentity();
        SpMat mreg = mmat + (1e-12 * (1.0 + dmax)) * ident;
        Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(mreg);
        if (lu.info() != Eigen::Success) return;
        Vec lam = lu.solve(r);
        for (int it = 0; it < 5; ++it) lam += lu.solve((r - mmat * lam).eval());
        x += emat.transpose() * lam;
    }
}

} // namespace

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::Infeasible: return "Infeasible";
        case SolveStatus::Unbounded: return "Unbounded";
        default: return "NumericalFailure";
    }
}

SolveReport solve(const ConicProgram& prog, const SolverOptions& opts) {
    auto t0 = std::chrono::steady_clock::now();
    SolveReport rep;
    auto finish = [&](SolveStatus st, const std::string& msg) -> SolveReport& {
        rep.status = st;
        rep.message = msg;
        rep.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rep;
    };

    auto issues = prog.validate();
    if (!issues.empty()) throw std::invalid_argument("malformed program: " + issues.front());

    InternalForm f = build_internal(prog);
    if (f.trivially_infeasible) return finish(SolveStatus::Infeasible, f.message);

    int n = f.n, p = static_cast<int>(f.b.size()), m = static_cast<int>(f.h.size());
    ConeOps ops(f.dims);

    // pure equality-constrained programs (no inequality part): solve the KKT
    // system directly
    if (m == 0) {
        KktSolver kkt(f);
        Scaling id;
        id.identity = true;
        if (!kkt.factorize(id))
            return finish(SolveStatus::NumericalFailure, "KKT factorization failed");
        Vec sol = kkt.solve3(-f.c, f.b, Vec());
        rep.x.assign(prog.num_vars(), 0.0);
        for (int i = 0; i < prog.num_vars(); ++i)
            rep.x[i] = f.var_map[i] >= 0 ? sol[f.var_map[i]] : f.fixed_value[i];
        rep.y.assign(sol.data() + n, sol.data() + n + p);
        double pobj = f.c.dot(sol.head(n)) + f.obj_const;
        rep.primal_objective = rep.dual_objective = pobj;
        double res = (f.A * sol.head(n) - f.b).lpNorm<Eigen::Infinity>();
        rep.max_kkt_residual = res;
        if (res > opts.feas_tol * (1.0 + f.b.lpNorm<Eigen::Infinity>()))
            return finish(SolveStatus::Infeasible, "inconsistent equality rows");
        return finish(SolveStatus::Optimal, "equality-constrained solve");
    }

    // keep the original-frame data: the final report is polished and its
    // residuals verified against these, not the equilibrated copies
    InternalForm f0 = f;
    equilibrate(f);
    double nu = static_cast<double>(f.dims.degree());
    Vec e = ops.identity();

    // Unscales an iterate, polishes the primal point, measures the KKT
    // residuals on the original data, and fills the report. Returns whether
    // the measured residuals meet the requested tolerances.
    auto extract = [&](const Vec& xs_v, const Vec& ys_v, const Vec& zs_v,
                       double tau_v) -> bool {
        double xsc = 1.0 / (tau_v * f.rhs_scale);
        double ysc = 1.0 / (tau_v * f.obj_scale);
        Vec x0 = f.dc.cwiseProduct(xs_v) * xsc;
        Vec y0 = f.dra.cwiseProduct(ys_v) * ysc;
        Vec z0 = f.drg.cwiseProduct(zs_v) * ysc;
        polish_primal(f0, ops, x0, z0);
        Vec stat = f0.c + f0.G.transpose() * z0;
        if (f0.b.size() > 0) stat += f0.A.transpose() * y0;
        double stat_r =
            stat.lpNorm<Eigen::Infinity>() / (1.0 + f0.c.lpNorm<Eigen::Infinity>());
        double peq_r = f0.b.size() > 0
                           ? (f0.A * x0 - f0.b).lpNorm<Eigen::Infinity>() /
                                 (1.0 + f0.b.lpNorm<Eigen::Infinity>())
                           : 0.0;
        Vec slack = f0.h - f0.G * x0;
        double pcone_r = std::max(0.0, ops.violation(slack)) /
                         (1.0 + f0.h.lpNorm<Eigen::Infinity>());
        double dcone_r = std::max(0.0, ops.violation(z0));
        double pobj = f0.c.dot(x0) + f0.obj_const;
        double dobj = -(f0.b.dot(y0) + f0.h.dot(z0)) + f0.obj_const;
        double comp_r = std::abs(slack.dot(z0)) / (1.0 + std::abs(pobj));
        double gap_r = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
#ifdef ROPF_COMP_DEBUG
        {
            for (int i = 0; i < f0.dims.l; ++i)
                if (std::abs(slack[i] * z0[i]) > 1e-7)
                    std::fprintf(stderr, "  ortho row %d: s %.3e z %.3e prod %.3e\n", i,
                                 slack[i], z0[i], slack[i] * z0[i]);
            ops.for_blocks([&](int off, int k) {
                double pr = slack.segment(off, k).dot(z0.segment(off, k));
                if (std::abs(pr) > 1e-7) {
                    double tn = slack.segment(off + 1, k - 1).norm();
                    double zn = z0.segment(off + 1, k - 1).norm();
                    std::fprintf(stderr,
                                 "  soc blk off %d k %d: s0 %.6e |st| %.6e z0 %.6e |zt| "
                                 "%.6e prod %.3e cosang %.9f\n",
                                 off, k, slack[off], tn, z0[off], zn, pr,
                                 tn > 0 && zn > 0
                                     ? -slack.segment(off + 1, k - 1)
                                               .dot(z0.segment(off + 1, k - 1)) /
                                           (tn * zn)
                                     : 0.0);
                }
            });
        }
#endif
        rep.x.assign(prog.num_vars(), 0.0);
        for (int i = 0; i < prog.num_vars(); ++i)
            rep.x[i] = f.var_map[i] >= 0 ? x0[f.var_map[i]] : f.fixed_value[i];
        rep.y.assign(y0.data(), y0.data() + y0.size());
        rep.z_internal.assign(z0.data(), z0.data() + z0.size());
        rep.s_internal.assign(slack.data(), slack.data() + slack.size());
        rep.primal_objective = pobj;
        rep.dual_objective = dobj;
        rep.max_kkt_residual = std::max({stat_r, peq_r, pcone_r, dcone_r, comp_r});
        if (opts.verbose)
            std::fprintf(stderr,
                         "    extract: stat %.2e peq %.2e pcone %.2e dcone %.2e comp %.2e "
                         "gap %.2e\n",
                         stat_r, peq_r, pcone_r, dcone_r, comp_r, gap_r);
        return stat_r <= opts.feas_tol && peq_r <= opts.feas_tol &&
               pcone_r <= opts.feas_tol && dcone_r <= opts.feas_tol &&
               comp_r <= opts.gap_tol && gap_r <= opts.gap_tol;
    };

    // initialization: one KKT solve with W = I (cvxopt-style)
    KktSolver kkt(f);
    kkt.debug_refine = opts.verbose;
    Scaling id;
    id.identity = true;
    if (!kkt.factorize(id))
        return finish(SolveStatus::NumericalFailure, "initial KKT factorization failed");
    Vec x, y, s, z;
    {
        Vec solp = kkt.solve3(Vec::Zero(n), f.b, f.h);
        x = solp.head(n);
        Vec shat = -(solp.tail(m)); // row3: Gx - z = h  =>  h - Gx = -z
        double alpha = ops.violation(shat);
        s = alpha < 0.0 ? shat : (shat + (1.0 + alpha) * e).eval();

        Vec sold = kkt.solve3(-f.c, Vec::Zero(p), Vec::Zero(m));
        y = sold.segment(n, p);
        Vec zhat = sold.tail(m);
        alpha = ops.violation(zhat);
        z = alpha < 0.0 ? zhat : (zhat + (1.0 + alpha) * e).eval();
    }
    double tau = 1.0, kappa = 1.0;

    double cnorm_orig =
        1.0 + (f.c.cwiseQuotient(f.dc) / f.obj_scale).lpNorm<Eigen::Infinity>();
    double bnorm_orig =
        1.0 + (p > 0 ? (f.b.cwiseQuotient(f.dra) / f.rhs_scale).lpNorm<Eigen::Infinity>() : 0.0);
    double hnorm_orig =
        1.0 + (f.h.cwiseQuotient(f.drg) / f.rhs_scale).lpNorm<Eigen::Infinity>();
    Scaling sc;
    Vec dx, dy, dz, ds;
    double dtau = 0.0, dkappa = 0.0;

    // best iterate seen so far, for a final polish attempt when the endgame
    // factorizations degrade before the raw residuals pass
    Vec best_x, best_y, best_z;
    double best_tau = 1.0, best_merit = kHuge;
    auto terminal = [&](const char* msg) -> SolveReport& {
        if (best_merit < kHuge && extract(best_x, best_y, best_z, best_tau))
            return finish(SolveStatus::Optimal, "converged after polish");
        return finish(SolveStatus::NumericalFailure, msg);
    };

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        rep.iterations = iter;
        Vec res_x = f.A.transpose() * y + f.G.transpose() * z + f.c * tau;
        Vec res_y = f.A * x - f.b * tau;
        Vec res_z = f.G * x + s - f.h * tau;
        double res_t = f.c.dot(x) + f.b.dot(y) + f.h.dot(z) + kappa;

        // residual norms measured against the original (unequilibrated) data,
        // matching kkt_residuals
        double obj_unscale = 1.0 / (f.obj_scale * f.rhs_scale);
        double pcost = f.c.dot(x) / tau * obj_unscale;
        double dcost = -(f.b.dot(y) + f.h.dot(z)) / tau * obj_unscale;
        double gap = s.dot(z) / (tau * tau) * obj_unscale;
        double relgap = gap / (1.0 + std::abs(pcost + f.obj_const));
        double pres = std::max(
            res_y.cwiseQuotient(f.dra).lpNorm<Eigen::Infinity>() / (f.rhs_scale * bnorm_orig),
            res_z.cwiseQuotient(f.drg).lpNorm<Eigen::Infinity>() / (f.rhs_scale * hnorm_orig)) /
            tau;
        double dres = res_x.cwiseQuotient(f.dc).lpNorm<Eigen::Infinity>() /
                      (f.obj_scale * cnorm_orig * tau);

        if (opts.verbose)
            std::fprintf(stderr,
                         "iter %3d  pcost % .6e  dcost % .6e  gap %.3e  pres %.3e  dres %.3e  "
                         "tau %.3e  kappa %.3e\n",
                         iter, pcost, dcost, gap, pres, dres, tau, kappa);

        double merit = std::max({pres, dres, relgap});
        if (!std::isfinite(merit) || !std::isfinite(gap))
            return terminal("iterate became non-finite");
        if (merit < best_merit) {
            best_merit = merit;
            best_x = x;
            best_y = y;
            best_z = z;
            best_tau = tau;
        }

        // the raw iterate residuals floor above the tolerance on hard
        // problems while the polished point passes, so attempt extraction as
        // soon as the dual side and the gap have converged
        if (dres <= opts.feas_tol && (relgap <= opts.gap_tol || gap <= opts.gap_tol) &&
            pres <= std::max(opts.feas_tol, 1e-5)) {
            if (extract(x, y, z, tau)) return finish(SolveStatus::Optimal, "converged");
        }

        // infeasibility certificates
        double byhz = f.b.dot(y) + f.h.dot(z);
        if (byhz < 0.0) {
            double pinf = (f.A.transpose() * y + f.G.transpose() * z).norm() /
                          (-byhz * safe_norm1p(f.c));
            if (pinf <= opts.feas_tol && ops.violation(z) <= opts.feas_tol) {
                rep.y.resize(p);
                for (int i = 0; i < p; ++i) rep.y[i] = f.dra[i] * y[i] / (-byhz);
                rep.z_internal.resize(m);
                for (int i = 0; i < m; ++i) rep.z_internal[i] = f.drg[i] * z[i] / (-byhz);
                return finish(SolveStatus::Infeasible, "primal infeasibility certificate");
            }
        }
        double cx = f.c.dot(x);
        if (cx < 0.0) {
            double dinf = std::max((f.A * x).norm() / safe_norm1p(f.b),
                                   (f.G * x + s).norm() / safe_norm1p(f.h)) /
                          (-cx);
            if (dinf <= opts.feas_tol) {
                rep.x.assign(prog.num_vars(), 0.0);
                for (int i = 0; i < prog.num_vars(); ++i)
                    rep.x[i] = f.var_map[i] >= 0 ? f.dc[f.var_map[i]] * x[f.var_map[i]] / (-cx)
                                                 : 0.0;
                return finish(SolveStatus::Unbounded, "dual infeasibility certificate");
            }
        }

        if (!compute_scaling(ops, s, z, sc))
            return terminal("iterate left the cone interior");
        double mu = (s.dot(z) + tau * kappa) / (nu + 1.0);
        if (!kkt.factorize(sc))
            return terminal("KKT factorization failed");

        // once kappa is negligible the tau coordinate has converged; freezing
        // it avoids the ill-conditioned homogenizing solve near optimality
        bool fix_tau = kappa < 1e-8 * tau;
        Vec vx, vy, vz;
        double den = 0.0;
        if (!fix_tau) {
            Vec solv = kkt.solve3(-f.c, f.b, f.h);
            vx = solv.head(n);
            vy = solv.segment(n, p);
            vz = solv.tail(m);
            den = f.c.dot(vx) + f.b.dot(vy) + f.h.dot(vz) - kappa / tau;
            if (std::abs(den) < 1e-300)
                return terminal("degenerate tau step");
        }

        Vec lam2 = ops.jprod(sc.lambda, sc.lambda);

        auto take_step = [&](const Vec& d_s, double d_tk, double res_scale) {
            Vec wjd = apply_w(ops, sc, ops.jdiv(sc.lambda, d_s));
            Vec bz = -res_scale * res_z - wjd;
            Vec solu = kkt.solve3(-res_scale * res_x, -res_scale * res_y, bz);
            Vec ux = solu.head(n), uy = solu.segment(n, p), uz = solu.tail(m);
            if (fix_tau) {
                dtau = 0.0;
                dx = ux;
                dy = uy;
                dz = uz;
            } else {
                double num = -res_scale * res_t - d_tk / tau -
                             (f.c.dot(ux) + f.b.dot(uy) + f.h.dot(uz));
                dtau = num / den;
                dx = ux + dtau * vx;
                dy = uy + dtau * vy;
                dz = uz + dtau * vz;
            }
            ds = apply_w(ops, sc, ops.jdiv(sc.lambda, d_s) - apply_w(ops, sc, dz));
            dkappa = (d_tk - kappa * dtau) / tau;
        };

        // predictor
        take_step(-lam2, -tau * kappa, 1.0);
        double t_aff = std::min({ops.max_step(s, ds), ops.max_step(z, dz),
                                 dtau < 0.0 ? -tau / dtau : kHuge,
                                 dkappa < 0.0 ? -kappa / dkappa : kHuge});
        double alpha_aff = std::min(1.0, t_aff);
        double sigma = std::pow(1.0 - alpha_aff, 3);

        // corrector
        Vec corr = ops.jprod(apply_winv(ops, sc, ds), apply_w(ops, sc, dz));
        Vec d_s = sigma * mu * e - lam2 - corr;
        double d_tk = sigma * mu - tau * kappa - dtau * dkappa;
        take_step(d_s, d_tk, 1.0 - sigma);

        if (opts.verbose) {
            Vec chk = f.G * dx + ds - f.h * dtau + (1.0 - sigma) * res_z;
            Vec chk1 = f.A.transpose() * dy + f.G.transpose() * dz + f.c * dtau +
                       (1.0 - sigma) * res_x;
            Vec chk2 = f.A * dx - f.b * dtau + (1.0 - sigma) * res_y;
            std::fprintf(stderr, "      newton resid r1 %.3e r2 %.3e r3 %.3e\n",
                         chk1.norm(), chk2.norm(), chk.norm());
        }
        double t_max = std::min({ops.max_step(s, ds), ops.max_step(z, dz),
                                 dtau < 0.0 ? -tau / dtau : kHuge,
                                 dkappa < 0.0 ? -kappa / dkappa : kHuge});
        double alpha = std::min(1.0, 0.99 * t_max);
        if (opts.verbose)
            std::fprintf(stderr, "      alpha_aff %.3e sigma %.3e alpha %.3e mu %.3e\n",
                         alpha_aff, sigma, alpha, mu);
        if (alpha < 1e-12)
            return terminal("step length collapsed");

        // roundoff in max_step can land exactly on the boundary; back off
        // until the new iterate is strictly interior
        for (int bt = 0; bt < 40; ++bt) {
            if (ops.violation(s + alpha * ds) < 0.0 && ops.violation(z + alpha * dz) < 0.0 &&
                tau + alpha * dtau > 0.0 && kappa + alpha * dkappa > 0.0)
                break;
            alpha *= 0.5;
        }

        x += alpha * dx;
        y += alpha * dy;
        z += alpha * dz;
        s += alpha * ds;
        tau += alpha * dtau;
        kappa += alpha * dkappa;
        if (tau <= 0.0 || kappa <= 0.0)
            return terminal("tau or kappa became nonpositive");
        // the embedding is homogeneous: renormalize so tau = 1 to keep the
        // iterate well-scaled
        double inv = 1.0 / tau;
        x *= inv;
        y *= inv;
        z *= inv;
        s *= inv;
        kappa *= inv;
        tau = 1.0;
    }
    return terminal("iteration limit reached");
}

KktResiduals kkt_residuals(const ConicProgram& prog, const SolveReport& report) {
    InternalForm f = build_internal(prog);
    int n = f.n, p = static_cast<int>(f.b.size()), m = static_cast<int>(f.h.size());
    if (static_cast<int>(report.y.size()) != p ||
        (m > 0 && static_cast<int>(report.z_internal.size()) != m))
        throw std::invalid_argument("kkt_residuals: missing or mismatched dual multipliers");
    if (static_cast<int>(report.x.size()) != prog.num_vars())
        throw std::invalid_argument("kkt_residuals: missing primal solution");

    Vec x(n);
    for (int i = 0; i < prog.num_vars(); ++i)
        if (f.var_map[i] >= 0) x[f.var_map[i]] = report.x[i];
    Vec y = Eigen::Map<const Vec>(report.y.data(), p);
    Vec z = m > 0 ? Eigen::Map<const Vec>(report.z_internal.data(), m) : Vec(0);

    ConeOps ops(f.dims);
    KktResiduals out;
    Vec stat = f.c + f.A.transpose() * y;
    if (m > 0) stat += f.G.transpose() * z;
    out.stationarity = stat.lpNorm<Eigen::Infinity>() /
                       (1.0 + f.c.lpNorm<Eigen::Infinity>());
    out.primal_eq = p > 0 ? (f.A * x - f.b).lpNorm<Eigen::Infinity>() /
                                (1.0 + f.b.lpNorm<Eigen::Infinity>())
                          : 0.0;
    if (m > 0) {
        Vec slack = f.h - f.G * x;
        out.primal_cone = std::max(0.0, ops.violation(slack)) /
                          (1.0 + f.h.lpNorm<Eigen::Infinity>());
        out.dual_cone = std::max(0.0, ops.violation(z));
        double pcost = f.c.dot(x) + f.obj_const;
        out.complementarity = std::abs(slack.dot(z)) / (1.0 + std::abs(pcost));
    }
    out.max_residual = std::max({out.stationarity, out.primal_eq, out.primal_cone,
                                 out.dual_cone, out.complementarity});
    return out;
}

} // namespace ropf
