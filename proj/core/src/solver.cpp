#include "springopt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#ifdef SPRINGOPT_HAVE_KLU
#include <Eigen/KLUSupport>
#else
#include <Eigen/SparseLU>
#endif

#include "springopt/error.hpp"

namespace springopt {

namespace {

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

double sparse_row_max(const SparseVector& v) {
    double m = 0.0;
    for (SparseVector::InnerIterator it(v); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

/// Row- and cost-normalized copy of the problem. x is not rescaled.
struct Scaled {
    Qcqp prob;
    Vector w_ineq;  ///< f_scaled = w .* f
    Vector w_eq;    ///< (Ax - b)_scaled = w .* (Ax - b)
    double w_obj = 1.0;
};

Scaled normalize(const Qcqp& in) {
    Scaled s;
    s.prob = in;
    Qcqp& p = s.prob;

    double obj = 0.0;
    for (int col = 0; col < p.P.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(p.P, col); it; ++it) obj = std::max(obj, std::abs(it.value()));
    obj = std::max(obj, inf_norm(p.c));
    s.w_obj = obj > 0.0 ? 1.0 / obj : 1.0;
    p.P *= s.w_obj;
    p.c *= s.w_obj;
    p.c0 *= s.w_obj;

    auto row_scale = [](const SparseMatrix& M) {
        Vector m = Vector::Zero(M.rows());
        for (int col = 0; col < M.outerSize(); ++col)
            for (SparseMatrix::InnerIterator it(M, col); it; ++it)
                m[it.row()] = std::max(m[it.row()], std::abs(it.value()));
        for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = m[i] > 0.0 ? 1.0 / m[i] : 1.0;
        return m;
    };

    const Vector wl = row_scale(p.G);
    const Vector we = row_scale(p.A);
    p.G = wl.asDiagonal() * p.G;
    p.h = wl.cwiseProduct(p.h);
    p.A = we.asDiagonal() * p.A;
    p.b = we.cwiseProduct(p.b);

    const int ml = p.num_linear();
    s.w_ineq.resize(p.num_inequalities());
    s.w_ineq.head(ml) = wl;
    for (int k = 0; k < p.num_quadratic(); ++k) {
        auto& q = p.quad[k];
        const double um = sparse_row_max(q.u);
        const double m = std::max(um * um, sparse_row_max(q.g));
        const double w = m > 0.0 ? 1.0 / m : 1.0;
        q.u *= std::sqrt(w);
        q.g *= w;
        q.h *= w;
        s.w_ineq[ml + k] = w;
    }
    s.w_eq = we;
    return s;
}

/// Hessian of the Lagrangian in x: P + sum_k 2 z_k u_k u_k'.
void add_curvature(std::vector<Triplet>& t, const Qcqp& p, const Vector& z) {
    const int ml = p.num_linear();
    for (int k = 0; k < p.num_quadratic(); ++k) {
        const double zk = 2.0 * z[ml + k];
        const auto& u = p.quad[k].u;
        for (SparseVector::InnerIterator a(u); a; ++a)
            for (SparseVector::InnerIterator b(u); b; ++b)
                t.emplace_back(a.index(), b.index(), zk * a.value() * b.value());
    }
}

struct Residuals {
    Vector rd;  ///< P x + c + J'z + A'y
    Vector rp;  ///< f(x) + s
    Vector re;  ///< A x - b
};

Residuals residuals(const Qcqp& p, const SparseMatrix& J, const Vector& x, const Vector& s,
                    const Vector& z, const Vector& y) {
    Residuals r;
    r.rd = p.P * x + p.c;
    if (J.rows()) r.rd += J.transpose() * z;
    if (p.A.rows()) r.rd += p.A.transpose() * y;
    r.rp = p.inequality_values(x) + s;
    r.re = p.A * x - p.b;
    return r;
}

double max_step(const Vector& v, const Vector& dv) {
    double a = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
    return a;
}

}  // namespace

void SolverConfig::validate() const {
    if (!(tol_gap > 0.0) || !(tol_feas > 0.0)) throw InputError("solver tolerances must be positive");
    if (max_iter < 1) throw InputError("solver max_iter must be >= 1");
    if (!(regularization >= 0.0)) throw InputError("solver regularization must be >= 0");
    if (stall_window < 2) throw InputError("solver stall_window must be >= 2");
}

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::max_iter: return "max_iter";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
    }
    return "unknown";
}

bool KktResiduals::within(const SolverConfig& cfg) const {
    return stationarity <= cfg.tol_feas && primal <= cfg.tol_feas && dual <= cfg.tol_feas &&
           complementarity <= cfg.tol_gap && gap <= cfg.tol_gap;
}

KktResiduals kkt_residuals(const Qcqp& prob, const Vector& x, const Multipliers& mult) {
    KktResiduals k;
    const Vector f = prob.inequality_values(x);
    const SparseMatrix J = prob.inequality_jacobian(x);
    const Vector grad = prob.P * x + prob.c;
    Vector jz = Vector::Zero(prob.n), ay = Vector::Zero(prob.n);
    if (f.size()) jz = J.transpose() * mult.z;
    if (prob.A.rows()) ay = prob.A.transpose() * mult.y;
    const double big = std::max({inf_norm(grad), inf_norm(jz), inf_norm(ay), inf_norm(prob.P * x)});
    k.stationarity = inf_norm(grad + jz + ay) / (1.0 + big);

    const Vector r = prob.A * x - prob.b;
    double viol = inf_norm(r);
    for (Eigen::Index i = 0; i < f.size(); ++i) viol = std::max(viol, f[i]);
    double bound = std::max(inf_norm(prob.b), inf_norm(prob.h));
    for (const auto& q : prob.quad) bound = std::max(bound, std::abs(q.h));
    k.primal = viol / (1.0 + bound);

    k.dual = f.size() ? std::max(0.0, -mult.z.minCoeff()) / (1.0 + inf_norm(mult.z)) : 0.0;
    // Violations are charged to `primal`; complementarity and gap use the
    // feasible part of each row so that one residual is not counted twice.
    const double obj = std::abs(prob.objective(x));
    double comp = 0.0, gap = 0.0;
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        const double term = std::abs(mult.z[i]) * std::max(-f[i], 0.0);
        comp = std::max(comp, term);
        gap += term;
    }
    k.complementarity = comp / (1.0 + obj);
    k.gap = gap / (1.0 + obj);
    return k;
}

void write_iteration_header(std::ostream& out) {
    out << "iter      objective      primal        dual         mu      alpha   sigma\n";
}

QcqpResult solve_qcqp(const Qcqp& original, const SolverConfig& cfg, const Vector* x0) {
    cfg.validate();
    original.validate();
    const Scaled sc = normalize(original);
    const Qcqp& p = sc.prob;
    const int n = p.n;
    const int m = p.num_inequalities();
    const int me = p.num_equalities();

    QcqpResult res;
    Vector x = x0 ? *x0 : Vector::Zero(n);
    if (x.size() != n) throw InputError("initial point has wrong dimension");
    if (!x.allFinite()) throw InputError("initial point is not finite");

    Vector f = p.inequality_values(x);
    Vector s(m), z(m), y = Vector::Zero(me);
    for (int i = 0; i < m; ++i) {
        s[i] = std::max(-f[i], 1.0);
        z[i] = 1.0;
    }

    const double data_scale = 1.0 + std::max(inf_norm(p.c), std::max(inf_norm(p.b), inf_norm(p.h)));
    const double x_scale0 = 1.0 + inf_norm(x);

    double pres0 = 1.0, dres0 = 1.0, mu0 = 1.0;
    double best_primal = std::numeric_limits<double>::infinity();
    int since_progress = 0;
    double z_at_best = 1.0;
    int iter = 0;
    bool converged = false;
    std::string message;
    SolveStatus status = SolveStatus::max_iter;

    // Pivoting LU of the full symmetric matrix: the barrier block spans many
    // decades, which defeats pivot-free LDL'.
#ifdef SPRINGOPT_HAVE_KLU
    Eigen::KLU<SparseMatrix> lu;
#else
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
#endif
    if (cfg.log) write_iteration_header(*cfg.log);

    for (; iter <= cfg.max_iter; ++iter) {
        const SparseMatrix J = p.inequality_jacobian(x);
        const Residuals r = residuals(p, J, x, s, z, y);
        const double mu = m ? s.dot(z) / m : 0.0;
        const double obj = p.objective(x);

        const double pres = std::max(inf_norm(r.rp), inf_norm(r.re)) / data_scale;
        double big = std::max(inf_norm(p.c), inf_norm(p.P * x));
        if (m) big = std::max(big, inf_norm(J.transpose() * z));
        if (me) big = std::max(big, inf_norm(p.A.transpose() * y));
        // Same normalization as the certification in original units.
        const double dres = inf_norm(r.rd) / (sc.w_obj + big);
        const double gap = (m ? s.dot(z) / sc.w_obj : 0.0) / (1.0 + std::abs(obj / sc.w_obj));
        if (cfg.log) {
            char line[160];
            std::snprintf(line, sizeof line, "%4d %14.7e %11.3e %11.3e %11.3e", iter, obj / sc.w_obj, pres,
                          dres, mu);
            *cfg.log << line;
        }
        // Certification uses the caller's problem and units.
        Multipliers mo;
        mo.z = m ? Vector(z.cwiseProduct(sc.w_ineq) / sc.w_obj) : Vector();
        mo.y = me ? Vector(y.cwiseProduct(sc.w_eq) / sc.w_obj) : Vector();
        if (pres <= cfg.tol_feas && dres <= cfg.tol_feas && gap <= cfg.tol_gap &&
            kkt_residuals(original, x, mo).within(cfg)) {
            converged = true;
            if (cfg.log) *cfg.log << '\n';
            break;
        }
        if (iter == 0) {
            pres0 = std::max(pres, cfg.tol_feas);
            dres0 = std::max(dres, cfg.tol_feas);
            mu0 = std::max(mu, 1e-300);
        }
        if (iter == cfg.max_iter) {
            if (cfg.log) *cfg.log << '\n';
            message = "iteration limit reached";
            break;
        }

        // Infeasibility: primal residual stalls while the duals blow up.
        if (pres < 0.9 * best_primal) {
            best_primal = pres;
            since_progress = 0;
            z_at_best = m ? std::max(1.0, inf_norm(z)) : 1.0;
        } else if (++since_progress >= cfg.stall_window && pres > cfg.tol_feas) {
            const double zn = m ? inf_norm(z) : 0.0;
            const double yn = me ? inf_norm(y) : 0.0;
            // A converged dual with a stuck primal means the iterate already
            // sits at the least-violating point.
            const bool dual_settled = dres <= cfg.tol_feas && pres > 1e3 * cfg.tol_feas;
            if (std::max(zn, yn) > 1e3 * z_at_best || mu < 1e-3 * cfg.tol_gap || dual_settled) {
                status = SolveStatus::infeasible;
                message = "primal residual stalled; the constraints appear infeasible";
                if (cfg.log) *cfg.log << '\n';
                break;
            }
        }
        if (inf_norm(x) > 1e12 * x_scale0) {
            status = SolveStatus::unbounded;
            message = "iterates diverged with decreasing objective";
            if (cfg.log) *cfg.log << '\n';
            break;
        }

        // Augmented quasi-definite KKT matrix (lower triangle)
        //   [ W + rho I    J'           A'       ]
        //   [ J           -S/Z - dI     0        ]
        //   [ A            0           -delta I  ]
        // The barrier block stays on its own diagonal; folding J'(Z/S)J into W
        // would bury the small eigenvalues of P under entries of order 1/mu.
        std::vector<Triplet> t;
        t.reserve(p.P.nonZeros() + 9 * p.num_quadratic() + J.nonZeros() + p.A.nonZeros() + n + m + me);
        for (int col = 0; col < p.P.outerSize(); ++col)
            for (SparseMatrix::InnerIterator it(p.P, col); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
        add_curvature(t, p, z);
        SparseMatrix W(n, n);
        W.setFromTriplets(t.begin(), t.end());
        double diag_scale = 1.0;
        for (int i = 0; i < n; ++i) diag_scale = std::max(diag_scale, std::abs(W.coeff(i, i)));
        const double rho = std::max(cfg.regularization * diag_scale, 1e-14);
        const double delta = std::max(cfg.regularization, 1e-14);
        const Vector sz = m ? Vector(s.cwiseQuotient(z)) : Vector();

        const int nk = n + m + me;
        t.clear();
        for (int col = 0; col < W.outerSize(); ++col)
            for (SparseMatrix::InnerIterator it(W, col); it; ++it)
                if (it.row() >= it.col()) t.emplace_back(it.row(), it.col(), it.value());
        for (int col = 0; col < J.outerSize(); ++col)
            for (SparseMatrix::InnerIterator it(J, col); it; ++it) t.emplace_back(n + it.row(), it.col(), it.value());
        for (int col = 0; col < p.A.outerSize(); ++col)
            for (SparseMatrix::InnerIterator it(p.A, col); it; ++it)
                t.emplace_back(n + m + it.row(), it.col(), it.value());
        SparseMatrix K0(nk, nk);
        {
            std::vector<Triplet> t0 = t;
            for (int i = 0; i < m; ++i) t0.emplace_back(n + i, n + i, -sz[i]);
            K0.setFromTriplets(t0.begin(), t0.end());
        }
        for (int i = 0; i < n; ++i) t.emplace_back(i, i, rho);
        for (int i = 0; i < m; ++i) t.emplace_back(n + i, n + i, -sz[i] - delta);
        for (int i = 0; i < me; ++i) t.emplace_back(n + m + i, n + m + i, -delta);
        SparseMatrix K(nk, nk);
        K.setFromTriplets(t.begin(), t.end());
        // Unregularized operator for iterative refinement.
        const SparseMatrix K0full = SparseMatrix(K0.selfadjointView<Eigen::Lower>());

        lu.compute(SparseMatrix(K.selfadjointView<Eigen::Lower>()));
        if (lu.info() != Eigen::Success) {
            status = SolveStatus::max_iter;
            message = "KKT factorization failed";
            break;
        }

        // Solve K0 sol = rhs with the regularized factor plus iterative refinement,
        // judged by the componentwise backward error max_i |e_i| / (|K0||sol| + |rhs|)_i.
        const SparseMatrix K0abs = K0full.cwiseAbs();
        auto backward_error = [&](const Vector& rhs, const Vector& sol, const Vector& e) {
            const Vector den = K0abs * sol.cwiseAbs() + rhs.cwiseAbs();
            double w = 0.0;
            for (Eigen::Index i = 0; i < e.size(); ++i) {
                if (e[i] != 0.0) w = std::max(w, den[i] > 0.0 ? std::abs(e[i]) / den[i] : 1.0);
            }
            return w;
        };
        auto solve_kkt = [&](const Vector& rhs) {
            Vector sol = lu.solve(rhs);
            Vector e = rhs - K0full * sol;
            double err = backward_error(rhs, sol, e);
            for (int k = 0; k < 5 && err > 1e-15; ++k) {
                const Vector trial = sol + lu.solve(e);
                const Vector e_trial = rhs - K0full * trial;
                const double err_trial = backward_error(rhs, trial, e_trial);
                if (!(err_trial < 0.5 * err)) break;
                sol = trial;
                e = e_trial;
                err = err_trial;
            }
            return sol;
        };

        // Newton direction for complementarity target rc:
        //   W dx + J'dz + A'dy = -rd,  J dx + ds = -rp,  A dx = -re,  Z ds + S dz = -rc,
        // with ds = -(rc + S dz) / z eliminated exactly.
        auto direction = [&](const Vector& rc, Vector& dx, Vector& ds, Vector& dz, Vector& dy) {
            Vector rhs(nk);
            rhs.head(n) = -r.rd;
            if (m) rhs.segment(n, m) = -r.rp + rc.cwiseQuotient(z);
            rhs.tail(me) = -r.re;
            const Vector sol = solve_kkt(rhs);
            dx = sol.head(n);
            dz = sol.segment(n, m);
            dy = sol.tail(me);
            if (m) {
                ds = -(rc + s.cwiseProduct(dz)).cwiseQuotient(z);
            } else {
                ds.resize(0);
            }
        };

        Vector dx, ds, dz, dy;
        double alpha = 1.0, sigma = 0.0;
        if (m) {
            const Vector rc_aff = s.cwiseProduct(z);
            direction(rc_aff, dx, ds, dz, dy);
            const double a_aff = std::min(max_step(s, ds), max_step(z, dz));
            const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / m;
            sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
            // Do not let mu outrun the residuals: a barrier far ahead of
            // feasibility makes the Newton systems needlessly ill-conditioned.
            const double lag = std::max(pres > cfg.tol_feas ? pres / pres0 : 0.0, dres > cfg.tol_feas ? dres / dres0 : 0.0);
            sigma = std::max(sigma, std::min(1.0, 0.1 * mu0 * lag / mu));
            const Vector rc = rc_aff - Vector::Constant(m, sigma * mu) + ds.cwiseProduct(dz);
            direction(rc, dx, ds, dz, dy);
            alpha = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(z, dz)));
        } else {
            direction(Vector(0), dx, ds, dz, dy);
        }
        if (!dx.allFinite() || !dy.allFinite()) {
            message = "non-finite search direction";
            break;
        }
        if (cfg.log) {
            char line[64];
            std::snprintf(line, sizeof line, " %9.2e %6.3f\n", alpha, sigma);
            *cfg.log << line;
        }

        x += alpha * dx;
        y += alpha * dy;
        if (m) {
            s += alpha * ds;
            z += alpha * dz;
            // Keep the slack consistent with nonlinear rows: never below what the step implies.
            for (int i = 0; i < m; ++i) {
                s[i] = std::max(s[i], 1e-300);
                z[i] = std::max(z[i], 1e-300);
            }
        }
    }

    if (converged) status = SolveStatus::optimal;
    res.status = status;
    res.iterations = iter;
    res.x = x;
    // Undo the row and cost scaling of the multipliers.
    res.multipliers.z = m ? Vector(z.cwiseProduct(sc.w_ineq) / sc.w_obj) : Vector();
    res.multipliers.y = me ? Vector(y.cwiseProduct(sc.w_eq) / sc.w_obj) : Vector();
    res.objective = original.objective(x);
    res.kkt = kkt_residuals(original, x, res.multipliers);
    res.message = converged ? "converged" : message;

    if (status == SolveStatus::infeasible) {
        const Vector fo = original.inequality_values(x);
        const Vector ro = equality_residual(original, x);
        for (Eigen::Index i = 0; i < fo.size(); ++i) {
            if (fo[i] > res.witness_violation) {
                res.witness_violation = fo[i];
                res.witness_index = static_cast<int>(i);
            }
        }
        for (Eigen::Index i = 0; i < ro.size(); ++i) {
            if (std::abs(ro[i]) > res.witness_violation) {
                res.witness_violation = std::abs(ro[i]);
                res.witness_index = static_cast<int>(fo.size() + i);
            }
        }
    }
    return res;
}

}  // namespace springopt
