#include "springopt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "springopt/error.hpp"

namespace springopt {

namespace {

using RowMajor = Eigen::SparseMatrix<double, Eigen::RowMajor>;

SparseVector row_of(const RowMajor& M, int i) {
    SparseVector v(M.cols());
    for (RowMajor::InnerIterator it(M, i); it; ++it) v.insert(it.col()) = it.value();
    return v;
}

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Appends the rows of M (shifted by row_offset) to a triplet list.
void append_rows(std::vector<Triplet>& t, const SparseMatrix& M, int row_offset) {
    for (int col = 0; col < M.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(M, col); it; ++it) t.emplace_back(row_offset + it.row(), it.col(), it.value());
}

}  // namespace

Task make_task(Trajectory traj, const LoadModel& load, const MotorParams& motor) {
    traj.validate();
    load.validate();
    motor.validate();
    Task task;
    task.ops = build_operators(traj.size(), traj.dt);
    task.tau_ela = elastic_torque(traj, load);
    task.trajectory = std::move(traj);
    task.load = load;
    task.motor = motor;
    return task;
}

std::string to_string(EnergyTerms terms) {
    switch (terms) {
        case EnergyTerms::total: return "total";
        case EnergyTerms::joule: return "joule";
        case EnergyTerms::viscous: return "viscous";
    }
    return "total";
}

EnergyTerms parse_energy_terms(const std::string& s) {
    if (s == "total") return EnergyTerms::total;
    if (s == "joule") return EnergyTerms::joule;
    if (s == "viscous") return EnergyTerms::viscous;
    throw InputError("unknown energy terms '" + s + "' (expected total, joule or viscous)");
}

double EnergyCost::evaluate(const Vector& q) const { return q.dot(Q_e * q) + A_e.dot(q) + c_e; }

Vector EnergyCost::gradient(const Vector& q) const { return 2.0 * (Q_e * q) + A_e; }

EnergyCost assemble_energy_cost(const Task& task, EnergyTerms terms) {
    const auto& p = task.motor;
    const auto& ops = task.ops;
    const double dt = ops.dt;
    const double km = p.k_m();
    if (!(km > 0.0)) throw InputError("motor constant must be positive");

    EnergyCost e;
    e.terms = terms;
    e.F = (p.I_m * ops.D2 + p.b_m * ops.D) / km;
    e.c = -task.tau_ela / (p.eta * km * p.r);
    const SparseMatrix DtD = SparseMatrix(ops.D.transpose()) * ops.D;
    const SparseMatrix FtF = SparseMatrix(e.F.transpose()) * e.F;
    const int n = ops.n;

    const bool joule = terms != EnergyTerms::viscous;
    const bool viscous = terms != EnergyTerms::joule;
    e.Q_e.resize(n, n);
    if (joule) e.Q_e = FtF * dt;
    if (viscous) e.Q_e += (p.b_m * dt) * DtD;
    e.Q_e.prune(0.0);
    e.A_e = joule ? Vector(2.0 * dt * (e.F.transpose() * e.c)) : Vector(Vector::Zero(n));
    e.c_e = 0.0;
    if (joule) e.c_e += e.c.squaredNorm() * dt;
    if (terms == EnergyTerms::total) e.c_e -= task.tau_ela.dot(task.trajectory.dq_l) * dt / p.eta;
    return e;
}

Vector PowerTerms::power(const Vector& q) const {
    const Vector dq = D * q;
    return (U * q + h).cwiseProduct(dq);
}

Vector PowerTerms::power_cvx(const Vector& q) const {
    const Vector dq = D * q;
    return (b_m * dq + h).cwiseProduct(dq);
}

SparseVector PowerTerms::cvx_factor(int i) const {
    const RowMajor Dr = D;
    return std::sqrt(b_m) * row_of(Dr, i);
}

SparseVector PowerTerms::H(int i) const {
    const RowMajor Dr = D;
    return h[i] * row_of(Dr, i);
}

SparseMatrix PowerTerms::G(int i) const {
    const RowMajor Ur = U, Dr = D;
    const SparseVector u = row_of(Ur, i), d = row_of(Dr, i);
    return SparseMatrix(u * d.transpose());
}

SparseMatrix PowerTerms::G_cvx(int i) const {
    const SparseVector f = cvx_factor(i);
    return SparseMatrix(f * f.transpose());
}

PowerTerms assemble_power_terms(const Task& task) {
    const auto& p = task.motor;
    PowerTerms t;
    t.D = task.ops.D;
    t.U = p.I_m * task.ops.D2 + p.b_m * task.ops.D;
    t.h = -task.tau_ela / (p.eta * p.r);
    t.b_m = p.b_m;
    return t;
}

std::string to_string(MonotonicityMode mode) {
    return mode == MonotonicityMode::cyclic ? "cyclic" : "global";
}

MonotonicityMode parse_monotonicity_mode(const std::string& s) {
    if (s == "cyclic") return MonotonicityMode::cyclic;
    if (s == "global") return MonotonicityMode::global;
    throw InputError("unknown monotonicity mode '" + s + "' (expected cyclic or global)");
}

double default_eps_strict(const Vector& q_l, double r) {
    const Eigen::Index n = q_l.size();
    double m = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) m = std::max(m, std::abs(q_l[i] - q_l[(i + n - 1) % n]));
    return 1e-8 * r * m;
}

MonotonicityRows assemble_monotonicity(const Vector& tau_ela, const Vector& q_l, double r, double eps_strict,
                                       MonotonicityMode mode, double tie_tolerance) {
    if (tau_ela.size() != q_l.size()) throw InputError("assemble_monotonicity: dimension mismatch");
    if (!(eps_strict >= 0.0)) throw InputError("eps_strict must be >= 0");
    if (!(r > 0.0)) throw InputError("transmission ratio must be positive");
    const int n = static_cast<int>(q_l.size());

    // Pairs (a, b): elongation at b must exceed elongation at a when tau_b > tau_a.
    std::vector<std::pair<int, int>> pairs;
    if (mode == MonotonicityMode::cyclic) {
        for (int i = 0; i < n; ++i) pairs.emplace_back((i + n - 1) % n, i);
    } else {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return tau_ela[a] < tau_ela[b]; });
        for (int k = 0; k + 1 < n; ++k) pairs.emplace_back(order[k], order[k + 1]);
    }

    std::vector<Triplet> t1, t2;
    std::vector<double> b1, b2;
    for (const auto& [a, b] : pairs) {
        const double dtau = tau_ela[b] - tau_ela[a];
        const double dql = q_l[b] - q_l[a];
        if (std::abs(dtau) <= tie_tolerance) {
            const int row = static_cast<int>(b2.size());
            t2.emplace_back(row, b, 1.0 / r);
            t2.emplace_back(row, a, -1.0 / r);
            b2.push_back(dql);
        } else {
            const double sgn = dtau > 0.0 ? 1.0 : -1.0;
            const int row = static_cast<int>(b1.size());
            t1.emplace_back(row, b, sgn / r);
            t1.emplace_back(row, a, -sgn / r);
            b1.push_back(sgn * dql);
        }
    }

    MonotonicityRows rows;
    rows.mode = mode;
    rows.eps_strict = eps_strict;
    rows.A1.resize(static_cast<int>(b1.size()), n);
    rows.A1.setFromTriplets(t1.begin(), t1.end());
    rows.b1 = Eigen::Map<const Vector>(b1.data(), static_cast<Eigen::Index>(b1.size()));
    rows.A2.resize(static_cast<int>(b2.size()), n);
    rows.A2.setFromTriplets(t2.begin(), t2.end());
    rows.b2 = Eigen::Map<const Vector>(b2.data(), static_cast<Eigen::Index>(b2.size()));
    return rows;
}

LimitRows assemble_actuator_limits(const Task& task, const ActuatorLimits& limits) {
    auto check = [](const std::optional<double>& v, const char* name) {
        if (v && !(*v > 0.0)) throw InputError(std::string("limit ") + name + " must be positive");
    };
    check(limits.tau_max, "tau_max");
    check(limits.dq_max, "dq_max");
    check(limits.delta_max, "delta_max");

    const auto& p = task.motor;
    const int n = task.n();
    std::vector<Triplet> t;
    std::vector<double> h;
    LimitRows out;

    auto add_pair = [&](const SparseMatrix& M, const Vector& offset, double limit) {
        // +(M q + offset) <= limit and -(M q + offset) <= limit
        const int base = static_cast<int>(h.size());
        for (int col = 0; col < M.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(M, col); it; ++it) {
                t.emplace_back(base + it.row(), it.col(), it.value());
                t.emplace_back(base + n + it.row(), it.col(), -it.value());
            }
        }
        for (int i = 0; i < n; ++i) h.push_back(limit - offset[i]);
        for (int i = 0; i < n; ++i) h.push_back(limit + offset[i]);
    };

    if (limits.tau_max) {
        const SparseMatrix M = p.I_m * task.ops.D2 + p.b_m * task.ops.D;
        add_pair(M, -task.tau_ela / (p.eta * p.r), *limits.tau_max);
        out.torque_rows = 2 * n;
    }
    if (limits.dq_max) {
        add_pair(task.ops.D, Vector::Zero(n), *limits.dq_max);
        out.speed_rows = 2 * n;
    }
    if (limits.delta_max) {
        SparseMatrix M(n, n);
        M.setIdentity();
        M *= -1.0 / p.r;
        add_pair(M, task.trajectory.q_l, *limits.delta_max);
        out.elongation_rows = 2 * n;
    }
    out.G.resize(static_cast<int>(h.size()), n);
    out.G.setFromTriplets(t.begin(), t.end());
    out.h = Eigen::Map<const Vector>(h.data(), static_cast<Eigen::Index>(h.size()));
    return out;
}

ConstraintSystem assemble_constraints(const Task& task, const ConstraintOptions& options) {
    const double r = task.motor.r;
    const double eps = options.eps_strict.value_or(default_eps_strict(task.trajectory.q_l, r));
    if (!(options.relative_tie_tolerance >= 0.0)) throw InputError("tie tolerance must be >= 0");
    const double tie = options.relative_tie_tolerance * max_abs(task.tau_ela);
    ConstraintSystem cs;
    cs.monotonicity = assemble_monotonicity(task.tau_ela, task.trajectory.q_l, r, eps, options.mode, tie);
    cs.limits = assemble_actuator_limits(task, options.limits);
    cs.values = options.limits;
    return cs;
}

void Weights::validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) throw InputError("theta must lie in [0, 1]");
    if (!(gamma1 >= 0.0) || !std::isfinite(gamma1)) throw InputError("gamma1 must be >= 0");
    if (!(gamma2 >= 0.0) || !std::isfinite(gamma2)) throw InputError("gamma2 must be >= 0");
}

double ProblemInstance::objective(const Vector& q, double s, double a) const {
    double v = weights.theta * weights.gamma2 * energy.evaluate(q);
    if (layout.s_index >= 0) v += (1.0 - weights.theta) * s;
    if (layout.a_index >= 0) v += (1.0 - weights.theta) * weights.gamma1 * a;
    return v;
}

double ProblemInstance::objective_tight(const Vector& q) const {
    const double s = power.power_cvx(q).maxCoeff();
    const double a = max_abs(task.ops.D2 * q);
    return objective(q, s, a);
}

Vector ProblemInstance::feasibility_seed() const {
    const auto& tau = task.tau_ela;
    const auto& q_l = task.trajectory.q_l;
    const double r = task.motor.r;
    const double tau_max = max_abs(tau);
    if (tau_max == 0.0) return r * q_l;

    // Stiffness giving elongations of a tenth of the load's range of motion,
    // reduced if needed so that every strict row keeps at least twice its margin.
    const double range = std::max(q_l.maxCoeff() - q_l.minCoeff(), 1e-12);
    double k0 = 10.0 * tau_max / range;
    const auto& mono = constraints.monotonicity;
    if (mono.eps_strict > 0.0) {
        // Each A1 row is +-(q_b - q_a)/r <= +-(q_l,b - q_l,a) - eps and holds for the
        // seed iff |tau_b - tau_a| / k0 >= eps.
        const RowMajor A1 = mono.A1;
        double min_dtau = std::numeric_limits<double>::infinity();
        for (int i = 0; i < A1.rows(); ++i) {
            int idx[2] = {-1, -1};
            int k = 0;
            for (RowMajor::InnerIterator it(A1, i); it && k < 2; ++it) idx[k++] = static_cast<int>(it.col());
            if (k == 2) min_dtau = std::min(min_dtau, std::abs(tau[idx[0]] - tau[idx[1]]));
        }
        if (std::isfinite(min_dtau)) k0 = std::min(k0, min_dtau / (2.0 * mono.eps_strict));
    }
    const double mean_tau = tau.mean();
    return r * (q_l - (tau - Vector::Constant(tau.size(), mean_tau)) / k0);
}

Vector ProblemInstance::initial_point(const Vector& q) const {
    Vector x(layout.size());
    x.head(n()) = q;
    if (layout.s_index >= 0) {
        const double s = power.power_cvx(q).maxCoeff();
        x[layout.s_index] = s + 0.1 * std::abs(s) + 1e-9;
    }
    if (layout.a_index >= 0) {
        const double a = max_abs(task.ops.D2 * q);
        x[layout.a_index] = 1.1 * a + 1e-9;
    }
    return x;
}

Qcqp ProblemInstance::lower() const {
    const int n = this->n();
    const int nv = layout.size();
    const double th = weights.theta;
    const double w_e = th * weights.gamma2;
    Qcqp q = Qcqp::empty(nv);

    {
        std::vector<Triplet> t;
        for (int col = 0; col < energy.Q_e.outerSize(); ++col)
            for (SparseMatrix::InnerIterator it(energy.Q_e, col); it; ++it)
                if (w_e != 0.0) t.emplace_back(it.row(), it.col(), 2.0 * w_e * it.value());
        q.P.resize(nv, nv);
        q.P.setFromTriplets(t.begin(), t.end());
    }
    q.c.setZero(nv);
    q.c.head(n) = w_e * energy.A_e;
    q.c0 = w_e * energy.c_e;
    if (layout.s_index >= 0) q.c[layout.s_index] = 1.0 - th;
    if (layout.a_index >= 0) q.c[layout.a_index] = (1.0 - th) * weights.gamma1;

    // Linear inequalities: monotonicity, actuator rows, acceleration epigraph.
    const auto& mono = constraints.monotonicity;
    const auto& lim = constraints.limits;
    std::vector<Triplet> g;
    std::vector<double> h;
    append_rows(g, mono.A1, 0);
    for (int i = 0; i < mono.b1.size(); ++i) h.push_back(mono.b1[i] - mono.eps_strict);
    append_rows(g, lim.G, static_cast<int>(h.size()));
    for (int i = 0; i < lim.h.size(); ++i) h.push_back(lim.h[i]);
    if (layout.a_index >= 0) {
        const int base = static_cast<int>(h.size());
        const SparseMatrix& D2 = task.ops.D2;
        for (int col = 0; col < D2.outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(D2, col); it; ++it) {
                g.emplace_back(base + it.row(), it.col(), it.value());
                g.emplace_back(base + n + it.row(), it.col(), -it.value());
            }
        }
        for (int i = 0; i < 2 * n; ++i) {
            g.emplace_back(base + i, layout.a_index, -1.0);
            h.push_back(0.0);
        }
    }
    q.G.resize(static_cast<int>(h.size()), nv);
    q.G.setFromTriplets(g.begin(), g.end());
    q.h = Eigen::Map<const Vector>(h.data(), static_cast<Eigen::Index>(h.size()));

    // Equalities: tie rows and the gauge row.
    std::vector<Triplet> a;
    std::vector<double> b;
    append_rows(a, mono.A2, 0);
    for (int i = 0; i < mono.b2.size(); ++i) b.push_back(mono.b2[i]);
    if (gauge_fixed) {
        const int row = static_cast<int>(b.size());
        for (int i = 0; i < n; ++i) a.emplace_back(row, i, 1.0 / task.motor.r);
        b.push_back(task.trajectory.q_l.sum());
    }
    q.A.resize(static_cast<int>(b.size()), nv);
    q.A.setFromTriplets(a.begin(), a.end());
    q.b = Eigen::Map<const Vector>(b.data(), static_cast<Eigen::Index>(b.size()));

    // Convex power epigraph: b_m (D_i q)^2 + h_i D_i q - s <= 0.
    if (layout.s_index >= 0) {
        const RowMajor Dr = power.D;
        const double sb = std::sqrt(power.b_m);
        q.quad.reserve(n);
        for (int i = 0; i < n; ++i) {
            RankOneConstraint rc;
            rc.u.resize(nv);
            rc.g.resize(nv);
            for (RowMajor::InnerIterator it(Dr, i); it; ++it) {
                if (sb > 0.0) rc.u.insert(it.col()) = sb * it.value();
                if (power.h[i] != 0.0) rc.g.insert(it.col()) = power.h[i] * it.value();
            }
            rc.g.coeffRef(layout.s_index) = -1.0;
            rc.h = 0.0;
            q.quad.push_back(std::move(rc));
        }
    }
    return q;
}

Vector ProblemInstance::variable_scale() const {
    Vector scale = Vector::Ones(layout.size());
    const Vector seed = feasibility_seed();
    if (layout.s_index >= 0) scale[layout.s_index] = std::max(1.0, max_abs(power.power_cvx(seed)));
    if (layout.a_index >= 0) scale[layout.a_index] = std::max(1.0, max_abs(task.ops.D2 * seed));
    return scale;
}

SparseMatrix ProblemInstance::objective_hessian() const {
    return SparseMatrix((2.0 * weights.theta * weights.gamma2) * energy.Q_e);
}

ProblemInstance build_problem(Task task, EnergyCost energy, PowerTerms power, ConstraintSystem constraints,
                              const Weights& weights) {
    weights.validate();
    const int n = task.n();
    if (energy.Q_e.rows() != n || power.n() != n || constraints.monotonicity.A1.cols() != n) {
        throw InputError("build_problem: blocks assembled for different grids");
    }
    // Convexity: Q_e symmetric with nonnegative curvature along fixed probe
    // directions; G_cvx,i = f_i f_i' is PSD whenever b_m >= 0.
    if (power.b_m < 0.0) throw InputError("negative viscous friction makes the power surrogate nonconvex");
    const double qn = [&] {
        double m = 0.0;
        for (int col = 0; col < energy.Q_e.outerSize(); ++col)
            for (SparseMatrix::InnerIterator it(energy.Q_e, col); it; ++it) m = std::max(m, std::abs(it.value()));
        return m;
    }();
    const SparseMatrix asym = SparseMatrix(energy.Q_e.transpose()) - energy.Q_e;
    for (int col = 0; col < asym.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(asym, col); it; ++it)
            if (std::abs(it.value()) > 1e-12 * std::max(qn, 1e-300)) throw NumericalError("Q_e is not symmetric");
    for (int k = 1; k <= 4; ++k) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = std::cos(0.7 * k * i + 0.3 * k * k);
        if (v.dot(energy.Q_e * v) < -1e-10 * qn * v.squaredNorm()) throw NumericalError("Q_e is not PSD");
    }

    ProblemInstance inst;
    inst.weights = weights;
    inst.layout.n = n;
    int next = n;
    if (weights.theta < 1.0) {
        inst.layout.s_index = next++;
        if (weights.gamma1 > 0.0) inst.layout.a_index = next++;
    }
    inst.gauge_fixed = constraints.limits.elongation_rows == 0;
    inst.task = std::move(task);
    inst.energy = std::move(energy);
    inst.power = std::move(power);
    inst.constraints = std::move(constraints);
    return inst;
}

ProblemInstance build_problem(const Task& task, EnergyTerms terms, const ConstraintOptions& constraints,
                              const Weights& weights) {
    return build_problem(task, assemble_energy_cost(task, terms), assemble_power_terms(task),
                         assemble_constraints(task, constraints), weights);
}

Solution solve(const ProblemInstance& inst, const SolverConfig& cfg) {
    const Qcqp prob = inst.lower();
    const Vector scale = inst.variable_scale();
    // x = scale .* x_scaled
    Qcqp sp = prob;
    const auto S = scale.asDiagonal();
    sp.P = S * prob.P * S;
    sp.c = scale.cwiseProduct(prob.c);
    sp.A = prob.A * S;
    sp.G = prob.G * S;
    for (auto& rc : sp.quad) {
        for (SparseVector::InnerIterator it(rc.u); it; ++it) it.valueRef() *= scale[it.index()];
        for (SparseVector::InnerIterator it(rc.g); it; ++it) it.valueRef() *= scale[it.index()];
    }
    const Vector x0 = inst.initial_point(inst.feasibility_seed()).cwiseQuotient(scale);
    const QcqpResult r = solve_qcqp(sp, cfg, &x0);

    Solution sol;
    const Vector x = scale.cwiseProduct(r.x);
    sol.q_m = x.head(inst.n());
    sol.s = inst.layout.s_index >= 0 ? x[inst.layout.s_index] : inst.power.power_cvx(sol.q_m).maxCoeff();
    sol.a = inst.layout.a_index >= 0 ? x[inst.layout.a_index] : max_abs(inst.task.ops.D2 * sol.q_m);
    sol.objective = inst.objective(sol.q_m, sol.s, sol.a);
    sol.status = r.status;
    sol.iterations = r.iterations;
    sol.multipliers = r.multipliers;
    sol.kkt = kkt_residuals(prob, x, r.multipliers);
    sol.message = r.message;
    if (r.status == SolveStatus::infeasible && r.witness_index >= 0) {
        sol.message += " (most violated row " + std::to_string(r.witness_index) + " by " +
                       std::to_string(r.witness_violation) + ")";
    }
    return sol;
}

KktResiduals kkt_residuals(const ProblemInstance& inst, const Vector& x, const Multipliers& mult) {
    const Qcqp prob = inst.lower();
    if (x.size() != prob.n) throw InputError("candidate has wrong dimension");
    return kkt_residuals(prob, x, mult);
}

}  // namespace springopt
