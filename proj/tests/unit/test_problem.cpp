#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <springopt/analysis.hpp>
#include <springopt/error.hpp>
#include <springopt/problem.hpp>

using namespace springopt;

namespace {

Task cubic_task(int n = 64) {
    const auto osc = generate_cubic_oscillation(CubicSpringSystem{}, n);
    return make_task(osc.trajectory, LoadModel::inertial(0.125), MotorParams::ilm85x26());
}

Vector random_q(const Task& task, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Vector q = task.motor.r * task.trajectory.q_l;
    for (int i = 0; i < q.size(); ++i) q[i] += 0.3 * g(rng);
    return q;
}

double min_eig_ratio(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const auto ev = es.eigenvalues();
    return ev.minCoeff() / std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
}

}  // namespace

TEST(EnergyCost, QuadraticFormMatchesBreakdown) {
    const Task task = cubic_task();
    const Vector q = random_q(task, 3);
    const auto br = energy_breakdown(q, task);
    const auto total = assemble_energy_cost(task, EnergyTerms::total);
    const auto joule = assemble_energy_cost(task, EnergyTerms::joule);
    const auto visc = assemble_energy_cost(task, EnergyTerms::viscous);
    EXPECT_NEAR(total.evaluate(q), br.total, 1e-9 * std::abs(br.total));
    EXPECT_NEAR(joule.evaluate(q), br.joule, 1e-9 * br.joule);
    EXPECT_NEAR(visc.evaluate(q), br.viscous, 1e-9 * br.viscous);
    EXPECT_NEAR(br.total, br.joule + br.viscous + br.load_mech, 1e-12 * std::abs(br.total));
}

TEST(EnergyCost, TorqueMapMatchesMotorTorque) {
    const Task task = cubic_task();
    const Vector q = random_q(task, 4);
    const auto cost = assemble_energy_cost(task);
    const Vector tau = motor_torque(q, task.tau_ela, task.motor, task.ops);
    EXPECT_LT((cost.F * q + cost.c - tau / task.motor.k_m()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(EnergyCost, GradientMatchesFiniteDifference) {
    const Task task = cubic_task(32);
    const auto cost = assemble_energy_cost(task);
    const Vector q = random_q(task, 5);
    const Vector g = cost.gradient(q);
    const double h = 1e-5;
    for (int i = 0; i < q.size(); i += 5) {
        Vector qp = q, qm = q;
        qp[i] += h;
        qm[i] -= h;
        const double fd = (cost.evaluate(qp) - cost.evaluate(qm)) / (2.0 * h);
        EXPECT_NEAR(fd, g[i], 1e-6 * std::max(1.0, g.cwiseAbs().maxCoeff()));
    }
}

TEST(PowerTerms, QuadraticFormsMatchPowerSeries) {
    const Task task = cubic_task(40);
    const auto pw = assemble_power_terms(task);
    const Vector q = random_q(task, 6);
    const Vector ref = power_series(q, task.tau_ela, task.motor, task.ops);
    const Vector p = pw.power(q);
    const Vector pc = pw.power_cvx(q);
    const Vector dq = task.ops.D * q;
    for (int i = 0; i < task.n(); ++i) {
        const double scale = 1e-9 * std::max(1.0, std::abs(ref[i]));
        const double qgq = q.dot(pw.G(i) * q) + pw.H(i).dot(q);
        EXPECT_NEAR(qgq, ref[i], scale);
        EXPECT_NEAR(p[i], ref[i], scale);
        const double cvx = q.dot(pw.G_cvx(i) * q) + pw.H(i).dot(q);
        EXPECT_NEAR(cvx, pc[i], scale);
        EXPECT_NEAR(pc[i], (task.motor.b_m * dq[i] + pw.h[i]) * dq[i], scale);
    }
}

TEST(Convexity, EnergyHessianAndSurrogatesArePsd) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int draw = 0; draw < 10; ++draw) {
        MotorParams m = MotorParams::ilm85x26();
        m.R *= u(rng);
        m.I_m *= u(rng);
        m.b_m *= u(rng);
        m.r *= u(rng);
        m.eta = std::min(1.0, 0.5 * u(rng));
        const auto osc = generate_cubic_oscillation(CubicSpringSystem{}, 24);
        const Task task = make_task(osc.trajectory, LoadModel::inertial(0.125), m);
        for (auto terms : {EnergyTerms::total, EnergyTerms::joule, EnergyTerms::viscous}) {
            const Eigen::MatrixXd Q(assemble_energy_cost(task, terms).Q_e);
            EXPECT_GE(min_eig_ratio(Q), -1e-10);
        }
        const auto pw = assemble_power_terms(task);
        for (int i = 0; i < task.n(); i += 7) {
            const Eigen::MatrixXd G(pw.G_cvx(i));
            EXPECT_GE(min_eig_ratio(G), -1e-10);
        }
    }
}

TEST(Convexity, TruePowerFormIsIndefinite) {
    // The exact per-sample power is not convex, which is why the surrogate exists.
    const Task task = cubic_task(24);
    const auto pw = assemble_power_terms(task);
    const Eigen::MatrixXd G(pw.G(3));
    const Eigen::MatrixXd S = 0.5 * (G + G.transpose());
    EXPECT_LT(min_eig_ratio(S), -1e-3);
}

TEST(Monotonicity, RowsEncodeOrdering) {
    Vector tau(5), ql(5);
    tau << 0.0, 2.0, 1.0, 2.0, -1.0;
    ql << 0.0, 0.1, 0.2, 0.3, 0.4;
    const double r = 2.0;
    const auto cyc = assemble_monotonicity(tau, ql, r, 0.0, MonotonicityMode::cyclic, 0.0);
    EXPECT_EQ(cyc.A1.rows() + cyc.A2.rows(), 5);
    EXPECT_EQ(cyc.A2.rows(), 0);

    const auto glob = assemble_monotonicity(tau, ql, r, 0.0, MonotonicityMode::global, 0.0);
    EXPECT_EQ(glob.A1.rows(), 3);
    ASSERT_EQ(glob.A2.rows(), 1);  // the tie tau[1] == tau[3]
    EXPECT_DOUBLE_EQ(glob.b2[0], ql[3] - ql[1]);

    // delta = q_l - q/r increasing with tau is feasible for A1 q <= b1.
    Vector delta(5);
    delta << 0.0, 0.5, 0.25, 0.5, -0.25;
    const Vector q = r * (ql - delta);
    EXPECT_LE((glob.A1 * q - glob.b1).maxCoeff(), 1e-12);
    EXPECT_LT((glob.A1 * q - glob.b1).maxCoeff(), 0.0);
    EXPECT_NEAR((glob.A2 * q - glob.b2).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    for (int k = 0; k < glob.A1.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(glob.A1, k); it; ++it) EXPECT_DOUBLE_EQ(std::abs(it.value()), 1.0 / r);

    EXPECT_THROW(assemble_monotonicity(tau, ql.head(4), r, 0.0), InputError);
    EXPECT_THROW(assemble_monotonicity(tau, ql, r, -1.0), InputError);
    EXPECT_EQ(parse_monotonicity_mode("global"), MonotonicityMode::global);
    EXPECT_THROW(parse_monotonicity_mode("sorted"), InputError);
}

TEST(Limits, RowCountsAndRigidEvaluation) {
    const Task task = cubic_task(50);
    const ActuatorLimits lim{10.0, 100.0, 0.5};
    const auto rows = assemble_actuator_limits(task, lim);
    EXPECT_EQ(rows.torque_rows, 100);
    EXPECT_EQ(rows.speed_rows, 100);
    EXPECT_EQ(rows.elongation_rows, 100);
    EXPECT_EQ(rows.G.rows(), 300);

    // Rigid motion: rows equal +-(expression) - limit.
    const Vector q = rigid_motor_position(task.trajectory, task.motor.r);
    const Vector v = rows.G * q - rows.h;
    const Vector tau = motor_torque(q, task.tau_ela, task.motor, task.ops);
    const Vector speed = task.ops.D * q;
    for (int i = 0; i < 50; ++i) {
        EXPECT_NEAR(v[i], tau[i] - 10.0, 1e-9);
        EXPECT_NEAR(v[50 + i], -tau[i] - 10.0, 1e-9);
        EXPECT_NEAR(v[100 + i], speed[i] - 100.0, 1e-9);
        EXPECT_NEAR(v[200 + i], -0.5, 1e-12);
    }
    EXPECT_THROW(assemble_actuator_limits(task, ActuatorLimits{-1.0, {}, {}}), InputError);
    EXPECT_EQ(assemble_actuator_limits(task, {}).G.rows(), 0);
}

TEST(Problem, LayoutPruningAndGauge) {
    const Task task = cubic_task(32);
    ConstraintOptions co;
    Weights w;
    w.theta = 1.0;
    const auto p1 = build_problem(task, EnergyTerms::total, co, w);
    EXPECT_EQ(p1.layout.size(), 32);
    EXPECT_TRUE(p1.gauge_fixed);
    EXPECT_EQ(p1.lower().num_quadratic(), 0);

    w.theta = 0.5;
    const auto p2 = build_problem(task, EnergyTerms::total, co, w);
    EXPECT_EQ(p2.layout.size(), 34);
    const Qcqp lowered = p2.lower();
    EXPECT_EQ(lowered.num_quadratic(), 32);
    EXPECT_NO_THROW(lowered.validate());

    w.gamma1 = 0.0;
    EXPECT_EQ(build_problem(task, EnergyTerms::total, co, w).layout.size(), 33);

    co.limits.delta_max = 1.0;
    EXPECT_FALSE(build_problem(task, EnergyTerms::total, co, w).gauge_fixed);

    w.theta = 1.5;
    EXPECT_THROW(build_problem(task, EnergyTerms::total, co, w), InputError);
}

TEST(Problem, LoweredObjectiveMatchesDomainObjective) {
    const Task task = cubic_task(32);
    Weights w;
    w.theta = 0.3;
    const auto inst = build_problem(task, EnergyTerms::total, ConstraintOptions{}, w);
    const Vector q = random_q(task, 9);
    const Vector x = inst.initial_point(q);
    const Qcqp prob = inst.lower();
    const double s = x[inst.layout.s_index], a = x[inst.layout.a_index];
    EXPECT_NEAR(prob.objective(x), inst.objective(q, s, a), 1e-9 * std::abs(prob.objective(x)));
    // initial_point leaves every surrogate row strictly satisfied.
    const Vector f = prob.inequality_values(x);
    EXPECT_LT(f.tail(prob.num_quadratic()).maxCoeff(), 0.0);
}

TEST(Problem, JsonRoundTrip) {
    const Task task = cubic_task(16);
    Weights w;
    w.theta = 0.5;
    ConstraintOptions co;
    co.limits.delta_max = 2.0;
    const Qcqp prob = build_problem(task, EnergyTerms::total, co, w).lower();
    std::stringstream ss;
    write_problem_json(ss, prob);
    const Qcqp back = read_problem_json(ss);
    EXPECT_EQ(back.n, prob.n);
    EXPECT_EQ(back.num_linear(), prob.num_linear());
    EXPECT_EQ(back.num_quadratic(), prob.num_quadratic());
    const Vector x = build_problem(task, EnergyTerms::total, co, w).initial_point(random_q(task, 2));
    EXPECT_EQ(back.objective(x), prob.objective(x));
    EXPECT_EQ(back.inequality_values(x), prob.inequality_values(x));
    EXPECT_EQ(equality_residual(back, x), equality_residual(prob, x));
}
