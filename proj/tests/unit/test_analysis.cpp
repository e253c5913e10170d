#include <cmath>

#include <gtest/gtest.h>

#include <springopt/analysis.hpp>
#include <springopt/error.hpp>

using namespace springopt;

namespace {

Task cubic_task(int n) {
    const auto osc = generate_cubic_oscillation(CubicSpringSystem{}, n);
    return make_task(osc.trajectory, LoadModel::inertial(0.125), MotorParams::ilm85x26());
}

Task running_task() {
    MotorParams m = MotorParams::ilm85x26();
    m.eta = 0.8;
    return make_task(generate_gait(GaitShape::running(), 330), LoadModel::direct(), m);
}

TradeoffPoint point(double theta, double peak, double energy) {
    TradeoffPoint p;
    p.theta = theta;
    p.peak_power = peak;
    p.energy_dissipated = energy;
    p.feasible = true;
    return p;
}

}  // namespace

TEST(Metrics, RigidMatchesDirectEvaluation) {
    const Task task = cubic_task(101);
    const Metrics rigid = rigid_baseline(task);
    const Vector q = rigid_motor_position(task.trajectory, task.motor.r);
    const Vector tau = motor_torque(q, task.tau_ela, task.motor, task.ops);
    EXPECT_DOUBLE_EQ(rigid.max_torque, tau.cwiseAbs().maxCoeff());
    EXPECT_LT(rigid.max_elongation, 1e-12);
    EXPECT_NEAR(rigid.energy.joule, (tau / task.motor.k_m()).squaredNorm() * task.dt(), 1e-9 * rigid.energy.joule);
    EXPECT_NEAR(rigid.peak_power, power_series(q, task.tau_ela, task.motor, task.ops).maxCoeff(), 1e-9);
}

TEST(Metrics, WithinChecksEveryLimit) {
    Metrics m;
    m.max_torque = 5.0;
    m.max_speed = 100.0;
    m.max_elongation = 0.3;
    EXPECT_TRUE(m.within({}));
    EXPECT_TRUE(m.within({5.0, 100.0, 0.3}));
    EXPECT_FALSE(m.within({4.9, {}, {}}));
    EXPECT_FALSE(m.within({{}, 99.0, {}}));
    EXPECT_FALSE(m.within({{}, {}, 0.29}));
}

TEST(LinearSpring, PositionAndStiffLimit) {
    const Task task = cubic_task(101);
    const double k = 123.0;
    const Vector q = linear_spring_motor_position(task, k);
    const Vector delta = elongation(q, task.trajectory.q_l, task.motor.r);
    EXPECT_LT((delta - task.tau_ela / k).cwiseAbs().maxCoeff(), 1e-12);

    const Metrics rigid = rigid_baseline(task);
    const Metrics stiff = evaluate_metrics(linear_spring_motor_position(task, 1e9), task);
    EXPECT_NEAR(stiff.energy.dissipated(), rigid.energy.dissipated(), 1e-3 * rigid.energy.dissipated());
    EXPECT_NEAR(stiff.peak_power, rigid.peak_power, 1e-3 * rigid.peak_power);
}

TEST(LinearSpring, GridAndBestCandidate) {
    const Task task = cubic_task(101);
    const auto grid = default_stiffness_grid(task);
    EXPECT_EQ(grid.size(), 241u);
    for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_GT(grid[i], grid[i - 1]);
    EXPECT_NEAR(grid.back() / grid.front(), 1e6, 1e-6 * 1e6);

    LinearBaselineOptions opt;
    opt.objective = LinearObjective::energy;
    const auto base = linear_spring_baseline(task, opt);
    ASSERT_TRUE(base.best.has_value());
    for (const auto& c : base.grid) {
        if (c.feasible) {
            EXPECT_GE(c.metrics.energy.total, base.best->metrics.energy.total - 1e-9);
        }
    }
    EXPECT_LT(base.best->metrics.energy.dissipated(), rigid_baseline(task).energy.dissipated());
}

TEST(LinearSpring, RunningStrideHasNoFeasibleStiffness) {
    const Task task = running_task();
    LinearBaselineOptions opt;
    opt.objective = LinearObjective::energy;
    opt.limits = ActuatorLimits::from_motor(task.motor, 0.4);
    const auto base = linear_spring_baseline(task, opt);
    EXPECT_FALSE(base.best.has_value());
    EXPECT_FALSE(rigid_baseline(task).within(opt.limits));
}

TEST(Design, ViscousOnlyRecoversCubicSpring) {
    const Task task = cubic_task(201);
    DesignOptions opt;
    opt.terms = EnergyTerms::viscous;
    const auto d = design_spring(task, opt);
    ASSERT_TRUE(d.solution.ok()) << d.solution.message;
    ASSERT_TRUE(d.profile.has_value()) << d.profile_error;
    EXPECT_NEAR(d.profile->cubic_coefficient(), 40.0, 0.02 * 40.0);
    const Vector dq = task.ops.D * d.solution.q_m;
    EXPECT_LT(dq.cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Design, RunningStrideFeasibleWithNonlinearSpring) {
    const Task task = running_task();
    DesignOptions opt;
    opt.constraints.limits = ActuatorLimits::from_motor(task.motor, 0.4);
    const auto d = design_spring(task, opt);
    ASSERT_TRUE(d.solution.ok()) << d.solution.message;
    EXPECT_TRUE(d.metrics.within(opt.constraints.limits));
    ASSERT_TRUE(d.profile.has_value()) << d.profile_error;

    opt.constraints.limits.delta_max = 0.02;
    const auto tight = design_spring(task, opt);
    EXPECT_EQ(tight.solution.status, SolveStatus::infeasible) << tight.solution.message;
}

TEST(Sweep, ThetaGrid) {
    const auto g = theta_grid(30);
    ASSERT_EQ(g.size(), 30u);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_EQ(g.back(), 1.0);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
    EXPECT_NEAR(g[1], 1.0 / (1.0 + std::exp(6.0)), 1e-15);
    EXPECT_EQ(theta_grid(2), (std::vector<double>{0.0, 1.0}));
    EXPECT_EQ(theta_grid(3), (std::vector<double>{0.0, 0.5, 1.0}));
    EXPECT_THROW(theta_grid(1), InputError);
}

TEST(Sweep, KneeIsTheCorner) {
    std::vector<TradeoffPoint> pts = {point(0.0, 0.0, 10.0), point(0.2, 0.2, 5.0), point(0.4, 0.5, 1.0),
                                      point(0.6, 5.0, 0.5), point(1.0, 10.0, 0.0)};
    EXPECT_EQ(knee_point(pts), 2);
    pts[1].feasible = pts[3].feasible = pts[4].feasible = false;
    EXPECT_EQ(knee_point(pts), -1);
}

TEST(Sweep, SmallSweepIsMonotone) {
    const Task task = cubic_task(61);
    SweepOptions opt;
    opt.n_points = 6;
    opt.threads = 2;
    const Sweep s = tradeoff_sweep(task, opt);
    ASSERT_EQ(s.points.size(), 6u);
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        ASSERT_TRUE(s.points[i].feasible) << "theta " << s.points[i].theta;
        if (i == 0) continue;
        EXPECT_LE(s.points[i].energy_total, s.points[i - 1].energy_total + 1e-9 * std::abs(s.points[i - 1].energy_total));
        EXPECT_GE(s.points[i].power_term, s.points[i - 1].power_term - 1e-9 * std::abs(s.points[i - 1].power_term));
    }
    const Sweep again = tradeoff_sweep(task, opt);
    for (std::size_t i = 0; i < s.points.size(); ++i) EXPECT_EQ(s.points[i].q_m, again.points[i].q_m);
}
