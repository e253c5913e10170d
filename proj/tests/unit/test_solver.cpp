#include <cmath>

#include <gtest/gtest.h>

#include <springopt/error.hpp>
#include <springopt/oracle.hpp>
#include <springopt/solver.hpp>

using namespace springopt;

namespace {

SparseMatrix dense_to_sparse(const Eigen::MatrixXd& M) { return M.sparseView(); }

SparseVector unit(int n, int i, double v = 1.0) {
    SparseVector u(n);
    u.insert(i) = v;
    return u;
}

}  // namespace

TEST(Qcqp, ValidateRejectsBadShapes) {
    Qcqp q = Qcqp::empty(2);
    EXPECT_NO_THROW(q.validate());
    q.c.resize(3);
    EXPECT_THROW(q.validate(), InputError);
    q = Qcqp::empty(2);
    Eigen::MatrixXd P(2, 2);
    P << 1, 1, 0, 1;
    q.P = dense_to_sparse(P);
    EXPECT_THROW(q.validate(), InputError);
}

TEST(Solver, ProjectionOntoHalfPlane) {
    // min (x-1)^2 + (y-2)^2  s.t. x + y <= 1  ->  (0, 1), objective 2.
    Qcqp q = Qcqp::empty(2);
    q.P = dense_to_sparse(2.0 * Eigen::MatrixXd::Identity(2, 2));
    q.c << -2.0, -4.0;
    q.c0 = 5.0;
    Eigen::MatrixXd G(1, 2);
    G << 1, 1;
    q.G = dense_to_sparse(G);
    q.h = Vector::Constant(1, 1.0);
    const auto r = solve_qcqp(q);
    ASSERT_EQ(r.status, SolveStatus::optimal) << r.message;
    EXPECT_NEAR(r.x[0], 0.0, 1e-6);
    EXPECT_NEAR(r.x[1], 1.0, 1e-6);
    EXPECT_NEAR(r.objective, 2.0, 1e-6);
    EXPECT_NEAR(r.multipliers.z[0], 2.0, 1e-5);
}

TEST(Solver, EqualityConstrainedMinimumNorm) {
    // min x^2 + y^2  s.t. x + y = 1  ->  (0.5, 0.5), multiplier -1.
    Qcqp q = Qcqp::empty(2);
    q.P = dense_to_sparse(2.0 * Eigen::MatrixXd::Identity(2, 2));
    Eigen::MatrixXd A(1, 2);
    A << 1, 1;
    q.A = dense_to_sparse(A);
    q.b = Vector::Constant(1, 1.0);
    const auto r = solve_qcqp(q);
    ASSERT_EQ(r.status, SolveStatus::optimal) << r.message;
    EXPECT_NEAR(r.x[0], 0.5, 1e-7);
    EXPECT_NEAR(r.x[1], 0.5, 1e-7);
    EXPECT_NEAR(r.objective, 0.5, 1e-7);
    EXPECT_NEAR(std::abs(r.multipliers.y[0]), 1.0, 1e-6);
}

TEST(Solver, LinearObjectiveOverQuadraticRow) {
    // min -x  s.t. x^2 <= 4  ->  x = 2, multiplier 1/4.
    Qcqp q = Qcqp::empty(1);
    q.c << -1.0;
    RankOneConstraint row;
    row.u = unit(1, 0);
    row.g = SparseVector(1);
    row.h = 4.0;
    q.quad.push_back(row);
    const auto r = solve_qcqp(q);
    ASSERT_EQ(r.status, SolveStatus::optimal) << r.message;
    EXPECT_NEAR(r.x[0], 2.0, 1e-6);
    EXPECT_NEAR(r.multipliers.z[0], 0.25, 1e-5);
}

TEST(Solver, EpigraphOfMaxOfParabolas) {
    // min s  s.t. (x-1)^2 <= s, (x+1)^2 <= s  ->  x = 0, s = 1.
    // Written as x^2 - 2x - s <= -1 and x^2 + 2x - s <= -1.
    Qcqp q = Qcqp::empty(2);
    q.c << 0.0, 1.0;
    for (double sign : {-1.0, 1.0}) {
        RankOneConstraint row;
        row.u = unit(2, 0);
        row.g = SparseVector(2);
        row.g.insert(0) = 2.0 * sign;
        row.g.insert(1) = -1.0;
        row.h = -1.0;
        q.quad.push_back(row);
    }
    const auto r = solve_qcqp(q);
    ASSERT_EQ(r.status, SolveStatus::optimal) << r.message;
    EXPECT_NEAR(r.x[0], 0.0, 1e-6);
    EXPECT_NEAR(r.x[1], 1.0, 1e-6);
}

TEST(Solver, DetectsInfeasibleBoxWithWitness) {
    // x <= -1 and -x <= -1 cannot both hold.
    Qcqp q = Qcqp::empty(1);
    q.P = dense_to_sparse(Eigen::MatrixXd::Identity(1, 1));
    Eigen::MatrixXd G(2, 1);
    G << 1, -1;
    q.G = dense_to_sparse(G);
    q.h = Vector::Constant(2, -1.0);
    const auto r = solve_qcqp(q);
    EXPECT_EQ(r.status, SolveStatus::infeasible) << r.message;
    EXPECT_GE(r.witness_index, 0);
    EXPECT_LT(r.witness_index, 2);
    EXPECT_GT(r.witness_violation, 0.5);
}

TEST(Solver, DetectsInconsistentEqualities) {
    Qcqp q = Qcqp::empty(2);
    q.P = dense_to_sparse(Eigen::MatrixXd::Identity(2, 2));
    Eigen::MatrixXd A(2, 2);
    A << 1, 1, 1, 1;
    q.A = dense_to_sparse(A);
    q.b = Vector(2);
    q.b << 0.0, 1.0;
    const auto r = solve_qcqp(q);
    EXPECT_NE(r.status, SolveStatus::optimal);
}

TEST(Solver, UsesStartingPointAndStaysDeterministic) {
    const auto inst = oracle::plant_instance(20, 77);
    const Vector x0 = Vector::Constant(20, 0.3);
    const auto a = solve_qcqp(inst.problem, {}, &x0);
    const auto b = solve_qcqp(inst.problem, {}, &x0);
    ASSERT_EQ(a.status, SolveStatus::optimal);
    EXPECT_EQ(a.iterations, b.iterations);
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.objective, b.objective);
}

TEST(Solver, RecoversPlantedOptima) {
    int count = 0;
    for (std::uint64_t seed = 1; seed <= 24; ++seed) {
        oracle::PlantFlags flags;
        flags.all_active = seed % 4 == 1;
        flags.none_active = seed % 4 == 2;
        flags.strictly_convex = seed % 4 != 3;
        const int n = 6 + static_cast<int>(seed * 7 % 45);
        const auto inst = oracle::plant_instance(n, seed, flags);
        const auto r = solve_qcqp(inst.problem);
        ASSERT_EQ(r.status, SolveStatus::optimal) << "seed " << seed << ": " << r.message;
        const double gap = std::abs(r.objective - inst.objective_star) / std::max(1.0, std::abs(inst.objective_star));
        EXPECT_LE(gap, 1e-6) << "seed " << seed;
        const auto k = kkt_residuals(inst.problem, inst.x_star, inst.multipliers);
        EXPECT_LT(k.stationarity, 1e-9);
        EXPECT_LT(k.primal, 1e-9);
        ++count;
    }
    EXPECT_EQ(count, 24);
}

TEST(Solver, ResidualsFlagViolations) {
    const auto inst = oracle::plant_instance(10, 5);
    auto k = kkt_residuals(inst.problem, inst.x_star, inst.multipliers);
    EXPECT_TRUE(k.within(SolverConfig{}));
    Vector bad = inst.x_star;
    bad.array() += 10.0;
    k = kkt_residuals(inst.problem, bad, inst.multipliers);
    EXPECT_FALSE(k.within(SolverConfig{}));
}

TEST(SolverConfig, Validation) {
    SolverConfig c;
    EXPECT_NO_THROW(c.validate());
    c.max_iter = 0;
    EXPECT_THROW(c.validate(), InputError);
    c = {};
    c.tol_gap = -1.0;
    EXPECT_THROW(c.validate(), InputError);
    EXPECT_EQ(to_string(SolveStatus::infeasible), "infeasible");
}
