#include <cmath>

#include <gtest/gtest.h>

#include <springopt/error.hpp>
#include <springopt/oracle.hpp>
#include <springopt/validation.hpp>

using namespace springopt;

TEST(Validation, LogLogSlopeOfPowerLaw) {
    const std::vector<double> h = {0.1, 0.05, 0.025, 0.0125};
    std::vector<double> e;
    for (double x : h) e.push_back(3.0 * x * x);
    EXPECT_NEAR(validation::loglog_slope(h, e), 2.0, 1e-12);
}

TEST(Validation, DerivativeOperatorIsSecondOrder) {
    const auto c = validation::derivative_convergence(64, 4);
    ASSERT_EQ(c.n.size(), 5u);
    EXPECT_EQ(c.n.back(), 64 * 16);
    EXPECT_NEAR(c.slope, 2.0, 0.2);
    for (std::size_t i = 1; i < c.error.size(); ++i) EXPECT_NEAR(c.error[i - 1] / c.error[i], 4.0, 0.1);
}

TEST(Validation, EnergyIdentityResidualIsSecondOrder) {
    const auto c = validation::energy_identity_convergence(MotorParams::ilm85x26(), 64, 4);
    EXPECT_NEAR(c.slope, 2.0, 0.2);
    EXPECT_LT(c.error.back(), c.error.front());
}

TEST(Validation, AllChecksPassAtDefaultTolerances) {
    validation::Options o;
    o.planted_instances = 24;
    o.convexity_draws = 10;
    for (const auto& c : validation::run_all(o)) EXPECT_TRUE(c.passed) << c.name << ": " << c.value << " > " << c.tolerance;
}

TEST(Validation, ZeroToleranceScaleFailsCleanly) {
    validation::Options o;
    o.tolerance_scale = 0.0;
    o.planted_instances = 6;
    o.convexity_draws = 3;
    const auto checks = validation::run_all(o);
    EXPECT_FALSE(checks.empty());
    bool any_failed = false;
    for (const auto& c : checks) {
        EXPECT_EQ(c.tolerance, 0.0) << c.name;
        if (c.name == "planted_qcqp" || c.name == "derivative_order") {
            EXPECT_FALSE(c.passed) << c.name;
        }
        any_failed = any_failed || !c.passed;
    }
    EXPECT_TRUE(any_failed);
    o.tolerance_scale = -1.0;
    EXPECT_THROW(validation::run_all(o), InputError);
}

TEST(Oracle, Rk4IsFourthOrderOnHarmonicOscillator) {
    const oracle::OdeField f = [](double, const Vector& x) {
        Vector d(2);
        d << x[1], -x[0];
        return d;
    };
    Vector x0(2);
    x0 << 1.0, 0.0;
    double prev = 0.0;
    for (long steps : {50L, 100L, 200L}) {
        const auto s = oracle::rk4_integrate(f, x0, 2.0 * M_PI / steps, steps);
        const double err = (s.x.back() - x0).norm();
        if (prev > 0.0) {
            EXPECT_NEAR(prev / err, 16.0, 1.0);
        }
        prev = err;
    }
}

TEST(Oracle, PlantedInstanceSatisfiesKkt) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto inst = oracle::plant_instance(12, seed);
        const auto k = kkt_residuals(inst.problem, inst.x_star, inst.multipliers);
        EXPECT_LT(k.stationarity, 1e-10);
        EXPECT_LT(k.primal, 1e-10);
        EXPECT_LT(k.complementarity, 1e-10);
        EXPECT_NEAR(inst.problem.objective(inst.x_star), inst.objective_star, 1e-10 * std::max(1.0, std::abs(inst.objective_star)));
        EXPECT_NO_THROW(inst.problem.validate());
    }
    const auto a = oracle::plant_instance(12, 9), b = oracle::plant_instance(12, 9);
    EXPECT_EQ(a.x_star, b.x_star);
}
