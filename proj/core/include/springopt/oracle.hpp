#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "springopt/qcqp.hpp"
#include "springopt/solver.hpp"

// Verification machinery. Nothing here calls into the modules it is used to
// check: the quadrature, derivative and instance-construction paths are
// separate implementations.
namespace springopt::oracle {

using OdeField = std::function<Vector(double t, const Vector& x)>;

/// One classical RK4 step of size h from (t, x).
Vector rk4_step(const OdeField& field, double t, const Vector& x, double h);

struct OdeSeries {
    std::vector<double> t;
    std::vector<Vector> x;  ///< steps + 1 states including x0
};

/// Fixed-step RK4. Throws NumericalError if a state becomes non-finite.
OdeSeries rk4_integrate(const OdeField& field, const Vector& x0, double dt, long steps,
                        double t0 = 0.0);

/// Rectangle-rule evaluation of the motor energy integral from raw series.
struct QuadratureEnergy {
    double joule = 0.0;       ///< sum tau_m^2 / k_m^2 dt
    double mechanical = 0.0;  ///< sum tau_m dq_m dt
    double total = 0.0;
};

QuadratureEnergy quadrature_energy(const Vector& dq_m, const Vector& tau_m, double dt, double k_m);

/// Motor torque and velocity recomputed sample by sample from the scalar
/// stencils (no matrices), for use with quadrature_energy.
struct ScalarMotorSeries {
    Vector dq_m;
    Vector tau_m;
};

ScalarMotorSeries scalar_motor_series(const Vector& q_m, const Vector& tau_ela, double dt,
                                      double I_m, double b_m, double eta, double r);

/// Central finite differences of `f` at q compared with `gradient`; returns
/// max_i |fd_i - g_i| / max(1, |g|_inf).
double finite_diff_gradient_check(const std::function<double(const Vector&)>& f,
                                  const Vector& gradient, const Vector& q, double h);

struct PlantFlags {
    bool equalities = true;
    bool linear_inequalities = true;
    bool quadratic = true;
    /// Every inequality active at the optimum.
    bool all_active = false;
    /// No inequality active (q_star is the unconstrained minimizer when no
    /// equalities are drawn either).
    bool none_active = false;
    /// Strictly convex objective (otherwise P may be rank deficient).
    bool strictly_convex = true;
};

struct PlantedInstance {
    Qcqp problem;
    Vector x_star;
    Multipliers multipliers;
    double objective_star = 0.0;
    std::uint64_t seed = 0;
};

/// Draws a QCQP whose optimum is known by construction: x*, the active set
/// and nonnegative multipliers are drawn first and the linear term and
/// right-hand sides are backed out so that KKT holds exactly at x*.
PlantedInstance plant_instance(int n, std::uint64_t seed, const PlantFlags& flags = {});

}  // namespace springopt::oracle
