#pragma once

#include <optional>
#include <string>
#include <vector>

#include "springopt/problem.hpp"
#include "springopt/spring.hpp"

namespace springopt {

/// Motor energy over one period, split as in the discrete cost:
///   joule     = sum (tau_m,i / k_m)^2 dt
///   viscous   = b_m sum (D q_m)_i^2 dt
///   load_mech = -sum tau_ela,i dq_l,i dt / eta
struct EnergyBreakdown {
    double joule = 0.0;
    double viscous = 0.0;
    double load_mech = 0.0;
    double total = 0.0;

    /// Losses the spring can influence (joule + viscous).
    [[nodiscard]] double dissipated() const { return joule + viscous; }
};

EnergyBreakdown energy_breakdown(const Vector& q_m, const Task& task);

double peak_power_true(const Vector& q_m, const Task& task);
double peak_power_cvx(const Vector& q_m, const Task& task);

/// All metrics of one motor trajectory.
struct Metrics {
    EnergyBreakdown energy;
    double peak_power = 0.0;
    double peak_power_cvx = 0.0;
    double max_torque = 0.0;      ///< max |tau_m|
    double max_speed = 0.0;       ///< max |D q_m|
    double max_elongation = 0.0;  ///< max |delta|
    double max_accel = 0.0;       ///< max |D2 q_m|

    /// True when every present limit holds within `slack`.
    [[nodiscard]] bool within(const ActuatorLimits& limits, double slack = 1e-6) const;
};

Metrics evaluate_metrics(const Vector& q_m, const Task& task);

/// Rigid actuator, q_m = r q_l.
Metrics rigid_baseline(const Task& task);

enum class LinearObjective { energy, peak, blend };

struct LinearBaselineOptions {
    std::vector<double> k_grid;  ///< empty: log grid derived from the task
    LinearObjective objective = LinearObjective::blend;
    Weights weights;
    ActuatorLimits limits;
    int refine_iterations = 60;
};

struct LinearCandidate {
    double k = 0.0;
    Metrics metrics;
    bool feasible = false;
    double score = 0.0;
};

struct LinearBaseline {
    std::vector<LinearCandidate> grid;
    std::optional<LinearCandidate> best;  ///< unset when every k is infeasible
};

/// q_m = r (q_l - tau_ela / k).
Vector linear_spring_motor_position(const Task& task, double k);

/// Default grid: 241 log-spaced stiffnesses spanning six decades around
/// max|tau_ela| / range(q_l).
std::vector<double> default_stiffness_grid(const Task& task);

LinearBaseline linear_spring_baseline(const Task& task, const LinearBaselineOptions& options);

struct DesignOptions {
    EnergyTerms terms = EnergyTerms::total;
    ConstraintOptions constraints;
    Weights weights;
    SolverConfig solver;
    ProfileOptions profile;
    bool build_profile = true;
};

struct DesignResult {
    Solution solution;
    Metrics metrics;
    Vector delta;
    std::optional<SpringProfile> profile;
    std::string profile_error;
};

DesignResult design_spring(const Task& task, const DesignOptions& options);

struct TradeoffPoint {
    double theta = 0.0;
    double energy_total = 0.0;
    double energy_dissipated = 0.0;
    double peak_power = 0.0;
    double peak_power_cvx = 0.0;
    double max_accel = 0.0;
    double power_term = 0.0;  ///< max(p_cvx) + gamma1 |D2 q|_inf
    double rel_energy = 0.0;  ///< percent vs rigid (dissipated energy)
    double rel_peak = 0.0;    ///< percent vs rigid (true peak power)
    bool feasible = false;
    SolveStatus status = SolveStatus::max_iter;
    int iterations = 0;
    double seconds = 0.0;
    std::string solution_ref;
    Vector q_m;
};

/// {0, 1} plus a logistic of linspace(-6, 6, n_points - 2), ascending.
std::vector<double> theta_grid(int n_points);

struct SweepOptions {
    int n_points = 30;
    Weights weights;  ///< theta is overridden per point
    EnergyTerms terms = EnergyTerms::total;
    ConstraintOptions constraints;
    SolverConfig solver;
    int threads = 0;  ///< 0: hardware concurrency
};

struct Sweep {
    std::vector<TradeoffPoint> points;  ///< ordered by theta
    Metrics rigid;
    int knee = -1;  ///< index of the suggested trade-off point, -1 if undetermined
};

Sweep tradeoff_sweep(const Task& task, const SweepOptions& options);

/// Index of maximum discrete curvature on the normalized energy-vs-peak
/// curve of feasible points; -1 with fewer than three.
int knee_point(const std::vector<TradeoffPoint>& points);

inline double relative_percent(double optim, double rigid) {
    return rigid == 0.0 ? 0.0 : 100.0 * (optim - rigid) / rigid;
}

}  // namespace springopt
