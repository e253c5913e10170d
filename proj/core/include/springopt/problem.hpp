#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "springopt/discretization.hpp"
#include "springopt/qcqp.hpp"
#include "springopt/solver.hpp"

namespace springopt {

/// Reference task on its grid: trajectory, load, motor, operators and the
/// elastic torque the load requires (fixed data under perfect tracking).
struct Task {
    Trajectory trajectory;
    LoadModel load;
    MotorParams motor;
    DiffOperators ops;
    Vector tau_ela;

    [[nodiscard]] int n() const { return ops.n; }
    [[nodiscard]] double dt() const { return ops.dt; }
};

Task make_task(Trajectory traj, const LoadModel& load, const MotorParams& motor);

/// Which energy terms enter the quadratic cost. `total` is the motor energy;
/// `joule` and `viscous` isolate the winding and friction losses.
enum class EnergyTerms { total, joule, viscous };

std::string to_string(EnergyTerms terms);
EnergyTerms parse_energy_terms(const std::string& s);

/// E_m(q) = q'Q_e q + A_e q + c_e, with tau_m / k_m = F q + c.
struct EnergyCost {
    EnergyTerms terms = EnergyTerms::total;
    SparseMatrix Q_e;
    Vector A_e;  ///< stored as a column; the row vector of the cost is A_e'
    double c_e = 0.0;
    SparseMatrix F;
    Vector c;

    [[nodiscard]] double evaluate(const Vector& q) const;
    [[nodiscard]] Vector gradient(const Vector& q) const;  ///< 2 Q_e q + A_e
};

EnergyCost assemble_energy_cost(const Task& task, EnergyTerms terms = EnergyTerms::total);

/// Per-sample motor power p_m,i = q'G_i q + H_i q and its convex surrogate
/// p_cvx,i = q'G_cvx,i q + H_i q with G_cvx,i = b_m D_i' D_i.
///
/// Nothing n x n per sample is stored: G_i = U_i' D_i with U = I_m D2 + b_m D,
/// H_i = h_i D_i with h_i = -tau_ela,i / (eta r), and G_cvx,i = f_i f_i' with
/// the factor f_i = sqrt(b_m) D_i'.
struct PowerTerms {
    SparseMatrix D;
    SparseMatrix U;
    Vector h;
    double b_m = 0.0;

    [[nodiscard]] int n() const { return static_cast<int>(D.rows()); }
    [[nodiscard]] Vector power(const Vector& q) const;
    [[nodiscard]] Vector power_cvx(const Vector& q) const;

    [[nodiscard]] SparseVector cvx_factor(int i) const;  ///< f_i
    [[nodiscard]] SparseVector H(int i) const;
    /// Explicit matrices, for inspection and tests.
    [[nodiscard]] SparseMatrix G(int i) const;
    [[nodiscard]] SparseMatrix G_cvx(int i) const;
};

PowerTerms assemble_power_terms(const Task& task);

/// Rows ordered by time (the trajectory's own sample order, with the wrap row
/// for the first sample) or by torque level (consecutive samples of the
/// sorted torque sequence). Both have two nonzeros +-1/r per row.
enum class MonotonicityMode { cyclic, global };

std::string to_string(MonotonicityMode mode);
MonotonicityMode parse_monotonicity_mode(const std::string& s);

/// A1 q_m <= b1 - eps_strict and A2 q_m = b2.
struct MonotonicityRows {
    MonotonicityMode mode = MonotonicityMode::cyclic;
    SparseMatrix A1;
    Vector b1;
    SparseMatrix A2;
    Vector b2;
    double eps_strict = 0.0;
};

/// Default strictness margin: 1e-8 * r * max |dq_l| over consecutive samples.
double default_eps_strict(const Vector& q_l, double r);

/// Torque differences with |dtau| <= tie_tolerance become equality rows.
MonotonicityRows assemble_monotonicity(const Vector& tau_ela, const Vector& q_l, double r,
                                       double eps_strict,
                                       MonotonicityMode mode = MonotonicityMode::cyclic,
                                       double tie_tolerance = 0.0);

struct ActuatorLimits {
    std::optional<double> tau_max;
    std::optional<double> dq_max;
    std::optional<double> delta_max;

    [[nodiscard]] bool any() const { return tau_max || dq_max || delta_max; }
    static ActuatorLimits from_motor(const MotorParams& p,
                                     std::optional<double> delta_max = std::nullopt) {
        return {p.tau_max, p.dq_max, delta_max};
    }
};

/// Affine inequality block G q_m <= h: for every present limit, rows
/// +expr_i <= limit and -expr_i <= limit for each sample.
struct LimitRows {
    SparseMatrix G;
    Vector h;
    int torque_rows = 0;
    int speed_rows = 0;
    int elongation_rows = 0;
};

LimitRows assemble_actuator_limits(const Task& task, const ActuatorLimits& limits);

struct ConstraintSystem {
    MonotonicityRows monotonicity;
    LimitRows limits;
    ActuatorLimits values;
};

struct ConstraintOptions {
    MonotonicityMode mode = MonotonicityMode::global;
    /// Margin for the strict inequalities; default_eps_strict() when unset.
    std::optional<double> eps_strict;
    /// Relative to max |tau_ela|.
    double relative_tie_tolerance = 1e-9;
    ActuatorLimits limits;
};

ConstraintSystem assemble_constraints(const Task& task, const ConstraintOptions& options);

struct Weights {
    double theta = 1.0;
    double gamma1 = 0.02;
    double gamma2 = 300.0;

    void validate() const;
};

/// Layout of the decision vector of the lowered program: [q_m; s; a], where the
/// slacks are present only when they enter the objective.
struct VariableLayout {
    int n = 0;
    int s_index = -1;  ///< peak convex power slack [W]
    int a_index = -1;  ///< peak acceleration slack [rad/s^2]

    [[nodiscard]] int size() const {
        return n + (s_index >= 0 ? 1 : 0) + (a_index >= 0 ? 1 : 0);
    }
};

/// Epigraph-form multiobjective program
///
///   minimize  theta gamma2 E(q) + (1 - theta)(s + gamma1 a)
///   s.t.      q'G_cvx,i q + H_i q <= s,   +-(D2 q)_i <= a,
///             A1 q <= b1 - eps, A2 q = b2, actuator rows.
///
/// With theta = 1 the slacks and their rows are pruned; with gamma1 = 0 the
/// acceleration slack is pruned. When no row fixes the absolute motor angle
/// (no elongation limit) a gauge row sum(q/r - q_l) = 0 is appended; it
/// selects one member of the family q + const of equally good solutions.
struct ProblemInstance {
    Task task;
    EnergyCost energy;
    PowerTerms power;
    ConstraintSystem constraints;
    Weights weights;
    VariableLayout layout;
    bool gauge_fixed = false;

    [[nodiscard]] int n() const { return task.n(); }

    /// Scalar objective at (q, s, a).
    [[nodiscard]] double objective(const Vector& q, double s, double a) const;
    /// Objective with the slacks at their tight values max(p_cvx), |D2 q|_inf.
    [[nodiscard]] double objective_tight(const Vector& q) const;

    /// Stiff-linear-spring starting point q = r q_l - r tau_ela / k0.
    [[nodiscard]] Vector feasibility_seed() const;
    /// Full decision vector for a q with slacks 10% above their tight values.
    [[nodiscard]] Vector initial_point(const Vector& q) const;

    /// The program in generic form (same variable order as `layout`).
    [[nodiscard]] Qcqp lower() const;
    /// Diagonal variable scaling used by solve(): x = scale .* x_scaled.
    [[nodiscard]] Vector variable_scale() const;

    /// Hessian of the objective restricted to q (2 theta gamma2 Q_e).
    [[nodiscard]] SparseMatrix objective_hessian() const;
};

ProblemInstance build_problem(Task task, EnergyCost energy, PowerTerms power,
                              ConstraintSystem constraints, const Weights& weights);

/// Convenience: assemble every block for a task and build the instance.
ProblemInstance build_problem(const Task& task, EnergyTerms terms,
                              const ConstraintOptions& constraints, const Weights& weights);

/// Domain-level solution of a ProblemInstance.
struct Solution {
    Vector q_m;
    double s = 0.0;  ///< peak convex power slack [W] (tight value when pruned)
    double a = 0.0;  ///< peak acceleration slack [rad/s^2] (tight value when pruned)
    double objective = 0.0;
    SolveStatus status = SolveStatus::max_iter;
    KktResiduals kkt;
    int iterations = 0;
    Multipliers multipliers;
    std::string message;

    [[nodiscard]] bool ok() const { return status == SolveStatus::optimal; }
};

Solution solve(const ProblemInstance& inst, const SolverConfig& cfg = {});

/// Residuals of a candidate (q, s, a) against the lowered program.
KktResiduals kkt_residuals(const ProblemInstance& inst, const Vector& x, const Multipliers& mult);

/// Debug dump of the lowered program: dimensions, sparsity triplets, cost
/// coefficients. Doubles are written with round-trip precision.
void write_problem_json(std::ostream& out, const Qcqp& prob);
Qcqp read_problem_json(std::istream& in);

}  // namespace springopt
