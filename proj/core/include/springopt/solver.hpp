#pragma once

#include <iosfwd>
#include <string>

#include "springopt/qcqp.hpp"

namespace springopt {

struct SolverConfig {
    double tol_gap = 1e-8;         ///< relative duality gap
    double tol_feas = 1e-8;        ///< relative primal and dual feasibility
    int max_iter = 200;
    double regularization = 1e-10; ///< static jitter, relative to the KKT diagonal scale
    /// Iterations without primal progress before infeasibility is declared.
    int stall_window = 20;
    /// Optional text log, one line per iteration (see write_iteration_header).
    std::ostream* log = nullptr;

    void validate() const;
};

enum class SolveStatus { optimal, max_iter, infeasible, unbounded };

std::string to_string(SolveStatus status);

/// Scaled first-order optimality measures.
///
///   stationarity     |Px + c + J'z + A'y|_inf / (1 + largest term)
///   primal           max(|[f(x)]_+|_inf, |Ax - b|_inf) / (1 + |h|, |b| scale)
///   dual             |[-z]_+|_inf / (1 + |z|_inf)
///   complementarity  max_i |z_i| [-f_i(x)]_+ / (1 + |objective|)
///   gap              sum_i |z_i| [-f_i(x)]_+ / (1 + |objective|)
///
/// Constraint violations enter only `primal`.
struct KktResiduals {
    double stationarity = 0.0;
    double primal = 0.0;
    double dual = 0.0;
    double complementarity = 0.0;
    double gap = 0.0;

    [[nodiscard]] bool within(const SolverConfig& cfg) const;
};

struct Multipliers {
    Vector z;  ///< inequality multipliers (linear rows first, then quadratic rows)
    Vector y;  ///< equality multipliers
};

struct QcqpResult {
    SolveStatus status = SolveStatus::max_iter;
    Vector x;
    Multipliers multipliers;
    double objective = 0.0;
    KktResiduals kkt;
    int iterations = 0;
    /// For infeasible runs: index and amount of the most violated constraint
    /// at the final iterate (inequalities first, then equalities).
    int witness_index = -1;
    double witness_violation = 0.0;
    std::string message;
};

KktResiduals kkt_residuals(const Qcqp& prob, const Vector& x, const Multipliers& mult);

/// Primal-dual interior-point solve. `x0` seeds the primal iterate (it need
/// not be feasible). Deterministic for identical inputs.
QcqpResult solve_qcqp(const Qcqp& prob, const SolverConfig& cfg = {}, const Vector* x0 = nullptr);

void write_iteration_header(std::ostream& out);

}  // namespace springopt
