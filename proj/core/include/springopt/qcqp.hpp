#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "springopt/operators.hpp"

namespace springopt {

using SparseVector = Eigen::SparseVector<double>;

/// Convex quadratic inequality with a rank-1 Hessian, kept in factored form:
///
///   (u' x)^2 + g' x <= h
struct RankOneConstraint {
    SparseVector u;
    SparseVector g;
    double h = 0.0;

    [[nodiscard]] double value(const Vector& x) const;  ///< (u'x)^2 + g'x - h
};

/// Generic convex QCQP
///
///   minimize    1/2 x'Px + c'x + c0
///   subject to  A x  = b
///               G x <= h
///               (u_k'x)^2 + g_k'x <= h_k   for every rank-one row k
///
/// P must be symmetric positive semidefinite (both triangles stored).
struct Qcqp {
    int n = 0;
    SparseMatrix P;
    Vector c;
    double c0 = 0.0;
    SparseMatrix A;
    Vector b;
    SparseMatrix G;
    Vector h;
    std::vector<RankOneConstraint> quad;

    /// Empty n-variable problem with correctly sized (zero-row) blocks.
    static Qcqp empty(int n);

    [[nodiscard]] int num_equalities() const { return static_cast<int>(A.rows()); }
    [[nodiscard]] int num_linear() const { return static_cast<int>(G.rows()); }
    [[nodiscard]] int num_quadratic() const { return static_cast<int>(quad.size()); }
    [[nodiscard]] int num_inequalities() const { return num_linear() + num_quadratic(); }

    [[nodiscard]] double objective(const Vector& x) const;
    [[nodiscard]] Vector objective_gradient(const Vector& x) const;

    /// Inequality values f(x) stacked as [G x - h; quadratic rows]; feasible iff <= 0.
    [[nodiscard]] Vector inequality_values(const Vector& x) const;

    /// Jacobian of inequality_values at x.
    [[nodiscard]] SparseMatrix inequality_jacobian(const Vector& x) const;

    /// Throws InputError on inconsistent dimensions or a non-symmetric P.
    void validate() const;
};

/// Equality residual A x - b.
Vector equality_residual(const Qcqp& prob, const Vector& x);

}  // namespace springopt
