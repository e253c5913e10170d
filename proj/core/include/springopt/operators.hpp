#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace springopt {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Periodic difference operators on a uniform grid of n samples spanning one
// period. Sample n+1 wraps to sample 1.
//
//   D  row i: (x[i+1] - x[i-1]) / (2 dt)
//   D2 row i: (x[i+1] - 2 x[i] + x[i-1]) / dt^2
struct DiffOperators {
    int n = 0;
    double dt = 0.0;
    SparseMatrix D;
    SparseMatrix D2;

    [[nodiscard]] Vector first(const Vector& x) const { return D * x; }
    [[nodiscard]] Vector second(const Vector& x) const { return D2 * x; }
};

/// Builds D and D2 for n >= 4 samples; throws InputError otherwise.
DiffOperators build_operators(int n, double dt);

// Matrix-free versions of the same stencils (agree with D * x, D2 * x to
// rounding). Used for trajectory ingestion where the matrices are not needed.
Vector periodic_first_difference(const Vector& x, double dt);
Vector periodic_second_difference(const Vector& x, double dt);

}  // namespace springopt
