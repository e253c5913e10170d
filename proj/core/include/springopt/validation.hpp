#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "springopt/discretization.hpp"

namespace springopt::validation {

/// Outcome of one self-check: `value` is compared against `tolerance`.
struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

struct Options {
    /// Multiplies every tolerance; 0 turns each check into an exact-zero test.
    double tolerance_scale = 1.0;
    int planted_instances = 120;
    int convexity_draws = 50;
    std::uint64_t seed = 1;
};

/// Least-squares slope of log(err) against log(h).
double loglog_slope(const std::vector<double>& h, const std::vector<double>& err);

struct Convergence {
    std::vector<int> n;
    std::vector<double> h;
    std::vector<double> error;
    double slope = 0.0;
};

/// Max error of the periodic D operator on a smooth test signal, for
/// n0, 2 n0, ..., 2^refinements n0 samples per unit period.
Convergence derivative_convergence(int n0 = 64, int refinements = 4);

/// |sum tau_m Dq_m dt - sum (b_m Dq_m^2 - tau_ela dq_l / eta) dt| for a smooth
/// periodic motion through a conservative spring. The continuous identity is
/// exact; the discrete residual vanishes with the grid.
Convergence energy_identity_convergence(const MotorParams& motor, int n0 = 64, int refinements = 4);

/// Planted QCQPs with n drawn from [6, 50]: worst relative objective gap
/// |f - f*| / max(1, |f*|) and the number of non-optimal solves.
Check planted_suite(const Options& options);
/// Finite differences against the analytic energy and power-surrogate gradients.
Check energy_gradient_check(const Options& options);
Check power_gradient_check(const Options& options);
/// Joule loss and per-sample power against scalar-stencil quadrature of the
/// same motion, and the quadratic-form cost against the energy breakdown.
Check quadrature_cross_check(const Options& options);
/// min eigenvalue of Q_e and of every G_cvx,i over random parameter draws,
/// relative to the largest eigenvalue, compared with -1e-10.
Check convexity_check(const Options& options);
Check derivative_order_check(const Options& options);
Check identity_order_check(const Options& options);

std::vector<Check> run_all(const Options& options);

}  // namespace springopt::validation
