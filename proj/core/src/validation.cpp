#include "springopt/validation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "springopt/analysis.hpp"
#include "springopt/error.hpp"
#include "springopt/oracle.hpp"
#include "springopt/problem.hpp"

namespace springopt::validation {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

Check make_check(std::string name, double value, double tolerance, const Options& o, std::string detail = {}) {
    Check c;
    c.name = std::move(name);
    c.value = value;
    c.tolerance = tolerance * o.tolerance_scale;
    c.passed = std::isfinite(value) && value <= c.tolerance;
    c.detail = std::move(detail);
    return c;
}

// Random motor and smooth periodic direct-torque task on n samples.
Task random_task(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, u(rng)); };
    MotorParams m;
    m.k_t = log_uniform(0.02, 1.0);
    m.R = log_uniform(0.05, 5.0);
    m.I_m = log_uniform(1e-6, 1e-3);
    m.b_m = log_uniform(1e-6, 1e-3);
    m.r = log_uniform(5.0, 100.0);
    m.eta = 0.5 + 0.5 * u(rng);
    m.tau_max = 10.0;
    m.dq_max = 300.0;

    Trajectory traj;
    const double period = 0.5 + u(rng);
    traj.dt = period / n;
    traj.q_l = Vector::Zero(n);
    traj.tau_ext = Vector::Zero(n);
    for (int k = 1; k <= 3; ++k) {
        const double a = u(rng) / k, b = 50.0 * u(rng) / k, pa = two_pi * u(rng), pb = two_pi * u(rng);
        for (int i = 0; i < n; ++i) {
            const double t = two_pi * k * i / n;
            traj.q_l[i] += a * std::sin(t + pa);
            traj.tau_ext[i] += b * std::sin(t + pb);
        }
    }
    traj = synthesize_derivatives(std::move(traj));
    return make_task(std::move(traj), LoadModel::direct(), m);
}

Vector random_vector(std::mt19937_64& rng, int n, double scale) {
    std::normal_distribution<double> normal(0.0, scale);
    Vector v(n);
    for (int i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

}  // namespace

double loglog_slope(const std::vector<double>& h, const std::vector<double>& err) {
    if (h.size() != err.size() || h.size() < 2) throw InputError("slope fit needs two or more matching points");
    const double m = static_cast<double>(h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0) || !(err[i] > 0.0)) throw InputError("slope fit needs positive values");
        const double x = std::log(h[i]), y = std::log(err[i]);
        sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

Convergence derivative_convergence(int n0, int refinements) {
    if (n0 < 4 || refinements < 1) throw InputError("convergence study needs n0 >= 4 and one refinement");
    Convergence c;
    for (int level = 0; level <= refinements; ++level) {
        const int n = n0 << level;
        const double dt = 1.0 / n;
        Vector x(n), dx(n);
        for (int i = 0; i < n; ++i) {
            const double t = i * dt;
            x[i] = std::sin(two_pi * t) + 0.4 * std::cos(2.0 * two_pi * t + 0.3);
            dx[i] = two_pi * std::cos(two_pi * t) - 0.8 * two_pi * std::sin(2.0 * two_pi * t + 0.3);
        }
        const DiffOperators ops = build_operators(n, dt);
        c.n.push_back(n);
        c.h.push_back(dt);
        c.error.push_back((ops.D * x - dx).cwiseAbs().maxCoeff());
    }
    c.slope = loglog_slope(c.h, c.error);
    return c;
}

Convergence energy_identity_convergence(const MotorParams& motor, int n0, int refinements) {
    if (n0 < 4 || refinements < 1) throw InputError("convergence study needs n0 >= 4 and one refinement");
    motor.validate();
    Convergence c;
    for (int level = 0; level <= refinements; ++level) {
        const int n = n0 << level;
        const double dt = 1.0 / n;
        Vector q_l(n), dq_l(n), delta(n), tau(n);
        for (int i = 0; i < n; ++i) {
            const double w = two_pi * i * dt;
            q_l[i] = 0.3 * std::sin(w) + 0.1 * std::sin(2.0 * w + 0.4);
            dq_l[i] = two_pi * (0.3 * std::cos(w) + 0.2 * std::cos(2.0 * w + 0.4));
            delta[i] = 0.2 * std::sin(w + 0.7) + 0.05 * std::cos(3.0 * w);
            tau[i] = 100.0 * delta[i] + 40.0 * std::pow(delta[i], 3);
        }
        const Vector q_m = motor.r * (q_l - delta);
        const DiffOperators ops = build_operators(n, dt);
        const Vector tau_m = motor_torque(q_m, tau, motor, ops);
        const Vector dq = ops.D * q_m;
        const double lhs = tau_m.dot(dq) * dt;
        const double rhs = (motor.b_m * dq.squaredNorm() - tau.dot(dq_l) / motor.eta) * dt;
        c.n.push_back(n);
        c.h.push_back(dt);
        c.error.push_back(std::abs(lhs - rhs));
    }
    c.slope = loglog_slope(c.h, c.error);
    return c;
}

Check planted_suite(const Options& o) {
    std::mt19937_64 rng(o.seed);
    std::uniform_int_distribution<int> size(6, 50);
    double worst = 0.0;
    int failures = 0;
    for (int k = 0; k < o.planted_instances; ++k) {
        oracle::PlantFlags flags;
        switch (k % 4) {
            case 1: flags.quadratic = false; break;
            case 2: flags.all_active = true; break;
            case 3: flags.strictly_convex = false; break;
            default: break;
        }
        const auto inst = oracle::plant_instance(size(rng), rng(), flags);
        const auto res = solve_qcqp(inst.problem);
        const double gap = std::abs(res.objective - inst.objective_star) / std::max(1.0, std::abs(inst.objective_star));
        if (res.status != SolveStatus::optimal) ++failures;
        worst = std::max(worst, res.status == SolveStatus::optimal ? gap : std::numeric_limits<double>::infinity());
    }
    return make_check("planted_qcqp", worst, 1e-6, o,
                      std::to_string(o.planted_instances) + " instances, " + std::to_string(failures) +
                          " not optimal");
}

Check energy_gradient_check(const Options& o) {
    std::mt19937_64 rng(o.seed + 1);
    double worst = 0.0;
    for (auto terms : {EnergyTerms::total, EnergyTerms::joule, EnergyTerms::viscous}) {
        const Task task = random_task(rng, 24);
        const EnergyCost cost = assemble_energy_cost(task, terms);
        const Vector q = task.motor.r * task.trajectory.q_l + random_vector(rng, task.n(), 0.1);
        worst = std::max(worst, oracle::finite_diff_gradient_check(
                                    [&](const Vector& x) { return cost.evaluate(x); }, cost.gradient(q), q, 1e-5));
    }
    return make_check("energy_gradient", worst, 1e-6, o);
}

Check power_gradient_check(const Options& o) {
    std::mt19937_64 rng(o.seed + 2);
    const Task task = random_task(rng, 24);
    const PowerTerms pw = assemble_power_terms(task);
    const Vector q = task.motor.r * task.trajectory.q_l + random_vector(rng, task.n(), 0.1);
    double worst = 0.0;
    for (int i = 0; i < task.n(); i += 5) {
        const SparseMatrix G = pw.G_cvx(i);
        const Vector grad = 2.0 * (G * q) + Vector(pw.H(i));
        worst = std::max(worst, oracle::finite_diff_gradient_check(
                                    [&](const Vector& x) { return pw.power_cvx(x)[i]; }, grad, q, 1e-5));
    }
    return make_check("power_gradient", worst, 1e-6, o);
}

Check quadrature_cross_check(const Options& o) {
    std::mt19937_64 rng(o.seed + 3);
    double worst = 0.0;
    for (int draw = 0; draw < 5; ++draw) {
        const Task task = random_task(rng, 40);
        const auto& m = task.motor;
        const Vector q = m.r * task.trajectory.q_l + random_vector(rng, task.n(), 0.2);
        const auto s = oracle::scalar_motor_series(q, task.tau_ela, task.dt(), m.I_m, m.b_m, m.eta, m.r);
        const auto quad = oracle::quadrature_energy(s.dq_m, s.tau_m, task.dt(), m.k_m());
        const auto e = energy_breakdown(q, task);
        const double cost = assemble_energy_cost(task).evaluate(q);
        worst = std::max(worst, std::abs(e.joule - quad.joule) / std::max(1e-12, quad.joule));
        worst = std::max(worst, std::abs(cost - e.total) / std::max({1e-12, std::abs(e.total), e.joule}));
        const Vector p = assemble_power_terms(task).power(q);
        const Vector p_ref = s.tau_m.cwiseProduct(s.dq_m);
        worst = std::max(worst, (p - p_ref).cwiseAbs().maxCoeff() / std::max(1e-12, p_ref.cwiseAbs().maxCoeff()));
    }
    return make_check("quadrature_cross_check", worst, 1e-9, o);
}

Check convexity_check(const Options& o) {
    std::mt19937_64 rng(o.seed + 4);
    double worst = 0.0;  // largest -lambda_min / lambda_max
    for (int draw = 0; draw < o.convexity_draws; ++draw) {
        const Task task = random_task(rng, 24);
        constexpr EnergyTerms all_terms[] = {EnergyTerms::total, EnergyTerms::joule, EnergyTerms::viscous};
        const EnergyTerms terms = all_terms[draw % 3];
        const Eigen::MatrixXd Q(assemble_energy_cost(task, terms).Q_e);
        const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q, Eigen::EigenvaluesOnly).eigenvalues();
        worst = std::max(worst, -ev.minCoeff() / std::max(1e-300, ev.cwiseAbs().maxCoeff()));
        const PowerTerms pw = assemble_power_terms(task);
        for (int i = 0; i < task.n(); ++i) {
            const Eigen::MatrixXd G(pw.G_cvx(i));
            const Eigen::VectorXd g = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues();
            worst = std::max(worst, -g.minCoeff() / std::max(1e-300, g.cwiseAbs().maxCoeff()));
        }
    }
    return make_check("convexity", std::max(0.0, worst), 1e-10, o,
                      std::to_string(o.convexity_draws) + " parameter draws");
}

Check derivative_order_check(const Options& o) {
    const auto c = derivative_convergence();
    return make_check("derivative_order", std::abs(c.slope - 2.0), 0.2, o, "slope " + std::to_string(c.slope));
}

Check identity_order_check(const Options& o) {
    MotorParams m = MotorParams::ilm85x26();
    m.eta = 0.8;
    const auto c = energy_identity_convergence(m);
    return make_check("energy_identity_order", std::abs(c.slope - 2.0), 0.2, o, "slope " + std::to_string(c.slope));
}

std::vector<Check> run_all(const Options& o) {
    if (!(o.tolerance_scale >= 0.0) || !std::isfinite(o.tolerance_scale)) {
        throw InputError("tolerance scale must be finite and non-negative");
    }
    if (o.planted_instances < 1 || o.convexity_draws < 1) throw InputError("check counts must be positive");
    return {planted_suite(o),          energy_gradient_check(o),  power_gradient_check(o),
            quadrature_cross_check(o), convexity_check(o),       derivative_order_check(o),
            identity_order_check(o)};
}

}  // namespace springopt::validation
