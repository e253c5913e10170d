#include "springopt/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <thread>

#include "springopt/error.hpp"

namespace springopt {

namespace {

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

void require_length(const Vector& q_m, const Task& task) {
    if (q_m.size() != task.n()) {
        throw InputError("motor trajectory has " + std::to_string(q_m.size()) + " samples, task has " +
                         std::to_string(task.n()));
    }
}

}  // namespace

EnergyBreakdown energy_breakdown(const Vector& q_m, const Task& task) {
    require_length(q_m, task);
    const auto& p = task.motor;
    const double dt = task.dt();
    const Vector tau_m = motor_torque(q_m, task.tau_ela, p, task.ops);
    const Vector dq = task.ops.D * q_m;
    const double km = p.k_m();
    EnergyBreakdown e;
    e.joule = tau_m.squaredNorm() / (km * km) * dt;
    e.viscous = p.b_m * dq.squaredNorm() * dt;
    e.load_mech = -task.tau_ela.dot(task.trajectory.dq_l) * dt / p.eta;
    e.total = e.joule + e.viscous + e.load_mech;
    return e;
}

double peak_power_true(const Vector& q_m, const Task& task) {
    require_length(q_m, task);
    return max_abs(power_series(q_m, task.tau_ela, task.motor, task.ops));
}

double peak_power_cvx(const Vector& q_m, const Task& task) {
    require_length(q_m, task);
    const Vector dq = task.ops.D * q_m;
    const Vector h = -task.tau_ela / (task.motor.eta * task.motor.r);
    return (task.motor.b_m * dq + h).cwiseProduct(dq).maxCoeff();
}

bool Metrics::within(const ActuatorLimits& limits, double slack) const {
    if (limits.tau_max && max_torque > *limits.tau_max + slack) return false;
    if (limits.dq_max && max_speed > *limits.dq_max + slack) return false;
    if (limits.delta_max && max_elongation > *limits.delta_max + slack) return false;
    return true;
}

Metrics evaluate_metrics(const Vector& q_m, const Task& task) {
    require_length(q_m, task);
    Metrics m;
    m.energy = energy_breakdown(q_m, task);
    m.peak_power = peak_power_true(q_m, task);
    m.peak_power_cvx = peak_power_cvx(q_m, task);
    m.max_torque = max_abs(motor_torque(q_m, task.tau_ela, task.motor, task.ops));
    m.max_speed = max_abs(task.ops.D * q_m);
    m.max_elongation = max_abs(elongation(q_m, task.trajectory.q_l, task.motor.r));
    m.max_accel = max_abs(task.ops.D2 * q_m);
    return m;
}

Metrics rigid_baseline(const Task& task) {
    return evaluate_metrics(rigid_motor_position(task.trajectory, task.motor.r), task);
}

Vector linear_spring_motor_position(const Task& task, double k) {
    if (!(k > 0.0) || !std::isfinite(k)) throw InputError("linear spring stiffness must be positive");
    return task.motor.r * (task.trajectory.q_l - task.tau_ela / k);
}

std::vector<double> default_stiffness_grid(const Task& task) {
    const auto& q_l = task.trajectory.q_l;
    const double range = std::max(q_l.maxCoeff() - q_l.minCoeff(), 1e-12);
    const double k_ref = std::max(max_abs(task.tau_ela), 1e-12) / range;
    constexpr int count = 241;
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i) grid[i] = k_ref * std::pow(10.0, -3.0 + 6.0 * i / (count - 1));
    return grid;
}

namespace {

double linear_score(const Metrics& m, const LinearBaselineOptions& o) {
    switch (o.objective) {
        case LinearObjective::energy: return m.energy.total;
        case LinearObjective::peak: return m.peak_power;
        case LinearObjective::blend: break;
    }
    const auto& w = o.weights;
    return w.theta * w.gamma2 * m.energy.total + (1.0 - w.theta) * (m.peak_power_cvx + w.gamma1 * m.max_accel);
}

LinearCandidate evaluate_linear(const Task& task, double k, const LinearBaselineOptions& o) {
    LinearCandidate c;
    c.k = k;
    c.metrics = evaluate_metrics(linear_spring_motor_position(task, k), task);
    c.feasible = c.metrics.within(o.limits);
    c.score = c.feasible ? linear_score(c.metrics, o) : std::numeric_limits<double>::infinity();
    return c;
}

}  // namespace

LinearBaseline linear_spring_baseline(const Task& task, const LinearBaselineOptions& options) {
    options.weights.validate();
    std::vector<double> grid = options.k_grid.empty() ? default_stiffness_grid(task) : options.k_grid;
    for (const double k : grid) {
        if (!(k > 0.0) || !std::isfinite(k)) throw InputError("stiffness grid entries must be positive");
    }
    std::sort(grid.begin(), grid.end());

    LinearBaseline out;
    out.grid.reserve(grid.size());
    int best = -1;
    for (const double k : grid) {
        out.grid.push_back(evaluate_linear(task, k, options));
        const auto& c = out.grid.back();
        if (c.feasible && (best < 0 || c.score < out.grid[best].score)) best = static_cast<int>(out.grid.size()) - 1;
    }
    if (best < 0) return out;
    out.best = out.grid[best];

    // Golden-section search in log k over the cells adjacent to the best grid point.
    const int last = static_cast<int>(grid.size()) - 1;
    double lo = std::log(grid[std::max(0, best - 1)]);
    double hi = std::log(grid[std::min(last, best + 1)]);
    if (hi <= lo) return out;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    LinearCandidate c1 = evaluate_linear(task, std::exp(x1), options);
    LinearCandidate c2 = evaluate_linear(task, std::exp(x2), options);
    for (int it = 0; it < options.refine_iterations; ++it) {
        if (c1.score <= c2.score) {
            hi = x2;
            x2 = x1;
            c2 = c1;
            x1 = hi - g * (hi - lo);
            c1 = evaluate_linear(task, std::exp(x1), options);
        } else {
            lo = x1;
            x1 = x2;
            c1 = c2;
            x2 = lo + g * (hi - lo);
            c2 = evaluate_linear(task, std::exp(x2), options);
        }
    }
    const LinearCandidate& refined = c1.score <= c2.score ? c1 : c2;
    if (refined.feasible && refined.score < out.best->score) out.best = refined;
    return out;
}

DesignResult design_spring(const Task& task, const DesignOptions& options) {
    const ProblemInstance inst = build_problem(task, options.terms, options.constraints, options.weights);
    DesignResult res;
    res.solution = solve(inst, options.solver);
    res.metrics = evaluate_metrics(res.solution.q_m, task);
    res.delta = elongation(res.solution.q_m, task.trajectory.q_l, task.motor.r);
    if (!options.build_profile) return res;
    if (!res.solution.ok()) {
        res.profile_error = "no profile: solver status " + to_string(res.solution.status);
        return res;
    }
    char buf[32];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::map<std::string, std::string> prov{
        {"terms", to_string(options.terms)},
        {"theta", fmt(options.weights.theta)},
        {"gamma1", fmt(options.weights.gamma1)},
        {"gamma2", fmt(options.weights.gamma2)},
        {"samples", std::to_string(task.n())},
        {"monotonicity", to_string(options.constraints.mode)},
        {"objective", fmt(res.solution.objective)},
    };
    if (!task.trajectory.label.empty()) prov["task"] = task.trajectory.label;
    try {
        res.profile = build_profile(res.delta, task.tau_ela, options.profile, std::move(prov));
    } catch (const std::exception& e) {
        res.profile_error = e.what();
    }
    return res;
}

std::vector<double> theta_grid(int n_points) {
    if (n_points < 2) throw InputError("a sweep needs at least two points");
    std::vector<double> g{0.0};
    const int inner = n_points - 2;
    for (int i = 0; i < inner; ++i) {
        const double x = inner == 1 ? 0.0 : -6.0 + 12.0 * i / (inner - 1);
        g.push_back(1.0 / (1.0 + std::exp(-x)));
    }
    g.push_back(1.0);
    std::sort(g.begin(), g.end());
    return g;
}

Sweep tradeoff_sweep(const Task& task, const SweepOptions& options) {
    options.weights.validate();
    options.solver.validate();
    const std::vector<double> thetas = theta_grid(options.n_points);

    // Shared, read-only blocks; every point builds its own instance from them.
    const EnergyCost energy = assemble_energy_cost(task, options.terms);
    const PowerTerms power = assemble_power_terms(task);
    const ConstraintSystem constraints = assemble_constraints(task, options.constraints);

    Sweep sweep;
    sweep.rigid = rigid_baseline(task);
    sweep.points.resize(thetas.size());

    SolverConfig cfg = options.solver;
    cfg.log = nullptr;
    auto run = [&](std::size_t idx) {
        Weights w = options.weights;
        w.theta = thetas[idx];
        TradeoffPoint& pt = sweep.points[idx];
        pt.theta = w.theta;
        char ref[32];
        std::snprintf(ref, sizeof ref, "theta-%02zu", idx);
        pt.solution_ref = ref;
        const auto start = std::chrono::steady_clock::now();
        try {
            const ProblemInstance inst = build_problem(task, energy, power, constraints, w);
            const Solution sol = solve(inst, cfg);
            pt.status = sol.status;
            pt.iterations = sol.iterations;
            pt.feasible = sol.ok();
            pt.q_m = sol.q_m;
            const Metrics m = evaluate_metrics(sol.q_m, task);
            pt.energy_total = m.energy.total;
            pt.energy_dissipated = m.energy.dissipated();
            pt.peak_power = m.peak_power;
            pt.peak_power_cvx = m.peak_power_cvx;
            pt.max_accel = m.max_accel;
            pt.power_term = m.peak_power_cvx + w.gamma1 * m.max_accel;
            pt.rel_energy = relative_percent(pt.energy_dissipated, sweep.rigid.energy.dissipated());
            pt.rel_peak = relative_percent(pt.peak_power, sweep.rigid.peak_power);
        } catch (const NumericalError&) {
            pt.feasible = false;
            pt.status = SolveStatus::max_iter;
        }
        pt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    unsigned threads = options.threads > 0 ? static_cast<unsigned>(options.threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(thetas.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < thetas.size(); i = next++) run(i);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    sweep.knee = knee_point(sweep.points);
    return sweep;
}

int knee_point(const std::vector<TradeoffPoint>& points) {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
        if (points[i].feasible) idx.push_back(i);
    }
    if (idx.size() < 3) return -1;
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return points[a].theta < points[b].theta; });

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const int i : idx) {
        xmin = std::min(xmin, points[i].peak_power);
        xmax = std::max(xmax, points[i].peak_power);
        ymin = std::min(ymin, points[i].energy_dissipated);
        ymax = std::max(ymax, points[i].energy_dissipated);
    }
    const double sx = xmax > xmin ? xmax - xmin : 1.0;
    const double sy = ymax > ymin ? ymax - ymin : 1.0;
    auto pos = [&](int i) {
        return std::pair{(points[i].peak_power - xmin) / sx, (points[i].energy_dissipated - ymin) / sy};
    };

    // Menger curvature of consecutive triples.
    int best = -1;
    double best_k = 0.0;
    for (std::size_t j = 1; j + 1 < idx.size(); ++j) {
        const auto [x0, y0] = pos(idx[j - 1]);
        const auto [x1, y1] = pos(idx[j]);
        const auto [x2, y2] = pos(idx[j + 1]);
        const double a = std::hypot(x1 - x0, y1 - y0);
        const double b = std::hypot(x2 - x1, y2 - y1);
        const double c = std::hypot(x2 - x0, y2 - y0);
        if (a * b * c == 0.0) continue;
        const double area2 = std::abs((x1 - x0) * (y2 - y0) - (y1 - y0) * (x2 - x0));
        const double k = 2.0 * area2 / (a * b * c);
        if (k > best_k) {
            best_k = k;
            best = idx[j];
        }
    }
    return best;
}

}  // namespace springopt
