// springopt: command-line front end for spring design runs.
//
//   springopt generate-cubic [-c cfg] [--n N] [--q0 Q] ...
//   springopt design         [-c cfg] [--theta T] [--cost C] ...
//   springopt sweep          [-c cfg] [--points P] [--svg] ...
//   springopt baseline       [-c cfg] [--objective O] ...
//   springopt validate       [--tolerance-scale S] ...
//
// Exit codes: 0 success, 2 infeasible, 3 solver failure, 4 input error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <springopt/analysis.hpp>
#include <springopt/error.hpp>
#include <springopt/report.hpp>
#include <springopt/validation.hpp>

#include "config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace springopt;

namespace {

enum Exit { ok = 0, infeasible = 2, solver_failure = 3, input_error = 4 };

struct Common {
    std::string config;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> flags;  // dedicated flags, applied last
};

// Registers `--name value` as an override of `key`.
void flag(CLI::App* cmd, Common& c, const std::string& name, const std::string& key, const std::string& help) {
    cmd->add_option_function<std::string>(
        name, [&c, key](const std::string& v) { c.flags.emplace_back(key, v); }, help);
}

void switch_flag(CLI::App* cmd, Common& c, const std::string& name, const std::string& key,
                 const std::string& value, const std::string& help) {
    cmd->add_flag_callback(name, [&c, key, value] { c.flags.emplace_back(key, value); }, help);
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config, "Config file (key = value lines)");
    cmd->add_option("--set", c.sets, "Override a config key, key=value (repeatable)");
    flag(cmd, c, "-o,--output-dir", "output_dir", "Directory for output files");
    flag(cmd, c, "--task", "task", "cubic, running, walking or file");
    flag(cmd, c, "--n", "n", "Grid size (samples per period)");
    flag(cmd, c, "--seed", "seed", "Random seed");
    switch_flag(cmd, c, "--no-timings", "timings", "false", "Leave wall-clock timings out of reports");
}

cli::RunConfig load(const Common& c, const cli::KeyValues& forced = {}) {
    cli::KeyValues kv;
    fs::path base;
    if (!c.config.empty()) {
        kv = cli::load_config(c.config);
        base = fs::path(c.config).parent_path();
    }
    for (const auto& s : c.sets) {
        auto [k, v] = cli::parse_assignment(s);
        kv[k] = v;
    }
    for (const auto& [k, v] : c.flags) kv[k] = v;
    for (const auto& [k, v] : forced) kv[k] = v;
    return cli::resolve(kv, base);
}

std::ofstream open_output(const cli::RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output_dir);
    const fs::path p = cfg.output_dir / name;
    std::ofstream out(p);
    if (!out) throw InputError("cannot write '" + p.string() + "'");
    return out;
}

void write_json(const cli::RunConfig& cfg, const std::string& name, const json& j) {
    auto out = open_output(cfg, name);
    out << j.dump(2) << '\n';
}

ReportOptions report_options(const cli::RunConfig& cfg, const std::string& command, const std::string& hash) {
    ReportOptions o;
    o.include_timings = cfg.timings;
    o.metadata = {{"command", command}, {"config_hash", hash}, {"task", cli::to_string(cfg.task)}};
    return o;
}

json config_json(const cli::RunConfig& cfg) {
    json j = json::object();
    for (const auto& [k, v] : cfg.canonical()) j[k] = v;
    return j;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_generate_cubic(const Common& c) {
    const auto cfg = load(c, {{"task", "cubic"}});
    const auto hash = cfg.hash();
    const auto osc = generate_cubic_oscillation(cfg.cubic, cfg.resolved_n());
    const std::vector<std::string> comments = {
        "config_hash: " + hash, "period_s: " + format_double(osc.period), "energy_J: " + format_double(osc.energy),
        "max_energy_drift: " + format_double(osc.max_energy_drift)};
    {
        auto out = open_output(cfg, "trajectory.csv");
        write_trajectory(out, osc.trajectory, comments);
    }
    json j{{"command", "generate-cubic"},
           {"config_hash", hash},
           {"config", config_json(cfg)},
           {"n", osc.trajectory.size()},
           {"period_s", osc.period},
           {"energy_J", osc.energy},
           {"max_energy_drift", osc.max_energy_drift},
           {"internal_steps", osc.internal_steps}};
    write_json(cfg, "cubic.json", j);
    std::printf("period %.9g s, %d samples -> %s\n", osc.period, osc.trajectory.size(),
                (cfg.output_dir / "trajectory.csv").string().c_str());
    return ok;
}

int exit_for(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return ok;
        case SolveStatus::infeasible: return infeasible;
        default: return solver_failure;
    }
}

int cmd_design(const Common& c) {
    const auto cfg = load(c);
    const auto hash = cfg.hash();
    const Task task = build_task(cfg);

    DesignOptions opt;
    opt.terms = cfg.cost;
    opt.constraints.mode = cfg.monotonicity;
    opt.constraints.limits = cfg.limits();
    opt.weights = cfg.weights;
    opt.solver = cfg.solver;
    const auto t0 = std::chrono::steady_clock::now();
    const auto design = design_spring(task, opt);
    const double secs = seconds_since(t0);
    const Metrics rigid = rigid_baseline(task);

    json j = design_report(design, rigid, report_options(cfg, "design", hash));
    j["config"] = config_json(cfg);
    j["limits_satisfied"] = design.solution.ok() && design.metrics.within(opt.constraints.limits);
    if (cfg.timings) j["timing"] = {{"solve_seconds", secs}};
    write_json(cfg, "design.json", j);

    if (design.solution.q_m.size() == task.n()) {
        auto out = open_output(cfg, "trace.csv");
        const auto& p = task.motor;
        const Vector tau_m = motor_torque(design.solution.q_m, task.tau_ela, p, task.ops);
        const Vector dq = task.ops.D * design.solution.q_m;
        out << "# config_hash: " << hash << '\n';
        out << "time,q_l,q_m,delta,tau_ela,tau_m,dq_m,p_m\n";
        for (int i = 0; i < task.n(); ++i) {
            out << format_double(i * task.dt()) << ',' << format_double(task.trajectory.q_l[i]) << ','
                << format_double(design.solution.q_m[i]) << ',' << format_double(design.delta[i]) << ','
                << format_double(task.tau_ela[i]) << ',' << format_double(tau_m[i]) << ',' << format_double(dq[i])
                << ',' << format_double(tau_m[i] * dq[i]) << '\n';
        }
    }

    const auto& s = design.solution;
    std::printf("%s after %d iterations: energy %.6g J (joule %.6g, viscous %.6g), peak power %.6g W\n",
                to_string(s.status).c_str(), s.iterations, design.metrics.energy.total, design.metrics.energy.joule,
                design.metrics.energy.viscous, design.metrics.peak_power);
    if (!s.ok()) {
        std::fprintf(stderr, "springopt: %s\n", s.message.c_str());
        return exit_for(s.status);
    }
    if (!design.profile) {
        std::fprintf(stderr, "springopt: no spring profile: %s\n", design.profile_error.c_str());
        return solver_failure;
    }
    std::map<std::string, std::string> prov = design.profile->provenance();
    prov["config_hash"] = hash;
    prov["cost"] = to_string(cfg.cost);
    prov["theta"] = format_double(cfg.weights.theta);
    prov["task"] = cli::to_string(cfg.task);
    auto out = open_output(cfg, "profile.csv");
    write_profile(out, SpringProfile(design.profile->samples(), prov));
    std::printf("profile: %zu samples, cubic fit %.6g N m/rad^3\n", design.profile->samples().size(),
                design.profile->cubic_coefficient());
    return ok;
}

LinearBaselineOptions linear_options(const cli::RunConfig& cfg) {
    LinearBaselineOptions lo;
    lo.objective = cfg.baseline_objective;
    lo.weights = cfg.weights;
    lo.limits = cfg.limits();
    return lo;
}

int cmd_sweep(const Common& c) {
    const auto cfg = load(c);
    const auto hash = cfg.hash();
    const Task task = build_task(cfg);

    SweepOptions opt;
    opt.n_points = cfg.sweep_points;
    opt.weights = cfg.weights;
    opt.terms = cfg.cost;
    opt.constraints.mode = cfg.monotonicity;
    opt.constraints.limits = cfg.limits();
    opt.solver = cfg.solver;
    opt.threads = cfg.threads;
    const Sweep sweep = tradeoff_sweep(task, opt);
    const LinearBaseline linear = linear_spring_baseline(task, linear_options(cfg));

    {
        auto out = open_output(cfg, "curve.csv");
        out << "# config_hash: " << hash << '\n';
        write_curve_csv(out, sweep);
    }
    json j = sweep_report(sweep, report_options(cfg, "sweep", hash), linear);
    j["config"] = config_json(cfg);
    write_json(cfg, "sweep.json", j);
    if (cfg.svg) {
        auto out = open_output(cfg, "sweep.svg");
        out << "<!-- config_hash: " << hash << " -->\n";
        write_sweep_svg(out, sweep, linear.best);
    }

    int feasible = 0;
    for (const auto& p : sweep.points) feasible += p.feasible ? 1 : 0;
    std::printf("%d of %zu points optimal, knee at index %d\n", feasible, sweep.points.size(), sweep.knee);
    if (feasible == 0) {
        bool all_infeasible = true;
        for (const auto& p : sweep.points) all_infeasible = all_infeasible && p.status == SolveStatus::infeasible;
        return all_infeasible ? infeasible : solver_failure;
    }
    return ok;
}

int cmd_baseline(const Common& c) {
    const auto cfg = load(c);
    const auto hash = cfg.hash();
    const Task task = build_task(cfg);
    const Metrics rigid = rigid_baseline(task);
    const auto lo = linear_options(cfg);
    const LinearBaseline linear = linear_spring_baseline(task, lo);

    json j = linear_report(linear, rigid, report_options(cfg, "baseline", hash));
    j["config"] = config_json(cfg);
    j["rigid_within_limits"] = rigid.within(lo.limits);
    j["linear_feasible"] = linear.best.has_value();
    write_json(cfg, "baseline.json", j);

    auto out = open_output(cfg, "linear_grid.csv");
    out << "# config_hash: " << hash << '\n';
    out << "k,feasible,energy_J,peak_W,score\n";
    for (const auto& cand : linear.grid) {
        out << format_double(cand.k) << ',' << (cand.feasible ? 1 : 0) << ','
            << format_double(cand.metrics.energy.dissipated()) << ',' << format_double(cand.metrics.peak_power)
            << ',' << format_double(cand.score) << '\n';
    }

    std::printf("rigid: dissipated %.6g J, peak %.6g W%s\n", rigid.energy.dissipated(), rigid.peak_power,
                rigid.within(lo.limits) ? "" : " (violates limits)");
    if (linear.best) {
        std::printf("linear: k = %.6g N m/rad, dissipated %.6g J, peak %.6g W\n", linear.best->k,
                    linear.best->metrics.energy.dissipated(), linear.best->metrics.peak_power);
    } else {
        std::printf("linear: no feasible stiffness\n");
    }
    return ok;
}

int cmd_validate(const Common& c) {
    const auto cfg = load(c);
    const auto hash = cfg.hash();
    validation::Options o;
    o.tolerance_scale = cfg.tolerance_scale;
    o.planted_instances = cfg.planted_instances;
    o.seed = cfg.seed;
    const auto checks = validation::run_all(o);

    bool all = true;
    json list = json::array();
    for (const auto& ch : checks) {
        all = all && ch.passed;
        list.push_back({{"name", ch.name},
                        {"value", ch.value},
                        {"tolerance", ch.tolerance},
                        {"passed", ch.passed},
                        {"detail", ch.detail}});
        std::printf("%-24s %s  %.3e <= %.3e  %s\n", ch.name.c_str(), ch.passed ? "pass" : "FAIL", ch.value,
                    ch.tolerance, ch.detail.c_str());
    }
    json j{{"command", "validate"}, {"config_hash", hash}, {"config", config_json(cfg)}, {"passed", all},
           {"checks", std::move(list)}};
    write_json(cfg, "validation.json", j);
    return all ? ok : solver_failure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlinear series-elastic spring design"};
    app.require_subcommand(1);
    Common common;

    auto* gen = app.add_subcommand("generate-cubic", "Sample one period of the cubic-spring oscillation");
    add_common(gen, common);
    flag(gen, common, "--q0", "cubic.q0", "Release position [rad]");
    flag(gen, common, "--alpha", "cubic.alpha", "Cubic stiffness [N m/rad^3]");
    flag(gen, common, "--inertia", "cubic.inertia", "Load inertia [kg m^2]");

    auto* design = app.add_subcommand("design", "Solve one design instance");
    add_common(design, common);
    flag(design, common, "--theta", "theta", "Energy/peak-power trade-off in [0, 1]");
    flag(design, common, "--cost", "cost", "total, joule or viscous");
    flag(design, common, "--delta-max", "limits.delta_max", "Elongation limit [rad] or none");
    switch_flag(design, common, "--limits", "limits.torque", "true", "Enforce the motor torque limit");
    switch_flag(design, common, "--speed-limit", "limits.speed", "true", "Enforce the motor speed limit");

    auto* sweep = app.add_subcommand("sweep", "Trade-off sweep over theta");
    add_common(sweep, common);
    flag(sweep, common, "--points", "sweep.points", "Number of theta values");
    flag(sweep, common, "--threads", "sweep.threads", "Concurrent solves (0: all cores)");
    flag(sweep, common, "--cost", "cost", "total, joule or viscous");
    switch_flag(sweep, common, "--svg", "sweep.svg", "true", "Also write sweep.svg");

    auto* baseline = app.add_subcommand("baseline", "Rigid and best linear-spring actuators");
    add_common(baseline, common);
    flag(baseline, common, "--objective", "baseline.objective", "energy, peak or blend");
    flag(baseline, common, "--delta-max", "limits.delta_max", "Elongation limit [rad] or none");

    auto* validate = app.add_subcommand("validate", "Run the numerical self-checks");
    add_common(validate, common);
    flag(validate, common, "--tolerance-scale", "validate.tolerance_scale", "Multiplier for every tolerance");
    flag(validate, common, "--planted", "validate.planted", "Number of planted QCQP instances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return input_error;
    }

    try {
        if (*gen) return cmd_generate_cubic(common);
        if (*design) return cmd_design(common);
        if (*sweep) return cmd_sweep(common);
        if (*baseline) return cmd_baseline(common);
        if (*validate) return cmd_validate(common);
    } catch (const InputError& e) {
        std::fprintf(stderr, "springopt: input error: %s\n", e.what());
        return input_error;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "springopt: numerical failure: %s\n", e.what());
        return solver_failure;
    } catch (const fs::filesystem_error& e) {
        std::fprintf(stderr, "springopt: %s\n", e.what());
        return input_error;
    }
    return input_error;
}
