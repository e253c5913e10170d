#include "config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <springopt/error.hpp>

namespace springopt::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
    return !k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '.';
    });
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end || !std::isfinite(out)) {
        throw InputError(key + ": expected a finite number, got '" + v + "'");
    }
    return out;
}

long long to_integer(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw InputError(key + ": expected an integer, got '" + v + "'");
    return out;
}

int to_int(const std::string& key, const std::string& v) {
    const long long x = to_integer(key, v);
    if (x < -2147483647LL || x > 2147483647LL) throw InputError(key + ": value out of range");
    return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "off" || v == "no" || v == "0") return false;
    throw InputError(key + ": expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string to_string(LinearObjective o) {
    switch (o) {
        case LinearObjective::energy: return "energy";
        case LinearObjective::peak: return "peak";
        case LinearObjective::blend: return "blend";
    }
    return "energy";
}

LinearObjective parse_objective(const std::string& v) {
    if (v == "energy") return LinearObjective::energy;
    if (v == "peak") return LinearObjective::peak;
    if (v == "blend") return LinearObjective::blend;
    throw InputError("baseline.objective: expected energy, peak or blend, got '" + v + "'");
}

TaskKind parse_task(const std::string& v) {
    if (v == "cubic") return TaskKind::cubic;
    if (v == "running") return TaskKind::running;
    if (v == "walking") return TaskKind::walking;
    if (v == "file") return TaskKind::file;
    throw InputError("task: expected cubic, running, walking or file, got '" + v + "'");
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot open '" + p.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::string to_string(TaskKind kind) {
    switch (kind) {
        case TaskKind::cubic: return "cubic";
        case TaskKind::running: return "running";
        case TaskKind::walking: return "walking";
        case TaskKind::file: return "file";
    }
    return "cubic";
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

KeyValues parse_config(std::istream& in, const std::string& origin) {
    KeyValues kv;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto where = origin + ":" + std::to_string(line_no) + ": ";
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '#' && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line.erase(i);
                break;
            }
        }
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw InputError(where + "expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (!valid_key(key)) throw InputError(where + "invalid key '" + key + "'");
        if (value.empty()) throw InputError(where + "missing value for '" + key + "'");
        if (!kv.emplace(key, value).second) throw InputError(where + "duplicate key '" + key + "'");
    }
    return kv;
}

KeyValues load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config '" + path.string() + "'");
    return parse_config(in, path.string());
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw InputError("expected key=value, got '" + text + "'");
    std::string key = trim(text.substr(0, eq)), value = trim(text.substr(eq + 1));
    if (!valid_key(key)) throw InputError("invalid key '" + key + "'");
    if (value.empty()) throw InputError("missing value for '" + key + "'");
    return {std::move(key), std::move(value)};
}

RunConfig resolve(const KeyValues& kv, const std::filesystem::path& base_dir) {
    RunConfig c;
    std::set<std::string> used;
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        if (it == kv.end()) return nullptr;
        used.insert(key);
        return &it->second;
    };

    if (auto v = get("motor")) {
        if (*v == "ilm85x26") {
            c.motor = MotorParams::ilm85x26();
        } else if (*v == "custom") {
            c.motor = MotorParams{};
        } else {
            throw InputError("motor: expected ilm85x26 or custom, got '" + *v + "'");
        }
        c.motor_preset = *v;
    }
    const std::pair<const char*, double MotorParams::*> motor_keys[] = {
        {"motor.k_t", &MotorParams::k_t},         {"motor.R", &MotorParams::R},
        {"motor.I_m", &MotorParams::I_m},         {"motor.b_m", &MotorParams::b_m},
        {"motor.r", &MotorParams::r},             {"motor.eta", &MotorParams::eta},
        {"motor.tau_max", &MotorParams::tau_max}, {"motor.dq_max", &MotorParams::dq_max}};
    for (const auto& [key, field] : motor_keys) {
        if (auto v = get(key)) c.motor.*field = to_double(key, *v);
    }
    if (auto v = get("motor.k_m")) check_motor_constant(c.motor, to_double("motor.k_m", *v));

    if (auto v = get("task")) c.task = parse_task(*v);
    if (c.task == TaskKind::running || c.task == TaskKind::walking) {
        // The gait fixtures are specified with a lossy transmission.
        c.motor.eta = kv.count("motor.eta") ? c.motor.eta : 0.8;
    }
    if (auto v = get("task.files")) {
        for (const auto& f : split_list(*v)) {
            std::filesystem::path p(f);
            c.task_files.push_back(p.is_relative() && !base_dir.empty() ? base_dir / p : p);
        }
    }
    if (auto v = get("task.repeat")) {
        for (const auto& r : split_list(*v)) c.task_repeat.push_back(to_int("task.repeat", r));
    }
    if (c.task == TaskKind::file) {
        if (c.task_files.empty()) throw InputError("task = file needs task.files");
        if (c.task_repeat.empty()) c.task_repeat.assign(c.task_files.size(), 1);
        if (c.task_repeat.size() != c.task_files.size()) {
            throw InputError("task.repeat needs one count per file");
        }
        for (int r : c.task_repeat) {
            if (r < 1) throw InputError("task.repeat counts must be >= 1");
        }
    } else if (!c.task_files.empty()) {
        throw InputError("task.files is only used with task = file");
    }
    if (auto v = get("n")) {
        c.n = to_int("n", *v);
        if (*c.n < 4) throw InputError("n must be >= 4");
    }
    if (auto v = get("cubic.alpha")) c.cubic.alpha = to_double("cubic.alpha", *v);
    if (auto v = get("cubic.inertia")) c.cubic.inertia = to_double("cubic.inertia", *v);
    if (auto v = get("cubic.q0")) c.cubic.q0 = to_double("cubic.q0", *v);

    if (auto v = get("load")) {
        LoadModel l;
        l.mode = parse_load_mode(*v);
        c.load = l;
    }
    if (auto v = get("load.I_l")) {
        if (!c.load) throw InputError("load.I_l needs load = inertial");
        c.load->I_l = to_double("load.I_l", *v);
    }
    if (auto v = get("load.b_l")) {
        if (!c.load) throw InputError("load.b_l needs load = inertial");
        c.load->b_l = to_double("load.b_l", *v);
    }

    if (auto v = get("cost")) c.cost = parse_energy_terms(*v);
    if (auto v = get("theta")) c.weights.theta = to_double("theta", *v);
    if (auto v = get("gamma1")) c.weights.gamma1 = to_double("gamma1", *v);
    if (auto v = get("gamma2")) c.weights.gamma2 = to_double("gamma2", *v);
    if (auto v = get("limits.torque")) c.limit_torque = to_bool("limits.torque", *v);
    if (auto v = get("limits.speed")) c.limit_speed = to_bool("limits.speed", *v);
    if (auto v = get("limits.delta_max")) {
        if (*v == "none") {
            c.delta_max.reset();
        } else {
            c.delta_max = to_double("limits.delta_max", *v);
            if (!(*c.delta_max > 0.0)) throw InputError("limits.delta_max must be positive");
        }
    }
    if (auto v = get("monotonicity")) c.monotonicity = parse_monotonicity_mode(*v);
    if (auto v = get("solver.tol")) c.solver.tol_gap = c.solver.tol_feas = to_double("solver.tol", *v);
    if (auto v = get("solver.max_iter")) c.solver.max_iter = to_int("solver.max_iter", *v);

    if (auto v = get("sweep.points")) c.sweep_points = to_int("sweep.points", *v);
    if (auto v = get("sweep.threads")) c.threads = to_int("sweep.threads", *v);
    if (auto v = get("sweep.svg")) c.svg = to_bool("sweep.svg", *v);
    if (auto v = get("baseline.objective")) c.baseline_objective = parse_objective(*v);
    if (auto v = get("validate.tolerance_scale")) c.tolerance_scale = to_double("validate.tolerance_scale", *v);
    if (auto v = get("validate.planted")) c.planted_instances = to_int("validate.planted", *v);

    if (auto v = get("output_dir")) c.output_dir = *v;
    if (auto v = get("timings")) c.timings = to_bool("timings", *v);
    if (auto v = get("seed")) {
        const long long s = to_integer("seed", *v);
        if (s < 0) throw InputError("seed must be >= 0");
        c.seed = static_cast<std::uint64_t>(s);
    }

    for (const auto& [key, value] : kv) {
        if (!used.count(key)) throw InputError("unknown key '" + key + "'");
    }

    c.motor.validate();
    c.resolved_load().validate();
    c.weights.validate();
    c.solver.validate();
    if (c.task == TaskKind::cubic) c.cubic.validate();
    if (c.sweep_points < 2) throw InputError("sweep.points must be >= 2");
    if (c.threads < 0) throw InputError("sweep.threads must be >= 0");
    if (!(c.tolerance_scale >= 0.0)) throw InputError("validate.tolerance_scale must be >= 0");
    if (c.planted_instances < 1) throw InputError("validate.planted must be >= 1");
    return c;
}

LoadModel RunConfig::resolved_load() const {
    if (load) return *load;
    if (task == TaskKind::cubic) return LoadModel::inertial(cubic.inertia);
    return LoadModel::direct();
}

int RunConfig::resolved_n() const {
    if (n) return *n;
    switch (task) {
        case TaskKind::running: return 330;
        case TaskKind::walking: return 570;
        default: return 501;
    }
}

ActuatorLimits RunConfig::limits() const {
    ActuatorLimits l;
    if (limit_torque) l.tau_max = motor.tau_max;
    if (limit_speed) l.dq_max = motor.dq_max;
    l.delta_max = delta_max;
    return l;
}

KeyValues RunConfig::canonical() const {
    KeyValues kv;
    kv["motor"] = motor_preset;
    kv["motor.k_t"] = fmt(motor.k_t);
    kv["motor.R"] = fmt(motor.R);
    kv["motor.I_m"] = fmt(motor.I_m);
    kv["motor.b_m"] = fmt(motor.b_m);
    kv["motor.r"] = fmt(motor.r);
    kv["motor.eta"] = fmt(motor.eta);
    kv["motor.tau_max"] = fmt(motor.tau_max);
    kv["motor.dq_max"] = fmt(motor.dq_max);
    kv["task"] = to_string(task);
    if (task == TaskKind::file) {
        std::string files, reps;
        for (std::size_t i = 0; i < task_files.size(); ++i) {
            files += (i ? "," : "") + task_files[i].filename().string();
            reps += (i ? "," : "") + std::to_string(task_repeat[i]);
        }
        kv["task.files"] = files;
        kv["task.repeat"] = reps;
        if (n) kv["n"] = std::to_string(*n);
    } else {
        kv["n"] = std::to_string(resolved_n());
    }
    if (task == TaskKind::cubic) {
        kv["cubic.alpha"] = fmt(cubic.alpha);
        kv["cubic.inertia"] = fmt(cubic.inertia);
        kv["cubic.q0"] = fmt(cubic.q0);
    }
    const LoadModel l = resolved_load();
    kv["load"] = springopt::to_string(l.mode);
    kv["load.I_l"] = fmt(l.I_l);
    kv["load.b_l"] = fmt(l.b_l);
    kv["cost"] = springopt::to_string(cost);
    kv["theta"] = fmt(weights.theta);
    kv["gamma1"] = fmt(weights.gamma1);
    kv["gamma2"] = fmt(weights.gamma2);
    kv["limits.torque"] = limit_torque ? "true" : "false";
    kv["limits.speed"] = limit_speed ? "true" : "false";
    kv["limits.delta_max"] = delta_max ? fmt(*delta_max) : "none";
    kv["monotonicity"] = springopt::to_string(monotonicity);
    kv["solver.tol"] = fmt(solver.tol_gap);
    kv["solver.max_iter"] = std::to_string(solver.max_iter);
    kv["sweep.points"] = std::to_string(sweep_points);
    kv["sweep.svg"] = svg ? "true" : "false";
    kv["baseline.objective"] = to_string(baseline_objective);
    kv["validate.tolerance_scale"] = fmt(tolerance_scale);
    kv["validate.planted"] = std::to_string(planted_instances);
    kv["seed"] = std::to_string(seed);
    return kv;
}

std::string RunConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [k, v] : canonical()) h = fnv1a(k + "=" + v + "\n", h);
    for (const auto& f : task_files) h = fnv1a(read_bytes(f), h);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Task build_task(const RunConfig& cfg) {
    Trajectory traj;
    switch (cfg.task) {
        case TaskKind::cubic:
            traj = generate_cubic_oscillation(cfg.cubic, cfg.resolved_n()).trajectory;
            break;
        case TaskKind::running:
            traj = generate_gait(GaitShape::running(), cfg.resolved_n());
            traj.label = "running";
            break;
        case TaskKind::walking:
            traj = generate_gait(GaitShape::walking(), cfg.resolved_n());
            traj.label = "walking";
            break;
        case TaskKind::file: {
            std::vector<TaskPart> parts;
            for (std::size_t i = 0; i < cfg.task_files.size(); ++i) {
                parts.push_back({load_trajectory(cfg.task_files[i]), cfg.task_repeat[i]});
            }
            std::optional<double> common_dt;
            for (const auto& p : parts) {
                if (std::abs(p.trajectory.dt - parts.front().trajectory.dt) > 1e-12 * parts.front().trajectory.dt) {
                    common_dt = parts.front().trajectory.dt;
                }
            }
            traj = concatenate_tasks(parts, common_dt).trajectory;
            if (cfg.n && *cfg.n != traj.size()) traj = resample_periodic(traj, *cfg.n);
            break;
        }
    }
    return make_task(std::move(traj), cfg.resolved_load(), cfg.motor);
}

}  // namespace springopt::cli
