#include "springopt/trajectory.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "springopt/error.hpp"
#include "springopt/oracle.hpp"

namespace springopt {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_number(const std::string& cell, int line_no) {
    if (cell == "nan" || cell == "NaN" || cell == "NAN") return std::numeric_limits<double>::quiet_NaN();
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw InputError("line " + std::to_string(line_no) + ": cannot parse number '" + cell + "'");
    }
    return v;
}

/// Periodic linear interpolation of samples (t_i, x_i) with period `period`.
Vector periodic_linear(const std::vector<double>& t, const Vector& x, double period, int m) {
    Vector out(m);
    const auto n = static_cast<int>(t.size());
    const double step = period / m;
    int j = 0;
    for (int k = 0; k < m; ++k) {
        const double tk = t[0] + k * step;
        while (j + 1 < n && t[j + 1] <= tk) ++j;
        const double t0 = t[j];
        const double t1 = (j + 1 < n) ? t[j + 1] : t[0] + period;
        const double x1 = (j + 1 < n) ? x[j + 1] : x[0];
        const double w = (tk - t0) / (t1 - t0);
        out[k] = (1.0 - w) * x[j] + w * x1;
    }
    return out;
}

/// Band-limited periodic interpolation of n samples onto m points.
Vector trig_resample(const Vector& x, int m) {
    const auto n = static_cast<long>(x.size());
    if (m == n) return x;
    const double two_pi = 2.0 * std::numbers::pi;
    // Highest harmonic representable on both grids.
    long kmax = (std::min<long>(n, m) - 1) / 2;
    const bool nyquist = (n % 2 == 0) && (m >= n);

    std::vector<double> a(kmax + 1, 0.0), b(kmax + 1, 0.0);
    a[0] = x.mean();
    for (long k = 1; k <= kmax; ++k) {
        double sa = 0.0, sb = 0.0;
        for (long j = 0; j < n; ++j) {
            const double ang = two_pi * static_cast<double>((k * j) % n) / static_cast<double>(n);
            sa += x[j] * std::cos(ang);
            sb += x[j] * std::sin(ang);
        }
        a[k] = 2.0 * sa / n;
        b[k] = 2.0 * sb / n;
    }
    double a_nyq = 0.0;
    if (nyquist) {
        for (long j = 0; j < n; ++j) a_nyq += (j % 2 == 0 ? x[j] : -x[j]);
        a_nyq /= n;
    }

    Vector out(m);
    for (long j = 0; j < m; ++j) {
        double v = a[0];
        for (long k = 1; k <= kmax; ++k) {
            const double ang = two_pi * static_cast<double>((k * j) % m) / static_cast<double>(m);
            v += a[k] * std::cos(ang) + b[k] * std::sin(ang);
        }
        if (nyquist) {
            const double ang = two_pi * static_cast<double>(((n / 2) * j) % m) / static_cast<double>(m);
            v += a_nyq * std::cos(ang);
        }
        out[j] = v;
    }
    return out;
}

}  // namespace

void Trajectory::validate() const {
    const auto n = q_l.size();
    if (n < 4) throw InputError("trajectory needs at least 4 samples, got " + std::to_string(n));
    if (dq_l.size() != n || ddq_l.size() != n || tau_ext.size() != n) {
        throw InputError("trajectory series have different lengths");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("trajectory dt must be positive");
    if (!all_finite(q_l) || !all_finite(dq_l) || !all_finite(ddq_l) || !all_finite(tau_ext)) {
        throw InputError("NaN entries in trajectory");
    }
}

double velocity_consistency(const Trajectory& traj) {
    const Vector d = periodic_first_difference(traj.q_l, traj.dt);
    const double ref = std::sqrt(traj.dq_l.squaredNorm() / traj.dq_l.size());
    const double err = std::sqrt((d - traj.dq_l).squaredNorm() / traj.dq_l.size());
    return ref > 0.0 ? err / ref : err;
}

Trajectory synthesize_derivatives(Trajectory traj) {
    traj.dq_l = periodic_first_difference(traj.q_l, traj.dt);
    traj.ddq_l = periodic_second_difference(traj.q_l, traj.dt);
    return traj;
}

Trajectory parse_trajectory_csv(std::istream& in, const ColumnMapping& mapping,
                                const std::string& label) {
    std::string line;
    int line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        header = split_csv(t);
        break;
    }
    if (header.empty()) throw InputError("trajectory file is empty");

    std::map<std::string, int> col;
    for (int i = 0; i < static_cast<int>(header.size()); ++i) col[header[i]] = i;
    auto find = [&](const std::string& name, bool required) -> int {
        auto it = col.find(name);
        if (it == col.end()) {
            if (required) throw InputError("missing column '" + name + "'");
            return -1;
        }
        return it->second;
    };
    const int c_t = find(mapping.time, true);
    const int c_q = find(mapping.q_l, true);
    const int c_tau = find(mapping.tau_ext, true);
    const int c_dq = find(mapping.dq_l, false);
    const int c_ddq = find(mapping.ddq_l, false);

    std::vector<double> t, q, dq, ddq, tau;
    bool saw_nan = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto cells = split_csv(s);
        if (cells.size() != header.size()) {
            throw InputError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " columns");
        }
        auto get = [&](int c) {
            const double v = parse_number(cells[c], line_no);
            if (std::isnan(v)) saw_nan = true;
            return v;
        };
        t.push_back(get(c_t));
        q.push_back(get(c_q));
        tau.push_back(get(c_tau));
        if (c_dq >= 0) dq.push_back(get(c_dq));
        if (c_ddq >= 0) ddq.push_back(get(c_ddq));
    }
    if (saw_nan) throw InputError("NaN entries in trajectory file");
    const auto n = static_cast<int>(t.size());
    if (n < 4) throw InputError("trajectory needs at least 4 samples, got " + std::to_string(n));
    for (int i = 1; i < n; ++i) {
        if (!(t[i] > t[i - 1])) throw InputError("non-monotone time column at row " + std::to_string(i + 1));
    }

    const double dt = (t.back() - t.front()) / (n - 1);
    bool uniform = true;
    for (int i = 1; i < n; ++i) {
        if (std::abs((t[i] - t[i - 1]) - dt) > mapping.uniform_tolerance * dt) {
            uniform = false;
            break;
        }
    }

    auto to_vec = [](const std::vector<double>& v) {
        return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    };

    Trajectory traj;
    traj.label = label;
    if (uniform) {
        traj.dt = dt;
        traj.q_l = to_vec(q);
        traj.tau_ext = to_vec(tau);
        traj.dq_l = c_dq >= 0 ? to_vec(dq) : periodic_first_difference(traj.q_l, dt);
        traj.ddq_l = c_ddq >= 0 ? to_vec(ddq) : periodic_second_difference(traj.q_l, dt);
    } else {
        if (!mapping.resample_to) {
            throw InputError("non-uniform time stamps (enable resampling to accept them)");
        }
        const int m = *mapping.resample_to;
        if (m < 4) throw InputError("resampling target must be >= 4 samples");
        const double period = (t.back() - t.front()) * n / (n - 1);
        traj.dt = period / m;
        traj.q_l = periodic_linear(t, to_vec(q), period, m);
        traj.tau_ext = periodic_linear(t, to_vec(tau), period, m);
        traj = synthesize_derivatives(std::move(traj));
    }
    traj.validate();
    return traj;
}

Trajectory load_trajectory(const std::filesystem::path& path, const ColumnMapping& mapping) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open trajectory file " + path.string());
    return parse_trajectory_csv(in, mapping, path.stem().string());
}

void write_trajectory(std::ostream& out, const Trajectory& traj, std::span<const std::string> comments) {
    for (const auto& c : comments) out << "# " << c << '\n';
    out << "time,q_l,dq_l,ddq_l,tau_ext\n";
    out << std::setprecision(17);
    for (int i = 0; i < traj.size(); ++i) {
        out << i * traj.dt << ',' << traj.q_l[i] << ',' << traj.dq_l[i] << ',' << traj.ddq_l[i] << ','
            << traj.tau_ext[i] << '\n';
    }
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj,
                     std::span<const std::string> comments) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write trajectory file " + path.string());
    write_trajectory(out, traj, comments);
    if (!out) throw InputError("write failed for " + path.string());
}

void CubicSpringSystem::validate() const {
    if (!(alpha > 0.0)) throw InputError("cubic stiffness alpha must be positive");
    if (!(inertia > 0.0)) throw InputError("load inertia must be positive");
    if (!std::isfinite(q0)) throw InputError("release position must be finite");
    if (q0 == 0.0) throw InputError("degenerate equilibrium: q0 = 0 gives no oscillation");
}

CubicOscillation generate_cubic_oscillation(const CubicSpringSystem& sys, int n,
                                            const CubicOscillationOptions& options) {
    sys.validate();
    if (n < 4) throw InputError("cubic oscillation needs n >= 4");
    if (options.oversample < 1) throw InputError("oversample must be >= 1");

    const double k = sys.alpha / sys.inertia;
    const oracle::OdeField field = [k](double, const Vector& x) {
        Vector dx(2);
        dx << x[1], -k * x[0] * x[0] * x[0];
        return dx;
    };
    Vector x0(2);
    x0 << sys.q0, 0.0;
    const double sign0 = sys.q0 > 0.0 ? 1.0 : -1.0;
    long steps_taken = 0;

    // Period = first return of the velocity to zero on the release side: the
    // velocity changes sign towards -sign(q0) while q has the sign of q0.
    auto detect_period = [&](double h) {
        Vector x = x0;
        double t = 0.0;
        for (long step = 0; step < options.step_budget; ++step) {
            const Vector next = oracle::rk4_step(field, t, x, h);
            ++steps_taken;
            const bool crossing = (sign0 * x[1] > 0.0) && (sign0 * next[1] <= 0.0) && (sign0 * next[0] > 0.0);
            if (step > 2 && crossing) {
                // Refine the sub-step so that the velocity after it vanishes.
                double lo = 0.0, hi = h;
                double tau = h * x[1] / (x[1] - next[1]);
                for (int it = 0; it < 60; ++it) {
                    const double v = oracle::rk4_step(field, t, x, tau)[1];
                    if (sign0 * v > 0.0) lo = tau; else hi = tau;
                    const double acc = field(t, x)[1];
                    double cand = (acc != 0.0) ? tau - v / acc : 0.5 * (lo + hi);
                    if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
                    if (std::abs(cand - tau) <= 1e-15 * h) {
                        tau = cand;
                        break;
                    }
                    tau = cand;
                }
                return t + tau;
            }
            x = next;
            t += h;
        }
        throw NumericalError("period detection failed within the step budget");
    };

    const double t_char = std::sqrt(sys.inertia / (sys.alpha * sys.q0 * sys.q0));
    const double coarse = detect_period(t_char / 64.0);
    const long fine_steps = static_cast<long>(options.oversample) * n;
    const double period = detect_period(coarse / static_cast<double>(fine_steps));

    const double h = period / static_cast<double>(fine_steps);
    const double e0 = sys.energy();
    CubicOscillation out;
    out.period = period;
    out.energy = e0;
    out.trajectory.dt = period / n;
    out.trajectory.q_l.resize(n);
    out.trajectory.tau_ext = Vector::Zero(n);
    out.trajectory.label = "cubic-oscillation";

    Vector x = x0;
    double drift = 0.0;
    for (long step = 0; step < fine_steps; ++step) {
        if (step % options.oversample == 0) out.trajectory.q_l[step / options.oversample] = x[0];
        x = oracle::rk4_step(field, step * h, x, h);
        ++steps_taken;
        const double e = 0.5 * sys.inertia * x[1] * x[1] + 0.25 * sys.alpha * std::pow(x[0], 4);
        drift = std::max(drift, std::abs(e - e0) / e0);
    }
    out.max_energy_drift = drift;
    out.internal_steps = steps_taken;
    if (drift > options.max_energy_drift) {
        throw NumericalError("energy drift " + std::to_string(drift) + " exceeds tolerance");
    }
    out.trajectory = synthesize_derivatives(std::move(out.trajectory));
    return out;
}

void GaitShape::validate() const {
    if (!(period > 0.0) || !std::isfinite(period)) throw InputError("gait period must be positive");
    if (!(stance_fraction > 0.0 && stance_fraction < 1.0)) throw InputError("stance fraction must lie in (0, 1)");
    if (!std::isfinite(stance_peak) || !std::isfinite(swing_peak)) throw InputError("gait torque peaks must be finite");
    for (const auto& [a, p] : harmonics) {
        if (!std::isfinite(a) || !std::isfinite(p)) throw InputError("gait harmonics must be finite");
    }
}

GaitShape GaitShape::running() {
    GaitShape g;
    g.period = 0.66;
    g.harmonics = {{0.232, 0.0}, {0.190, 0.189}, {0.076, 6.249}};
    g.stance_fraction = 0.226 / 0.66;
    g.stance_peak = 148.9;
    g.swing_peak = 4.0;
    return g;
}

GaitShape GaitShape::walking() {
    GaitShape g;
    g.period = 1.14;
    g.harmonics = {{0.16, 0.0}, {0.07, 1.2}, {0.02, 2.5}};
    g.stance_fraction = 0.6;
    g.stance_peak = 110.0;
    g.swing_peak = 2.0;
    return g;
}

Trajectory generate_gait(const GaitShape& shape, int n) {
    shape.validate();
    if (n < 4) throw InputError("gait fixture needs n >= 4");
    constexpr double pi = std::numbers::pi;
    const double T = shape.period, Ts = shape.stance_fraction * T, w = 2.0 * pi / T;
    Trajectory traj;
    traj.dt = T / n;
    traj.q_l = Vector::Zero(n);
    traj.tau_ext = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
        const double t = i * traj.dt;
        for (std::size_t k = 0; k < shape.harmonics.size(); ++k) {
            const auto& [a, p] = shape.harmonics[k];
            traj.q_l[i] += a * std::sin(static_cast<double>(k + 1) * w * t + p);
        }
        if (t < Ts) {
            traj.tau_ext[i] = shape.stance_peak * std::pow(std::sin(pi * t / Ts), 2);
        } else {
            traj.tau_ext[i] = -shape.swing_peak * std::pow(std::sin(pi * (t - Ts) / (T - Ts)), 2);
        }
    }
    traj.label = "gait";
    return synthesize_derivatives(std::move(traj));
}

Trajectory resample_periodic(const Trajectory& traj, int n_new) {
    if (n_new < 4) throw InputError("resampling target must be >= 4 samples, got " + std::to_string(n_new));
    traj.validate();
    Trajectory out;
    out.label = traj.label;
    out.dt = traj.period() / n_new;
    if (n_new == traj.size()) {
        out.dt = traj.dt;
        out.q_l = traj.q_l;
        out.tau_ext = traj.tau_ext;
    } else {
        out.q_l = trig_resample(traj.q_l, n_new);
        out.tau_ext = trig_resample(traj.tau_ext, n_new);
    }
    return synthesize_derivatives(std::move(out));
}

Concatenation concatenate_tasks(std::span<const TaskPart> parts, std::optional<double> common_dt) {
    if (parts.empty()) throw InputError("concatenate_tasks needs at least one part");
    std::vector<Trajectory> segs;
    std::vector<int> reps;
    for (const auto& part : parts) {
        part.trajectory.validate();
        if (part.repeat < 1) throw InputError("repeat counts must be >= 1");
        segs.push_back(part.trajectory);
        reps.push_back(part.repeat);
    }
    if (segs.size() == 1 && reps[0] == 1 && !common_dt) return {segs[0], 0.0};

    double dt = segs[0].dt;
    if (common_dt) {
        if (!(*common_dt > 0.0)) throw InputError("common dt must be positive");
        dt = *common_dt;
        for (auto& s : segs) {
            const int m = std::max(4, static_cast<int>(std::lround(s.period() / dt)));
            if (m != s.size()) s = resample_periodic(s, m);
            s.dt = dt;  // time-scaled by less than dt / 2 per period
            s = synthesize_derivatives(std::move(s));
        }
    } else {
        for (const auto& s : segs) {
            if (std::abs(s.dt - dt) > 1e-9 * dt) {
                throw InputError("incompatible sample intervals (" + std::to_string(s.dt) + " vs " +
                                 std::to_string(dt) + "); specify a common dt to resample");
            }
        }
    }

    long total = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) total += static_cast<long>(segs[i].size()) * reps[i];
    Concatenation out;
    Trajectory& t = out.trajectory;
    t.dt = dt;
    t.q_l.resize(total);
    t.dq_l.resize(total);
    t.ddq_l.resize(total);
    t.tau_ext.resize(total);
    std::ostringstream label;
    long pos = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& s = segs[i];
        for (int r = 0; r < reps[i]; ++r) {
            t.q_l.segment(pos, s.size()) = s.q_l;
            t.dq_l.segment(pos, s.size()) = s.dq_l;
            t.ddq_l.segment(pos, s.size()) = s.ddq_l;
            t.tau_ext.segment(pos, s.size()) = s.tau_ext;
            pos += s.size();
        }
        label << (i ? " + " : "") << (s.label.empty() ? "task" : s.label) << " x" << reps[i];
    }
    t.label = label.str();

    // Junctions (including the wrap from the last segment back to the first).
    double gap = 0.0;
    long start = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        for (int r = 0; r < reps[i]; ++r) {
            const long end = start + segs[i].size();
            const long next = end % total;
            const long last = end - 1;
            const double predicted = 0.5 * dt * (t.dq_l[last] + t.dq_l[next]);
            gap = std::max(gap, std::abs(t.q_l[next] - t.q_l[last] - predicted));
            start = end;
        }
    }
    out.max_junction_gap = gap;
    return out;
}

}  // namespace springopt
