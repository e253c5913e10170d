#include "springopt/discretization.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "springopt/error.hpp"

namespace springopt {

namespace {

void require_same_size(const Vector& a, const Vector& b, const char* what) {
    if (a.size() != b.size()) {
        throw InputError(std::string("dimension mismatch in ") + what + ": " +
                         std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
}

}  // namespace

DiffOperators build_operators(int n, double dt) {
    if (n < 4) throw InputError("difference operators need n >= 4, got " + std::to_string(n));
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("difference operators need dt > 0");

    DiffOperators ops;
    ops.n = n;
    ops.dt = dt;
    const double half = 1.0 / (2.0 * dt);
    const double inv2 = 1.0 / (dt * dt);

    std::vector<Triplet> d, d2;
    d.reserve(2 * n);
    d2.reserve(3 * n);
    for (int i = 0; i < n; ++i) {
        const int next = (i + 1) % n;
        const int prev = (i + n - 1) % n;
        d.emplace_back(i, next, half);
        d.emplace_back(i, prev, -half);
        d2.emplace_back(i, prev, inv2);
        d2.emplace_back(i, i, -2.0 * inv2);
        d2.emplace_back(i, next, inv2);
    }
    ops.D.resize(n, n);
    ops.D.setFromTriplets(d.begin(), d.end());
    ops.D2.resize(n, n);
    ops.D2.setFromTriplets(d2.begin(), d2.end());
    return ops;
}

Vector periodic_first_difference(const Vector& x, double dt) {
    const Eigen::Index n = x.size();
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out[i] = (x[(i + 1) % n] - x[(i + n - 1) % n]) / (2.0 * dt);
    }
    return out;
}

Vector periodic_second_difference(const Vector& x, double dt) {
    const Eigen::Index n = x.size();
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out[i] = (x[(i + 1) % n] - 2.0 * x[i] + x[(i + n - 1) % n]) / (dt * dt);
    }
    return out;
}

double MotorParams::k_m() const { return k_t / std::sqrt(R); }

void MotorParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw InputError(std::string("motor parameter ") + name + " must be positive");
        }
    };
    positive(k_t, "k_t");
    positive(R, "R");
    positive(r, "r");
    positive(tau_max, "tau_max");
    positive(dq_max, "dq_max");
    if (!(I_m >= 0.0) || !(b_m >= 0.0)) throw InputError("motor I_m and b_m must be >= 0");
    if (!(eta > 0.0 && eta <= 1.0)) throw InputError("motor efficiency must satisfy 0 < eta <= 1");
}

MotorParams MotorParams::ilm85x26() {
    MotorParams p;
    p.k_t = 0.24;
    p.R = 0.323;
    p.I_m = 1.246e-4;
    p.b_m = 60e-6;
    p.r = 22.0;
    p.eta = 1.0;
    p.tau_max = 8.3;
    p.dq_max = 1500.0 * 2.0 * std::numbers::pi / 60.0;
    return p;
}

void check_motor_constant(const MotorParams& p, double k_m_supplied) {
    const double derived = p.k_m();
    if (std::abs(k_m_supplied - derived) > 1e-9 * std::abs(derived)) {
        throw InputError("k_m = " + std::to_string(k_m_supplied) +
                         " is inconsistent with k_t / sqrt(R) = " + std::to_string(derived));
    }
}

void LoadModel::validate() const {
    if (!(I_l >= 0.0) || !(b_l >= 0.0)) throw InputError("load I_l and b_l must be >= 0");
}

std::string to_string(LoadMode mode) {
    return mode == LoadMode::inertial_viscous ? "inertial-viscous" : "direct-torque";
}

LoadMode parse_load_mode(const std::string& s) {
    if (s == "inertial-viscous" || s == "inertial") return LoadMode::inertial_viscous;
    if (s == "direct-torque" || s == "direct") return LoadMode::direct_torque;
    throw InputError("unknown load mode '" + s + "'");
}

Vector elastic_torque(const Trajectory& traj, const LoadModel& load) {
    if (load.mode == LoadMode::direct_torque) return traj.tau_ext;
    return -load.I_l * traj.ddq_l - load.b_l * traj.dq_l + traj.tau_ext;
}

Vector motor_torque(const Vector& q_m, const Vector& tau_ela, const MotorParams& p,
                    const DiffOperators& ops) {
    require_same_size(q_m, tau_ela, "motor_torque");
    if (q_m.size() != ops.n) throw InputError("motor_torque: operators built for another grid");
    return p.I_m * (ops.D2 * q_m) + p.b_m * (ops.D * q_m) - tau_ela / (p.eta * p.r);
}

Vector elongation(const Vector& q_m, const Vector& q_l, double r) {
    require_same_size(q_m, q_l, "elongation");
    return q_l - q_m / r;
}

Vector power_series(const Vector& q_m, const Vector& tau_ela, const MotorParams& p,
                    const DiffOperators& ops) {
    const Vector tau_m = motor_torque(q_m, tau_ela, p, ops);
    return tau_m.cwiseProduct(ops.D * q_m);
}

}  // namespace springopt
