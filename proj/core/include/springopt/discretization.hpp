#pragma once

#include <string>

#include "springopt/operators.hpp"
#include "springopt/trajectory.hpp"

namespace springopt {

/// Electromechanical constants of the motor and transmission.
///
/// k_m (motor constant) is derived as k_t / sqrt(R). Limits are optional in
/// problems; here they only need to be positive.
struct MotorParams {
    double k_t = 0.0;      ///< torque constant [N m / A]
    double R = 0.0;        ///< terminal resistance [Ohm]
    double I_m = 0.0;      ///< rotor + assembly inertia [kg m^2]
    double b_m = 0.0;      ///< viscous friction [N m s / rad]
    double r = 1.0;        ///< transmission ratio
    double eta = 1.0;      ///< transmission efficiency, 0 < eta <= 1
    double tau_max = 0.0;  ///< motor torque limit [N m]
    double dq_max = 0.0;   ///< motor speed limit [rad/s]

    [[nodiscard]] double k_m() const;

    /// Checks positivity and ranges. I_m and b_m may be zero (ideal motor);
    /// the limits must be positive.
    void validate() const;

    /// Table I of the ILM 85x26 frameless motor with a 22:1 transmission.
    static MotorParams ilm85x26();
};

/// Checks a user-supplied k_m against k_t / sqrt(R) (relative 1e-9).
void check_motor_constant(const MotorParams& p, double k_m_supplied);

enum class LoadMode { inertial_viscous, direct_torque };

/// tau_ela = -I_l q'' - b_l q' + tau_ext, or tau_ext verbatim in direct-torque mode.
struct LoadModel {
    LoadMode mode = LoadMode::direct_torque;
    double I_l = 0.0;
    double b_l = 0.0;

    void validate() const;
    static LoadModel inertial(double I_l, double b_l = 0.0) {
        return {LoadMode::inertial_viscous, I_l, b_l};
    }
    static LoadModel direct() { return {LoadMode::direct_torque, 0.0, 0.0}; }
};

std::string to_string(LoadMode mode);
LoadMode parse_load_mode(const std::string& s);

Vector elastic_torque(const Trajectory& traj, const LoadModel& load);

/// tau_m = (I_m D2 + b_m D) q_m - tau_ela / (eta r). No clipping.
Vector motor_torque(const Vector& q_m, const Vector& tau_ela, const MotorParams& p,
                    const DiffOperators& ops);

/// delta = q_l - q_m / r.
Vector elongation(const Vector& q_m, const Vector& q_l, double r);

/// p_m,i = tau_m,i * (D q_m)_i.
Vector power_series(const Vector& q_m, const Vector& tau_ela, const MotorParams& p,
                    const DiffOperators& ops);

/// Motor trajectory of the rigid actuator, q_m = r q_l.
inline Vector rigid_motor_position(const Trajectory& traj, double r) { return r * traj.q_l; }

}  // namespace springopt
