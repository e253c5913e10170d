#pragma once

#include <filesystem>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "springopt/operators.hpp"

namespace springopt {

/// One period of a load trajectory sampled on a uniform grid.
///
/// Sample i sits at t = i * dt for i = 0..n-1; sample n wraps to sample 0,
/// so the period is n * dt.
struct Trajectory {
    double dt = 0.0;
    Vector q_l;      ///< load position [rad]
    Vector dq_l;     ///< load velocity [rad/s]
    Vector ddq_l;    ///< load acceleration [rad/s^2]
    Vector tau_ext;  ///< external torque [N m]
    std::string label;

    [[nodiscard]] int size() const { return static_cast<int>(q_l.size()); }
    [[nodiscard]] double period() const { return dt * size(); }

    /// Throws InputError unless all series have n >= 4 finite entries and dt > 0.
    void validate() const;
};

/// Relative RMS mismatch between dq_l and the periodic central difference of q_l.
double velocity_consistency(const Trajectory& traj);

/// Replaces dq_l and ddq_l by the periodic difference operators applied to q_l.
Trajectory synthesize_derivatives(Trajectory traj);

struct ColumnMapping {
    std::string time = "time";
    std::string q_l = "q_l";
    std::string dq_l = "dq_l";
    std::string ddq_l = "ddq_l";
    std::string tau_ext = "tau_ext";
    /// Relative tolerance on time-step uniformity.
    double uniform_tolerance = 1e-6;
    /// When set, non-uniform files are interpolated onto this many uniform samples.
    std::optional<int> resample_to;
};

Trajectory load_trajectory(const std::filesystem::path& path, const ColumnMapping& mapping = {});
Trajectory parse_trajectory_csv(std::istream& in, const ColumnMapping& mapping = {},
                                const std::string& label = {});

/// Writes `time,q_l,dq_l,ddq_l,tau_ext` with full round-trip precision.
/// Lines in `comments` are emitted first, each prefixed with "# ".
void write_trajectory(std::ostream& out, const Trajectory& traj,
                      std::span<const std::string> comments = {});
void save_trajectory(const std::filesystem::path& path, const Trajectory& traj,
                     std::span<const std::string> comments = {});

/// Single mass on a hardening cubic spring: I_l q'' = -alpha q^3.
struct CubicSpringSystem {
    double alpha = 40.0;    ///< N m / rad^3
    double inertia = 0.125; ///< kg m^2
    double q0 = std::numbers::pi / 2.0;  ///< release position, released from rest

    void validate() const;
    [[nodiscard]] double energy() const { return alpha * q0 * q0 * q0 * q0 / 4.0; }
};

struct CubicOscillationOptions {
    /// Internal RK4 steps per output sample (>= 1; 8 by default).
    int oversample = 8;
    /// Abort period detection after this many coarse steps.
    long step_budget = 2'000'000;
    /// Maximum relative drift of the mechanical energy over one period.
    double max_energy_drift = 1e-6;
};

struct CubicOscillation {
    Trajectory trajectory;
    double period = 0.0;            ///< detected fundamental period [s]
    double energy = 0.0;            ///< alpha q0^4 / 4 [J]
    double max_energy_drift = 0.0;  ///< max |E(t) - E0| / E0 over the period
    long internal_steps = 0;
};

/// Integrates the free cubic oscillation, detects its period and samples one
/// period onto n points. tau_ext is zero (free vibration, tau_ela = -I_l q''),
/// dq_l and ddq_l are synthesized with the periodic difference operators.
CubicOscillation generate_cubic_oscillation(const CubicSpringSystem& sys, int n,
                                            const CubicOscillationOptions& options = {});

/// Gait-like periodic task built from sinusoids: the joint angle is a sum of
/// harmonics of the stride frequency; the joint torque is a sin^2 bump of
/// height `stance_peak` over the stance phase and a negative sin^2 bump of
/// height `swing_peak` over the rest of the stride.
struct GaitShape {
    double period = 0.66;  ///< stride period [s]
    std::vector<std::pair<double, double>> harmonics;  ///< (amplitude [rad], phase [rad]) of k = 1, 2, ...
    double stance_fraction = 0.4;
    double stance_peak = 150.0;  ///< N m
    double swing_peak = 4.0;     ///< N m

    void validate() const;

    /// Running-like stride, 0.66 s. With the ILM 85x26 preset, eta = 0.8 and a
    /// 0.4 rad elongation limit the rigid and every linear actuator violate
    /// the motor limits while a nonlinear spring does not.
    static GaitShape running();
    /// Walking-like stride, 1.14 s, within the motor limits when rigid.
    static GaitShape walking();
};

/// Samples one stride onto n points; dq_l and ddq_l are synthesized with the
/// periodic difference operators.
Trajectory generate_gait(const GaitShape& shape, int n);

/// Trigonometric (band-limited) resampling of one period onto n_new points.
/// Derivatives are re-synthesized on the new grid.
Trajectory resample_periodic(const Trajectory& traj, int n_new);

struct TaskPart {
    Trajectory trajectory;
    int repeat = 1;
};

struct Concatenation {
    Trajectory trajectory;
    /// Largest |q_l| jump across a junction, in excess of the jump predicted by
    /// the velocity on either side. Reported, never smoothed.
    double max_junction_gap = 0.0;
};

/// Joins task periods end to end. Parts must share dt unless `common_dt` is
/// given, in which case each part is resampled to the nearest whole number of
/// samples at that step (and the step is adjusted to divide the period).
Concatenation concatenate_tasks(std::span<const TaskPart> parts,
                                std::optional<double> common_dt = std::nullopt);

}  // namespace springopt
