#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <springopt/analysis.hpp>
#include <springopt/trajectory.hpp>

namespace springopt::cli {

// Raw key = value pairs. Later assignments override earlier ones.
using KeyValues = std::map<std::string, std::string>;

/// Grammar, one statement per line:
///
///   line    := blank | comment | key ws* '=' ws* value ws* comment?
///   comment := '#' any*
///   key     := [A-Za-z0-9_.]+   (case-sensitive)
///
/// Values run to the end of the line or to a '#' preceded by whitespace.
/// A key may appear once per file. Throws InputError with the line number.
KeyValues parse_config(std::istream& in, const std::string& origin = "<config>");
KeyValues load_config(const std::filesystem::path& path);

/// `key=value` from the command line, validated with the same key grammar.
std::pair<std::string, std::string> parse_assignment(const std::string& text);

enum class TaskKind { cubic, running, walking, file };

struct RunConfig {
    MotorParams motor = MotorParams::ilm85x26();
    std::string motor_preset = "ilm85x26";

    TaskKind task = TaskKind::cubic;
    std::vector<std::filesystem::path> task_files;
    std::vector<int> task_repeat;
    std::optional<int> n;  ///< unset: 501 for generated tasks, file grid otherwise
    CubicSpringSystem cubic;

    std::optional<LoadModel> load;  ///< unset: inertial for cubic, direct otherwise

    EnergyTerms cost = EnergyTerms::total;
    Weights weights;
    bool limit_torque = false;
    bool limit_speed = false;
    std::optional<double> delta_max;
    MonotonicityMode monotonicity = MonotonicityMode::global;
    SolverConfig solver;

    int sweep_points = 30;
    int threads = 0;
    bool svg = false;
    LinearObjective baseline_objective = LinearObjective::energy;

    double tolerance_scale = 1.0;
    int planted_instances = 120;

    std::filesystem::path output_dir = "out";
    bool timings = true;
    std::uint64_t seed = 1;

    /// Every setting that influences results, as normalized key/value text.
    /// output_dir, threads and timings are left out: they never change a number.
    [[nodiscard]] KeyValues canonical() const;
    /// FNV-1a (64 bit) of the canonical form and of the bytes of every task file.
    [[nodiscard]] std::string hash() const;

    [[nodiscard]] LoadModel resolved_load() const;
    [[nodiscard]] int resolved_n() const;
    [[nodiscard]] ActuatorLimits limits() const;
};

/// Applies the keys to the defaults. Relative task file paths resolve against
/// `base_dir`. Unknown keys and malformed values throw InputError.
RunConfig resolve(const KeyValues& kv, const std::filesystem::path& base_dir = {});

std::string to_string(TaskKind kind);

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

/// Builds the task described by the config.
Task build_task(const RunConfig& cfg);

}  // namespace springopt::cli
