#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "springopt/analysis.hpp"

namespace springopt {

struct ReportOptions {
    /// Wall-clock timings are the only run-dependent values. They live in a
    /// top-level "timing" object so comparisons can drop it; false omits it.
    bool include_timings = true;
    /// Extra top-level string fields (config hash, input paths, ...).
    std::map<std::string, std::string> metadata;
};

/// `theta,energy_J,peak_W,peak_cvx_W,rel_energy_pct,rel_peak_pct,status`,
/// one row per point in theta order. energy_J is the dissipated energy.
void write_curve_csv(std::ostream& out, const Sweep& sweep);

nlohmann::json metrics_json(const Metrics& m);
nlohmann::json sweep_report(const Sweep& sweep, const ReportOptions& options = {},
                            const std::optional<LinearBaseline>& linear = std::nullopt);
nlohmann::json design_report(const DesignResult& design, const Metrics& rigid, const ReportOptions& options = {});
nlohmann::json linear_report(const LinearBaseline& linear, const Metrics& rigid, const ReportOptions& options = {});

/// Dissipated energy against true peak power, both relative to rigid, as a
/// self-contained SVG scatter. The knee and the linear baseline are marked.
void write_sweep_svg(std::ostream& out, const Sweep& sweep,
                     const std::optional<LinearCandidate>& linear = std::nullopt);

/// Fixed-format dump used for every numeric report value (round-trip precision).
std::string format_double(double v);

}  // namespace springopt
