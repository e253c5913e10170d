#include "springopt/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace springopt {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

// NaN/inf are not representable in JSON; emit null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void add_metadata(json& j, const ReportOptions& o) {
    for (const auto& [k, v] : o.metadata) j[k] = v;
}

json candidate_json(const LinearCandidate& c, const Metrics& rigid) {
    return {{"k", num(c.k)},
            {"feasible", c.feasible},
            {"score", num(c.score)},
            {"metrics", metrics_json(c.metrics)},
            {"rel_energy_pct", num(relative_percent(c.metrics.energy.dissipated(), rigid.energy.dissipated()))},
            {"rel_peak_pct", num(relative_percent(c.metrics.peak_power, rigid.peak_power))}};
}

}  // namespace

void write_curve_csv(std::ostream& out, const Sweep& sweep) {
    out << "theta,energy_J,peak_W,peak_cvx_W,rel_energy_pct,rel_peak_pct,status\n";
    for (const auto& p : sweep.points) {
        out << format_double(p.theta) << ',' << format_double(p.energy_dissipated) << ','
            << format_double(p.peak_power) << ',' << format_double(p.peak_power_cvx) << ','
            << format_double(p.rel_energy) << ',' << format_double(p.rel_peak) << ',' << to_string(p.status)
            << '\n';
    }
}

json metrics_json(const Metrics& m) {
    return {{"energy",
             {{"joule_J", num(m.energy.joule)},
              {"viscous_J", num(m.energy.viscous)},
              {"load_mech_J", num(m.energy.load_mech)},
              {"total_J", num(m.energy.total)},
              {"dissipated_J", num(m.energy.dissipated())}}},
            {"peak_power_W", num(m.peak_power)},
            {"peak_power_cvx_W", num(m.peak_power_cvx)},
            {"max_torque_Nm", num(m.max_torque)},
            {"max_speed_rad_s", num(m.max_speed)},
            {"max_elongation_rad", num(m.max_elongation)},
            {"max_accel_rad_s2", num(m.max_accel)}};
}

json sweep_report(const Sweep& sweep, const ReportOptions& options, const std::optional<LinearBaseline>& linear) {
    json j;
    add_metadata(j, options);
    j["rigid"] = metrics_json(sweep.rigid);
    j["knee_index"] = sweep.knee;
    json pts = json::array();
    for (std::size_t i = 0; i < sweep.points.size(); ++i) {
        const auto& p = sweep.points[i];
        json e{{"theta", num(p.theta)},
               {"endpoint", i == 0 || i + 1 == sweep.points.size()},
               {"solution_ref", p.solution_ref},
               {"status", to_string(p.status)},
               {"feasible", p.feasible},
               {"iterations", p.iterations},
               {"energy_total_J", num(p.energy_total)},
               {"energy_dissipated_J", num(p.energy_dissipated)},
               {"peak_power_W", num(p.peak_power)},
               {"peak_power_cvx_W", num(p.peak_power_cvx)},
               {"max_accel_rad_s2", num(p.max_accel)},
               {"power_term_W", num(p.power_term)},
               {"rel_energy_pct", num(p.rel_energy)},
               {"rel_peak_pct", num(p.rel_peak)}};
        pts.push_back(std::move(e));
    }
    j["points"] = std::move(pts);
    if (options.include_timings) {
        json secs = json::array();
        for (const auto& p : sweep.points) secs.push_back(num(p.seconds));
        j["timing"] = {{"point_seconds", std::move(secs)}};
    }
    if (linear) {
        j["linear"] = linear->best ? candidate_json(*linear->best, sweep.rigid) : json(nullptr);
    }
    return j;
}

json design_report(const DesignResult& d, const Metrics& rigid, const ReportOptions& options) {
    json j;
    add_metadata(j, options);
    const auto& s = d.solution;
    j["status"] = to_string(s.status);
    j["message"] = s.message;
    j["iterations"] = s.iterations;
    j["objective"] = num(s.objective);
    j["kkt"] = {{"stationarity", num(s.kkt.stationarity)},
                {"primal", num(s.kkt.primal)},
                {"dual", num(s.kkt.dual)},
                {"complementarity", num(s.kkt.complementarity)},
                {"gap", num(s.kkt.gap)}};
    j["metrics"] = metrics_json(d.metrics);
    j["rigid"] = metrics_json(rigid);
    j["rel_energy_pct"] = num(relative_percent(d.metrics.energy.dissipated(), rigid.energy.dissipated()));
    j["rel_peak_pct"] = num(relative_percent(d.metrics.peak_power, rigid.peak_power));
    if (d.profile) {
        j["profile"] = {{"samples", d.profile->samples().size()},
                        {"delta_min", num(d.profile->delta_min())},
                        {"delta_max", num(d.profile->delta_max())},
                        {"cubic_coefficient", num(d.profile->cubic_coefficient())}};
    } else {
        j["profile"] = nullptr;
        j["profile_error"] = d.profile_error;
    }
    return j;
}

json linear_report(const LinearBaseline& linear, const Metrics& rigid, const ReportOptions& options) {
    json j;
    add_metadata(j, options);
    j["rigid"] = metrics_json(rigid);
    j["best"] = linear.best ? candidate_json(*linear.best, rigid) : json(nullptr);
    const auto n_feasible = std::count_if(linear.grid.begin(), linear.grid.end(),
                                          [](const LinearCandidate& c) { return c.feasible; });
    j["grid_points"] = linear.grid.size();
    j["feasible_points"] = n_feasible;
    if (!linear.best) j["message"] = "no stiffness in the grid satisfies the limits";
    return j;
}

void write_sweep_svg(std::ostream& out, const Sweep& sweep, const std::optional<LinearCandidate>& linear) {
    constexpr double W = 640, H = 480, L = 70, R = 20, T = 20, B = 60;
    std::vector<std::pair<double, double>> xy;
    for (const auto& p : sweep.points) {
        if (p.feasible) xy.emplace_back(p.rel_peak, p.rel_energy);
    }
    std::optional<std::pair<double, double>> lin;
    if (linear && linear->feasible) {
        lin = std::pair{relative_percent(linear->metrics.peak_power, sweep.rigid.peak_power),
                        relative_percent(linear->metrics.energy.dissipated(), sweep.rigid.energy.dissipated())};
    }
    double x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // the rigid point (0, 0) is always in view
    auto grow = [&](double x, double y) {
        x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    };
    for (const auto& [x, y] : xy) grow(x, y);
    if (lin) grow(lin->first, lin->second);
    if (x1 - x0 < 1e-9) x1 = x0 + 1;
    if (y1 - y0 < 1e-9) y1 = y0 + 1;
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    char buf[256];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" font-family=\"sans-serif\" "
           "font-size=\"12\">\n";
    out << "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n", L, T,
                  W - L - R, H - T - B);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">peak power relative to rigid [%%]</text>\n",
                  L + (W - L - R) / 2, H - 15);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"15\" y=\"%g\" text-anchor=\"middle\" transform=\"rotate(-90 15 %g)\">dissipated "
                  "energy relative to rigid [%%]</text>\n",
                  T + (H - T - B) / 2, T + (H - T - B) / 2);
    out << buf;
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
        std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%g\" text-anchor=\"middle\">%.1f</text>\n", px(xv),
                      H - B + 16, xv);
        out << buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%.2f\" text-anchor=\"end\">%.1f</text>\n", L - 6,
                      py(yv) + 4, yv);
        out << buf;
    }
    if (!xy.empty()) {
        out << "<polyline fill=\"none\" stroke=\"#1f77b4\" points=\"";
        for (const auto& [x, y] : xy) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x), py(y));
            out << buf;
        }
        out << "\"/>\n";
    }
    for (const auto& [x, y] : xy) {
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"#1f77b4\"/>\n", px(x), py(y));
        out << buf;
    }
    if (sweep.knee >= 0) {
        const auto& k = sweep.points[sweep.knee];
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"7\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\"/>\n",
                      px(k.rel_peak), py(k.rel_energy));
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"8\" height=\"8\" fill=\"black\"/>\n",
                  px(0) - 4, py(0) - 4);
    out << buf;
    if (lin) {
        std::snprintf(buf, sizeof buf,
                      "<path d=\"M%.2f %.2f l5 8 h-10 z\" fill=\"#2ca02c\"/>\n", px(lin->first), py(lin->second) - 5);
        out << buf;
    }
    out << "</svg>\n";
}

}  // namespace springopt
