#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include <springopt/report.hpp>

using namespace springopt;

namespace {

Sweep fake_sweep() {
    Sweep s;
    s.rigid.energy.joule = 40.0;
    s.rigid.energy.viscous = 10.0;
    s.rigid.peak_power = 3000.0;
    for (int i = 0; i < 3; ++i) {
        TradeoffPoint p;
        p.theta = 0.5 * i;
        p.energy_dissipated = 30.0 - 5.0 * i;
        p.peak_power = 1000.0 + 200.0 * i;
        p.rel_energy = relative_percent(p.energy_dissipated, 50.0);
        p.rel_peak = relative_percent(p.peak_power, 3000.0);
        p.feasible = true;
        p.status = SolveStatus::optimal;
        p.seconds = 0.25;
        s.points.push_back(p);
    }
    s.knee = 1;
    return s;
}

}  // namespace

TEST(Report, FormatDoubleRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
        EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
    }
    EXPECT_EQ(format_double(1.0), "1");
}

TEST(Report, CurveCsvHasOneRowPerPoint) {
    std::stringstream ss;
    write_curve_csv(ss, fake_sweep());
    std::string line;
    std::getline(ss, line);
    EXPECT_EQ(line, "theta,energy_J,peak_W,peak_cvx_W,rel_energy_pct,rel_peak_pct,status");
    int rows = 0;
    while (std::getline(ss, line)) ++rows;
    EXPECT_EQ(rows, 3);
    std::stringstream again;
    write_curve_csv(again, fake_sweep());
    std::stringstream first;
    write_curve_csv(first, fake_sweep());
    EXPECT_EQ(first.str(), again.str());
}

TEST(Report, SweepJsonFlagsEndpointsAndTimings) {
    ReportOptions opt;
    opt.metadata["config_hash"] = "0123456789abcdef";
    auto j = sweep_report(fake_sweep(), opt);
    EXPECT_EQ(j["config_hash"], "0123456789abcdef");
    ASSERT_EQ(j["points"].size(), 3u);
    EXPECT_TRUE(j["points"][0]["endpoint"].get<bool>());
    EXPECT_FALSE(j["points"][1]["endpoint"].get<bool>());
    EXPECT_TRUE(j["points"][2]["endpoint"].get<bool>());
    EXPECT_EQ(j["knee_index"], 1);
    EXPECT_TRUE(j.contains("timing"));
    EXPECT_FALSE(j.contains("linear"));

    opt.include_timings = false;
    j = sweep_report(fake_sweep(), opt, LinearBaseline{});
    EXPECT_FALSE(j.contains("timing"));
    EXPECT_TRUE(j["linear"].is_null());
}

TEST(Report, NonFiniteValuesBecomeNull) {
    Metrics m;
    m.peak_power = std::numeric_limits<double>::quiet_NaN();
    m.max_torque = std::numeric_limits<double>::infinity();
    const auto j = metrics_json(m);
    EXPECT_TRUE(j["peak_power_W"].is_null());
    EXPECT_TRUE(j["max_torque_Nm"].is_null());
    EXPECT_EQ(j["energy"]["dissipated_J"], 0.0);
}

TEST(Report, DesignReportCarriesProfileError) {
    DesignResult d;
    d.solution.status = SolveStatus::infeasible;
    d.profile_error = "not monotone";
    Metrics rigid;
    rigid.energy.joule = 10.0;
    d.metrics.energy.joule = 5.0;
    const auto j = design_report(d, rigid);
    EXPECT_EQ(j["status"], "infeasible");
    EXPECT_TRUE(j["profile"].is_null());
    EXPECT_EQ(j["profile_error"], "not monotone");
    EXPECT_DOUBLE_EQ(j["rel_energy_pct"].get<double>(), -50.0);
}

TEST(Report, LinearReportCountsFeasiblePoints) {
    LinearBaseline lb;
    lb.grid.resize(4);
    lb.grid[1].feasible = lb.grid[2].feasible = true;
    lb.best = lb.grid[1];
    auto j = linear_report(lb, Metrics{});
    EXPECT_EQ(j["grid_points"], 4);
    EXPECT_EQ(j["feasible_points"], 2);
    EXPECT_FALSE(j.contains("message"));
    lb.best.reset();
    j = linear_report(lb, Metrics{});
    EXPECT_TRUE(j["best"].is_null());
    EXPECT_TRUE(j.contains("message"));
}

TEST(Report, SvgIsSelfContained) {
    std::stringstream ss;
    LinearCandidate lin;
    lin.k = 100.0;
    lin.feasible = true;
    lin.metrics.energy.joule = 35.0;
    lin.metrics.peak_power = 2000.0;
    write_sweep_svg(ss, fake_sweep(), lin);
    const std::string svg = ss.str();
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_EQ(svg.find("http://"), svg.find("http://www.w3.org"));
}
