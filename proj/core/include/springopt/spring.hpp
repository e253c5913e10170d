#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "springopt/operators.hpp"

namespace springopt {

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
/// Knots must be strictly increasing, values non-decreasing.
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    MonotoneCubic(std::vector<double> x, std::vector<double> y);

    [[nodiscard]] double operator()(double x) const;
    [[nodiscard]] double derivative(double x) const;

    [[nodiscard]] const std::vector<double>& knots() const { return x_; }
    [[nodiscard]] const std::vector<double>& values() const { return y_; }
    [[nodiscard]] const std::vector<double>& slopes() const { return m_; }

private:
    [[nodiscard]] std::size_t interval(double x) const;

    std::vector<double> x_;
    std::vector<double> y_;
    std::vector<double> m_;
};

/// Torque-elongation characteristic of a conservative spring, tau = f(delta).
class SpringProfile {
public:
    struct Sample {
        double delta;  ///< rad
        double tau;    ///< N m
        friend bool operator==(const Sample&, const Sample&) = default;
    };

    /// Requires >= 2 samples, strictly increasing in both delta and tau.
    explicit SpringProfile(std::vector<Sample> samples,
                           std::map<std::string, std::string> provenance = {});

    [[nodiscard]] const std::vector<Sample>& samples() const { return samples_; }
    [[nodiscard]] const std::map<std::string, std::string>& provenance() const { return provenance_; }
    [[nodiscard]] double delta_min() const { return samples_.front().delta; }
    [[nodiscard]] double delta_max() const { return samples_.back().delta; }

    struct Value {
        double tau;
        bool extrapolated;
    };

    /// Monotone interpolation inside the sampled range; linear extrapolation
    /// at the boundary stiffness outside it (flagged, never clipped).
    [[nodiscard]] Value evaluate(double delta) const;
    /// d tau / d delta of the interpolant (boundary stiffness outside).
    [[nodiscard]] double stiffness(double delta) const;

    /// Least-squares coefficient c of tau = c delta^3.
    [[nodiscard]] double cubic_coefficient() const;

private:
    std::vector<Sample> samples_;
    std::map<std::string, std::string> provenance_;
    MonotoneCubic interp_;
};

struct ProfileOptions {
    /// Samples closer than this in delta collapse to one.
    double tol_merge = 1e-6;
    /// Torque disagreement tolerated inside a merged cluster, relative to the
    /// torque range.
    double relative_tau_tolerance = 1e-6;
};

/// Sorts (delta, tau) pairs, merges near-duplicate elongations and checks
/// strict monotonicity. Throws InputError on degenerate input or
/// NumericalError when the data are not a monotone characteristic.
SpringProfile build_profile(const Vector& delta, const Vector& tau_ela,
                            const ProfileOptions& options = {},
                            std::map<std::string, std::string> provenance = {});

/// CSV `delta,tau` preceded by `# key: value` provenance comments.
void write_profile(std::ostream& out, const SpringProfile& profile);
SpringProfile read_profile(std::istream& in);
void export_profile(const SpringProfile& profile, const std::filesystem::path& path);
SpringProfile import_profile(const std::filesystem::path& path);

}  // namespace springopt
