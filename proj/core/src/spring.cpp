#include "springopt/spring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "springopt/error.hpp"

namespace springopt {

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw InputError("monotone interpolant needs >= 2 matching knots");
    std::vector<double> secant(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double h = x_[k + 1] - x_[k];
        if (!(h > 0.0)) throw InputError("interpolation knots must be strictly increasing");
        secant[k] = (y_[k + 1] - y_[k]) / h;
    }
    m_.assign(n, 0.0);
    m_[0] = secant[0];
    m_[n - 1] = secant[n - 2];
    for (std::size_t k = 1; k + 1 < n; ++k) {
        m_[k] = (secant[k - 1] * secant[k] > 0.0) ? 0.5 * (secant[k - 1] + secant[k]) : 0.0;
    }
    // Fritsch-Carlson limiter: keep (alpha, beta) inside the circle of radius 3.
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (secant[k] == 0.0) {
            m_[k] = m_[k + 1] = 0.0;
            continue;
        }
        const double a = m_[k] / secant[k];
        const double b = m_[k + 1] / secant[k];
        const double r2 = a * a + b * b;
        if (r2 > 9.0) {
            const double t = 3.0 / std::sqrt(r2);
            m_[k] = t * a * secant[k];
            m_[k + 1] = t * b * secant[k];
        }
    }
}

std::size_t MonotoneCubic::interval(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const auto k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - x_.begin())) - 1;
    return std::min(k, x_.size() - 2);
}

double MonotoneCubic::operator()(double x) const {
    if (x <= x_.front()) return y_.front() + m_.front() * (x - x_.front());
    if (x >= x_.back()) return y_.back() + m_.back() * (x - x_.back());
    const std::size_t k = interval(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * m_[k] + (-2 * t3 + 3 * t2) * y_[k + 1] +
           (t3 - t2) * h * m_[k + 1];
}

double MonotoneCubic::derivative(double x) const {
    if (x <= x_.front()) return m_.front();
    if (x >= x_.back()) return m_.back();
    const std::size_t k = interval(x);
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t;
    return (6 * t2 - 6 * t) / h * y_[k] + (3 * t2 - 4 * t + 1) * m_[k] + (-6 * t2 + 6 * t) / h * y_[k + 1] +
           (3 * t2 - 2 * t) * m_[k + 1];
}

SpringProfile::SpringProfile(std::vector<Sample> samples, std::map<std::string, std::string> provenance)
    : samples_(std::move(samples)), provenance_(std::move(provenance)) {
    if (samples_.size() < 2) throw InputError("degenerate profile: need at least two distinct samples");
    for (std::size_t k = 0; k < samples_.size(); ++k) {
        if (!std::isfinite(samples_[k].delta) || !std::isfinite(samples_[k].tau)) {
            throw InputError("profile samples must be finite");
        }
        if (k > 0 && !(samples_[k].delta > samples_[k - 1].delta && samples_[k].tau > samples_[k - 1].tau)) {
            throw InputError("profile samples must be strictly increasing in delta and tau (row " +
                             std::to_string(k + 1) + ")");
        }
    }
    std::vector<double> x, y;
    for (const auto& s : samples_) {
        x.push_back(s.delta);
        y.push_back(s.tau);
    }
    interp_ = MonotoneCubic(std::move(x), std::move(y));
}

SpringProfile::Value SpringProfile::evaluate(double delta) const {
    return {interp_(delta), delta < delta_min() || delta > delta_max()};
}

double SpringProfile::stiffness(double delta) const { return interp_.derivative(delta); }

double SpringProfile::cubic_coefficient() const {
    double num = 0.0, den = 0.0;
    for (const auto& s : samples_) {
        const double d3 = s.delta * s.delta * s.delta;
        num += s.tau * d3;
        den += d3 * d3;
    }
    return den > 0.0 ? num / den : 0.0;
}

SpringProfile build_profile(const Vector& delta, const Vector& tau_ela, const ProfileOptions& options,
                            std::map<std::string, std::string> provenance) {
    if (delta.size() != tau_ela.size()) throw InputError("build_profile: delta and tau lengths differ");
    if (delta.size() < 2) throw InputError("degenerate profile: need at least two samples");
    if (!delta.allFinite() || !tau_ela.allFinite()) throw InputError("build_profile: non-finite samples");
    if (!(options.tol_merge >= 0.0) || !(options.relative_tau_tolerance >= 0.0)) {
        throw InputError("build_profile: tolerances must be >= 0");
    }

    const auto n = static_cast<std::size_t>(delta.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return delta[a] < delta[b] || (delta[a] == delta[b] && tau_ela[a] < tau_ela[b]);
    });
    const double tau_tol = options.relative_tau_tolerance * (tau_ela.maxCoeff() - tau_ela.minCoeff());

    // Collapse repeated states: elongation within tol_merge and torque within tau_tol.
    std::vector<SpringProfile::Sample> merged;
    double sum_d = 0.0, sum_t = 0.0;
    int count = 0;
    double anchor_d = 0.0, anchor_t = 0.0;
    auto flush = [&] {
        if (count) merged.push_back({sum_d / count, sum_t / count});
        sum_d = sum_t = 0.0;
        count = 0;
    };
    for (const auto idx : order) {
        const double d = delta[idx], t = tau_ela[idx];
        if (count && !(d - anchor_d <= options.tol_merge && std::abs(t - anchor_t) <= tau_tol)) flush();
        if (!count) {
            anchor_d = d;
            anchor_t = t;
        }
        sum_d += d;
        sum_t += t;
        ++count;
    }
    flush();
    if (merged.size() < 2) throw InputError("degenerate profile: all samples collapse to a single point");

    for (std::size_t k = 1; k < merged.size(); ++k) {
        const auto& a = merged[k - 1];
        const auto& b = merged[k];
        if (b.tau > a.tau && b.delta > a.delta) continue;
        char buf[200];
        if (b.delta - a.delta <= options.tol_merge) {
            std::snprintf(buf, sizeof buf, "conflicting torques %.6g and %.6g at elongation %.9g", a.tau, b.tau,
                          a.delta);
        } else {
            std::snprintf(buf, sizeof buf,
                          "torque does not increase with elongation between delta = %.9g and %.9g (%.6g -> %.6g)",
                          a.delta, b.delta, a.tau, b.tau);
        }
        throw NumericalError(buf);
    }
    return SpringProfile(std::move(merged), std::move(provenance));
}

void write_profile(std::ostream& out, const SpringProfile& profile) {
    for (const auto& [k, v] : profile.provenance()) out << "# " << k << ": " << v << '\n';
    out << "delta,tau\n";
    char buf[64];
    for (const auto& s : profile.samples()) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s.delta, s.tau);
        out << buf;
    }
}

SpringProfile read_profile(std::istream& in) {
    std::map<std::string, std::string> prov;
    std::vector<SpringProfile::Sample> samples;
    std::string line;
    bool header = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                auto key = line.substr(1, colon - 1);
                auto value = line.substr(colon + 1);
                key.erase(0, key.find_first_not_of(' '));
                value.erase(0, value.find_first_not_of(' '));
                prov[key] = value;
            }
            continue;
        }
        if (!header) {
            if (line != "delta,tau") throw InputError("profile file must start with a 'delta,tau' header");
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InputError("profile line " + std::to_string(line_no) + ": expected two columns");
        const std::string a = line.substr(0, comma), b = line.substr(comma + 1);
        char* end = nullptr;
        const double d = std::strtod(a.c_str(), &end);
        if (a.empty() || end != a.c_str() + a.size()) throw InputError("profile line " + std::to_string(line_no) + ": bad delta");
        const double t = std::strtod(b.c_str(), &end);
        if (b.empty() || end != b.c_str() + b.size()) throw InputError("profile line " + std::to_string(line_no) + ": bad tau");
        samples.push_back({d, t});
    }
    if (!header || samples.empty()) throw InputError("profile file is empty");
    return SpringProfile(std::move(samples), std::move(prov));
}

void export_profile(const SpringProfile& profile, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write profile " + path.string());
    write_profile(out, profile);
    if (!out) throw InputError("write failed for " + path.string());
}

SpringProfile import_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open profile " + path.string());
    return read_profile(in);
}

}  // namespace springopt
