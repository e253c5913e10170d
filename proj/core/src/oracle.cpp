#include "springopt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "springopt/error.hpp"

namespace springopt::oracle {

Vector rk4_step(const OdeField& field, double t, const Vector& x, double h) {
    const Vector k1 = field(t, x);
    const Vector k2 = field(t + 0.5 * h, x + 0.5 * h * k1);
    const Vector k3 = field(t + 0.5 * h, x + 0.5 * h * k2);
    const Vector k4 = field(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

OdeSeries rk4_integrate(const OdeField& field, const Vector& x0, double dt, long steps, double t0) {
    OdeSeries out;
    out.t.reserve(steps + 1);
    out.x.reserve(steps + 1);
    out.t.push_back(t0);
    out.x.push_back(x0);
    for (long k = 0; k < steps; ++k) {
        const double t = t0 + k * dt;
        Vector next = rk4_step(field, t, out.x.back(), dt);
        if (!next.allFinite()) throw NumericalError("RK4 state became non-finite at step " + std::to_string(k));
        out.t.push_back(t0 + (k + 1) * dt);
        out.x.push_back(std::move(next));
    }
    return out;
}

QuadratureEnergy quadrature_energy(const Vector& dq_m, const Vector& tau_m, double dt, double k_m) {
    QuadratureEnergy e;
    for (Eigen::Index i = 0; i < tau_m.size(); ++i) {
        e.joule += tau_m[i] * tau_m[i] / (k_m * k_m) * dt;
        e.mechanical += tau_m[i] * dq_m[i] * dt;
    }
    e.total = e.joule + e.mechanical;
    return e;
}

ScalarMotorSeries scalar_motor_series(const Vector& q_m, const Vector& tau_ela, double dt,
                                      double I_m, double b_m, double eta, double r) {
    const Eigen::Index n = q_m.size();
    ScalarMotorSeries s;
    s.dq_m.resize(n);
    s.tau_m.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double next = q_m[(i + 1) % n];
        const double prev = q_m[(i + n - 1) % n];
        const double v = (next - prev) / (2.0 * dt);
        const double acc = (next - 2.0 * q_m[i] + prev) / (dt * dt);
        s.dq_m[i] = v;
        s.tau_m[i] = I_m * acc + b_m * v - tau_ela[i] / (eta * r);
    }
    return s;
}

double finite_diff_gradient_check(const std::function<double(const Vector&)>& f,
                                  const Vector& gradient, const Vector& q, double h) {
    Vector x = q;
    double worst = 0.0;
    const double scale = std::max(1.0, gradient.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        x[i] = q[i] + h;
        const double fp = f(x);
        x[i] = q[i] - h;
        const double fm = f(x);
        x[i] = q[i];
        worst = std::max(worst, std::abs((fp - fm) / (2.0 * h) - gradient[i]));
    }
    return worst / scale;
}

namespace {

SparseVector random_sparse(int n, int nnz, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::normal_distribution<double> normal(0.0, 1.0);
    SparseVector v(n);
    for (int k = 0; k < nnz; ++k) v.coeffRef(pick(rng)) += normal(rng);
    return v;
}

}  // namespace

PlantedInstance plant_instance(int n, std::uint64_t seed, const PlantFlags& flags) {
    if (n < 2) throw InputError("planted instances need n >= 2");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.5, 2.0);
    std::bernoulli_distribution coin(0.5);

    PlantedInstance inst;
    inst.seed = seed;
    Qcqp& p = inst.problem;
    p = Qcqp::empty(n);

    // P = M'M (+ I for strict convexity), M with rank n or n / 2.
    const int rank = flags.strictly_convex ? n : std::max(1, n / 2);
    Eigen::MatrixXd M(rank, n);
    for (int i = 0; i < rank; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = normal(rng) / std::sqrt(double(n));
    Eigen::MatrixXd Pd = M.transpose() * M;
    if (flags.strictly_convex) Pd += 0.1 * Eigen::MatrixXd::Identity(n, n);
    p.P = Pd.sparseView();

    inst.x_star.resize(n);
    for (int i = 0; i < n; ++i) inst.x_star[i] = normal(rng);
    const Vector& xs = inst.x_star;

    auto draw_active = [&]() {
        if (flags.all_active) return true;
        if (flags.none_active) return false;
        return coin(rng);
    };

    // Equalities: fewer rows than variables, full row rank with probability 1.
    const int me = flags.equalities ? std::max(1, n / 4) : 0;
    Eigen::MatrixXd Ad(me, n);
    for (int i = 0; i < me; ++i)
        for (int j = 0; j < n; ++j) Ad(i, j) = normal(rng);
    p.A = Ad.sparseView();
    p.b = Ad * xs;
    inst.multipliers.y.resize(me);
    for (int i = 0; i < me; ++i) inst.multipliers.y[i] = normal(rng);

    const int ml = flags.linear_inequalities ? std::max(1, n / 2) : 0;
    std::vector<Triplet> gt;
    p.h.resize(ml);
    Vector z(ml + (flags.quadratic ? std::max(1, n / 4) : 0));
    for (int i = 0; i < ml; ++i) {
        const SparseVector row = random_sparse(n, 3, rng);
        double gx = 0.0;
        for (SparseVector::InnerIterator it(row); it; ++it) {
            gt.emplace_back(i, it.index(), it.value());
            gx += it.value() * xs[it.index()];
        }
        if (draw_active()) {
            p.h[i] = gx;
            z[i] = unit(rng);
        } else {
            p.h[i] = gx + unit(rng);
            z[i] = 0.0;
        }
    }
    p.G.resize(ml, n);
    p.G.setFromTriplets(gt.begin(), gt.end());

    const int mq = static_cast<int>(z.size()) - ml;
    Vector grad_sum = Vector::Zero(n);
    for (int k = 0; k < mq; ++k) {
        RankOneConstraint q;
        q.u = random_sparse(n, 3, rng);
        q.g = random_sparse(n, 2, rng);
        const double ux = q.u.dot(xs);
        const double value = ux * ux + q.g.dot(xs);
        if (draw_active()) {
            q.h = value;
            z[ml + k] = unit(rng);
        } else {
            q.h = value + unit(rng);
            z[ml + k] = 0.0;
        }
        Vector grad = Vector::Zero(n);
        for (SparseVector::InnerIterator it(q.u); it; ++it) grad[it.index()] += 2.0 * ux * it.value();
        for (SparseVector::InnerIterator it(q.g); it; ++it) grad[it.index()] += it.value();
        grad_sum += z[ml + k] * grad;
        p.quad.push_back(std::move(q));
    }
    if (ml > 0) grad_sum += p.G.transpose() * z.head(ml);
    inst.multipliers.z = z;

    // Stationarity at x*: P x* + c + J'z + A'y = 0.
    p.c = -(p.P * xs + grad_sum + p.A.transpose() * inst.multipliers.y);
    p.c0 = normal(rng);
    inst.objective_star = p.objective(xs);
    return inst;
}

}  // namespace springopt::oracle
