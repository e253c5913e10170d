#include "springopt/qcqp.hpp"

#include <cmath>
#include <string>

#include "springopt/error.hpp"

namespace springopt {

double RankOneConstraint::value(const Vector& x) const {
    const double ux = u.dot(x);
    return ux * ux + g.dot(x) - h;
}

Qcqp Qcqp::empty(int n) {
    Qcqp q;
    q.n = n;
    q.P.resize(n, n);
    q.c = Vector::Zero(n);
    q.A.resize(0, n);
    q.b.resize(0);
    q.G.resize(0, n);
    q.h.resize(0);
    return q;
}

double Qcqp::objective(const Vector& x) const {
    return 0.5 * x.dot(P * x) + c.dot(x) + c0;
}

Vector Qcqp::objective_gradient(const Vector& x) const { return P * x + c; }

Vector Qcqp::inequality_values(const Vector& x) const {
    Vector f(num_inequalities());
    const int ml = num_linear();
    if (ml > 0) f.head(ml) = G * x - h;
    for (int k = 0; k < num_quadratic(); ++k) f[ml + k] = quad[k].value(x);
    return f;
}

SparseMatrix Qcqp::inequality_jacobian(const Vector& x) const {
    std::vector<Triplet> t;
    t.reserve(G.nonZeros() + quad.size() * 4);
    for (int col = 0; col < G.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(G, col); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
    }
    const int ml = num_linear();
    for (int k = 0; k < num_quadratic(); ++k) {
        const double two_ux = 2.0 * quad[k].u.dot(x);
        for (SparseVector::InnerIterator it(quad[k].u); it; ++it) {
            t.emplace_back(ml + k, it.index(), two_ux * it.value());
        }
        for (SparseVector::InnerIterator it(quad[k].g); it; ++it) {
            t.emplace_back(ml + k, it.index(), it.value());
        }
    }
    SparseMatrix J(num_inequalities(), n);
    J.setFromTriplets(t.begin(), t.end());
    return J;
}

void Qcqp::validate() const {
    auto fail = [](const std::string& what) { throw InputError("invalid QCQP: " + what); };
    if (n <= 0) fail("no variables");
    if (P.rows() != n || P.cols() != n) fail("P must be n x n");
    if (c.size() != n) fail("c must have n entries");
    if (A.cols() != n || A.rows() != b.size()) fail("A/b dimensions");
    if (G.cols() != n || G.rows() != h.size()) fail("G/h dimensions");
    for (const auto& q : quad) {
        if (q.u.size() != n || q.g.size() != n) fail("quadratic row dimensions");
        if (!std::isfinite(q.h)) fail("non-finite quadratic bound");
    }
    if (!c.allFinite() || !b.allFinite() || !h.allFinite() || !std::isfinite(c0)) fail("non-finite data");
    const SparseMatrix asym = SparseMatrix(P.transpose()) - P;
    double scale = 0.0;
    for (int col = 0; col < P.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(P, col); it; ++it) {
            if (!std::isfinite(it.value())) fail("non-finite P entry");
            scale = std::max(scale, std::abs(it.value()));
        }
    }
    for (int col = 0; col < asym.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(asym, col); it; ++it) {
            if (std::abs(it.value()) > 1e-12 * std::max(1.0, scale)) fail("P is not symmetric");
        }
    }
}

Vector equality_residual(const Qcqp& prob, const Vector& x) { return prob.A * x - prob.b; }

}  // namespace springopt
