#include <istream>
#include <ostream>

#include <json.hpp>

#include "springopt/error.hpp"
#include "springopt/problem.hpp"

namespace springopt {

namespace {

using nlohmann::json;

json triplets(const SparseMatrix& M) {
    json rows = json::array();
    for (int col = 0; col < M.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(M, col); it; ++it) rows.push_back({it.row(), it.col(), it.value()});
    return {{"rows", M.rows()}, {"cols", M.cols()}, {"entries", rows}};
}

SparseMatrix from_triplets(const json& j) {
    SparseMatrix M(j.at("rows").get<int>(), j.at("cols").get<int>());
    std::vector<Triplet> t;
    for (const auto& e : j.at("entries")) t.emplace_back(e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>());
    M.setFromTriplets(t.begin(), t.end());
    return M;
}

json sparse_vector(const SparseVector& v) {
    json out = json::array();
    for (SparseVector::InnerIterator it(v); it; ++it) out.push_back({it.index(), it.value()});
    return out;
}

SparseVector to_sparse_vector(const json& j, int n) {
    SparseVector v(n);
    for (const auto& e : j) v.coeffRef(e.at(0).get<int>()) += e.at(1).get<double>();
    return v;
}

json dense(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector to_dense(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void write_problem_json(std::ostream& out, const Qcqp& prob) {
    json j;
    j["format"] = "springopt-qcqp";
    j["version"] = 1;
    j["n"] = prob.n;
    j["P"] = triplets(prob.P);
    j["c"] = dense(prob.c);
    j["c0"] = prob.c0;
    j["A"] = triplets(prob.A);
    j["b"] = dense(prob.b);
    j["G"] = triplets(prob.G);
    j["h"] = dense(prob.h);
    json quad = json::array();
    for (const auto& q : prob.quad) quad.push_back({{"u", sparse_vector(q.u)}, {"g", sparse_vector(q.g)}, {"h", q.h}});
    j["quad"] = quad;
    out << j.dump(1) << '\n';
}

Qcqp read_problem_json(std::istream& in) {
    json j;
    try {
        in >> j;
        if (j.value("format", "") != "springopt-qcqp") throw InputError("not a springopt problem dump");
        Qcqp q;
        q.n = j.at("n").get<int>();
        q.P = from_triplets(j.at("P"));
        q.c = to_dense(j.at("c"));
        q.c0 = j.at("c0").get<double>();
        q.A = from_triplets(j.at("A"));
        q.b = to_dense(j.at("b"));
        q.G = from_triplets(j.at("G"));
        q.h = to_dense(j.at("h"));
        for (const auto& e : j.at("quad")) {
            RankOneConstraint rc;
            rc.u = to_sparse_vector(e.at("u"), q.n);
            rc.g = to_sparse_vector(e.at("g"), q.n);
            rc.h = e.at("h").get<double>();
            q.quad.push_back(std::move(rc));
        }
        q.validate();
        return q;
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed problem dump: ") + e.what());
    }
}

}  // namespace springopt
