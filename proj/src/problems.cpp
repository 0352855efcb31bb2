#include "fbflow/problems.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <sstream>

namespace fbflow {
namespace {

using nlohmann::json;

json to_json_vector(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

json to_json_matrix(const Matrix& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(row);
    }
    return a;
}

Vector vector_from_json(const json& a, const char* what) {
    if (!a.is_array() || a.empty()) throw ParameterError(std::string(what) + " must be a nonempty array");
    Vector v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
    return v;
}

Matrix matrix_from_json(const json& a, const char* what) {
    if (!a.is_array() || a.empty()) throw ParameterError(std::string(what) + " must be a nonempty array");
    const auto n = static_cast<Eigen::Index>(a.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = a[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
            throw ParameterError(std::string(what) + " must be square");
        }
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
    return m;
}

struct Spectrum {
    double min;
    double max;
};

Spectrum spd_spectrum(const Matrix& q) {
    if (q.rows() == 0 || q.rows() != q.cols()) throw ParameterError("Q must be a nonempty square matrix");
    if (!q.allFinite()) throw ParameterError("Q must be finite");
    if ((q - q.transpose()).norm() > 1e-12 * std::max(1.0, q.norm())) {
        throw ParameterError("Q must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(q, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (!(ev.minCoeff() > 0.0)) throw ParameterError("Q must be positive definite (eigenvalues > 0)");
    return {ev.minCoeff(), ev.maxCoeff()};
}

FunctionOracle quadratic_function(const Matrix& q, const Vector& b, double rho) {
    FunctionOracle g;
    g.description = "quadratic";
    g.strong_convexity = rho;
    g.value = [q, b](const Vector& x) { return 0.5 * x.dot(q * x) + b.dot(x); };
    g.gradient = [q, b](const Vector& x) { return Vector(q * x + b); };
    return g;
}

}  // namespace

std::optional<double> ProblemInstance::objective(const Vector& x) const {
    if (!g) return std::nullopt;
    const double fv = f ? f->value(x) : 0.0;
    return fv + g->value(x);
}

double ProblemInstance::fixed_point_residual(const Vector& x, double eta) const {
    return (x - a.resolve(eta, x - eta * b(x))).norm();
}

ProblemInstance make_quadratic(const Matrix& q, const Vector& b) {
    if (b.size() != q.rows()) throw ParameterError("b must match the dimension of Q");
    const Spectrum s = spd_spectrum(q);
    ProblemInstance p;
    p.name = "quadratic";
    p.description = "g(x) = 1/2 x'Qx + b'x, f = 0";
    p.rho = s.min;
    p.beta = 1.0 / s.max;
    p.f = build_prox(prox_spec::Zero{});
    p.g = quadratic_function(q, b, p.rho);
    p.a = p.f->subdifferential();
    p.b = p.g->gradient_map(p.beta);
    p.x_star = q.ldlt().solve(-b);
    p.descriptor = {{"kind", "quadratic"}, {"Q", to_json_matrix(q)}, {"b", to_json_vector(b)}};
    return p;
}

ProblemInstance make_sc_lasso(const Matrix& q, const Vector& b, double w) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("sc_lasso requires w >= 0");
    if (w == 0.0) {
        ProblemInstance p = make_quadratic(q, b);
        p.name = "sc_lasso";
        p.descriptor = {{"kind", "sc_lasso"}, {"Q", to_json_matrix(q)}, {"b", to_json_vector(b)}, {"w", w}};
        return p;
    }
    if (b.size() != q.rows()) throw ParameterError("b must match the dimension of Q");
    const Spectrum s = spd_spectrum(q);
    ProblemInstance p;
    p.name = "sc_lasso";
    p.description = "f = w|x|_1, g(x) = 1/2 x'Qx + b'x";
    p.rho = s.min;
    p.beta = 1.0 / s.max;
    p.f = build_prox(prox_spec::L1Norm{w});
    p.g = quadratic_function(q, b, p.rho);
    p.a = p.f->subdifferential();
    p.b = p.g->gradient_map(p.beta);
    p.x_star = Vector::Zero(q.rows());
    p.x_star = ground_truth(p, 1e-11);
    p.descriptor = {{"kind", "sc_lasso"}, {"Q", to_json_matrix(q)}, {"b", to_json_vector(b)}, {"w", w}};
    return p;
}

ProblemInstance make_skew_rotation(double rho, const Vector& c) {
    if (!(rho > 0.0) || !std::isfinite(rho)) throw ParameterError("skew_rotation requires rho > 0");
    if (c.size() != 2) throw ParameterError("skew_rotation is two-dimensional");
    Matrix m(2, 2);
    m << rho, 1.0, -1.0, rho;  // rho I + S
    ProblemInstance p;
    p.name = "skew_rotation";
    p.description = "A(x) = rho x - c, B(x) = (x2, -x1)";
    p.rho = rho;
    p.beta = 1.0;
    p.f = build_prox(prox_spec::TranslatedLinear{rho, c});
    p.a = translated_linear_operator(rho, c);
    p.b = rotation_map();
    p.x_star = m.partialPivLu().solve(c);
    p.descriptor = {{"kind", "skew_rotation"}, {"rho", rho}, {"c", to_json_vector(c)}};
    return p;
}

Vector ground_truth(const ProblemInstance& p, double tol, std::size_t max_iter) {
    if (!(tol > 0.0)) throw ParameterError("ground_truth requires tol > 0");
    const double eta = p.beta * std::min(1.0, p.rho * p.beta);
    const double stop = tol * 1e-2;
    Vector x = Vector::Zero(p.dim());
    double residual = 0.0;
    for (std::size_t k = 0; k < max_iter; ++k) {
        Vector next = p.a.resolve(eta, x - eta * p.b(x));
        residual = (next - x).norm();
        x = std::move(next);
        if (residual <= stop) return x;
    }
    std::ostringstream os;
    os << "ground_truth did not converge in " << max_iter << " iterations (residual " << residual << ")";
    throw std::runtime_error(os.str());
}

InstanceAudit audit_instance(const ProblemInstance& p, std::size_t n_pairs, std::uint64_t seed) {
    if (n_pairs < 100) throw ParameterError("audit_instance requires n_pairs >= 100");
    const auto dim = static_cast<std::size_t>(p.dim());
    InstanceAudit out;
    out.sum = audit_map(sample_sum(p.a, p.b, 1.0), dim, p.rho, std::nullopt, n_pairs, seed);
    out.map = audit_map(sample_map(p.b), dim, 0.0, p.beta, n_pairs, seed + 1);
    if (!out.sum.monotone_pass) out.failures.emplace_back("ρ-strong monotonicity of A+B");
    if (!out.map.monotone_pass) out.failures.emplace_back("monotonicity of B");
    if (!out.map.lipschitz_pass) out.failures.emplace_back("(1/β)-Lipschitz continuity of B");

    if (p.smooth()) {
        std::mt19937_64 rng(seed + 2);
        std::uniform_real_distribution<double> coord(-kAuditRadius, kAuditRadius);
        const double f_star = *p.objective(p.x_star);
        const double g_star = p.g->value(p.x_star);
        const Vector grad_star = p.g->gradient(p.x_star);
        for (std::size_t k = 0; k < n_pairs; ++k) {
            Vector x(p.dim());
            for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = coord(rng);
            const double dist_sq = (x - p.x_star).squaredNorm();
            const double gap = *p.objective(x) - f_star;
            const double lower = 0.5 * p.rho * dist_sq;
            if (lower > gap + 1e-9 * (1.0 + std::abs(gap) + lower)) ++out.sandwich_violations;
            // Descent lemma around x*: g(x) <= g(x*) + <grad g(x*), x - x*> + |x - x*|^2 / (2 beta).
            const double lhs = p.g->value(x);
            const double rhs = g_star + grad_star.dot(x - p.x_star) + dist_sq / (2.0 * p.beta);
            if (lhs > rhs + 1e-9 * (1.0 + std::abs(lhs) + std::abs(rhs))) ++out.descent_violations;
            ++out.value_points;
        }
        if (out.sandwich_violations > 0) out.failures.emplace_back("(ρ/2)‖x−x*‖² ≤ F(x)−F(x*)");
        if (out.descent_violations > 0) out.failures.emplace_back("descent lemma");
    }
    return out;
}

Matrix random_spd(Eigen::Index dim, std::uint64_t seed, double eig_min, double eig_max) {
    if (dim < 1) throw ParameterError("dimension must be positive");
    if (!(eig_min > 0.0) || eig_max < eig_min) throw ParameterError("need 0 < eig_min <= eig_max");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = normal(rng);
    const Matrix u = Eigen::HouseholderQR<Matrix>(g).householderQ();
    Vector ev(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        ev[i] = dim == 1 ? eig_min
                         : eig_min + (eig_max - eig_min) * static_cast<double>(i) / static_cast<double>(dim - 1);
    }
    Matrix q = u * ev.asDiagonal() * u.transpose();
    return 0.5 * (q + q.transpose());
}

std::vector<std::string> registry_names() {
    return {"quadratic-2d", "isotropic-quadratic-1d", "sc-lasso-20d", "skew-rotation"};
}

ProblemInstance make_registered(const std::string& name) {
    ProblemInstance p;
    if (name == "quadratic-2d") {
        Matrix q = Matrix::Zero(2, 2);
        q.diagonal() << 1.0, 4.0;
        Vector b(2);
        b << -1.0, -4.0;
        p = make_quadratic(q, b);
    } else if (name == "isotropic-quadratic-1d") {
        p = make_quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
    } else if (name == "sc-lasso-20d") {
        constexpr std::uint64_t seed = 2024;
        const Matrix q = random_spd(20, seed, 0.5, 4.0);
        std::mt19937_64 rng(seed + 1);
        std::normal_distribution<double> normal(0.0, 2.0);
        Vector b(20);
        for (Eigen::Index i = 0; i < 20; ++i) b[i] = normal(rng);
        p = make_sc_lasso(q, b, 0.5);
        p.descriptor["seed"] = seed;
    } else if (name == "skew-rotation") {
        Vector c(2);
        c << 1.0, 0.0;
        p = make_skew_rotation(1.0, c);
    } else {
        throw UnknownProblem("unknown problem '" + name + "'");
    }
    p.name = name;
    return p;
}

ProblemInstance instance_from_descriptor(const nlohmann::json& d) {
    if (d.is_string()) return make_registered(d.get<std::string>());
    if (!d.is_object() || !d.contains("kind")) throw ParameterError("problem descriptor needs a 'kind'");
    const std::string kind = d.at("kind").get<std::string>();
    ProblemInstance p;
    if (kind == "quadratic") {
        p = make_quadratic(matrix_from_json(d.at("Q"), "Q"), vector_from_json(d.at("b"), "b"));
    } else if (kind == "sc_lasso") {
        p = make_sc_lasso(matrix_from_json(d.at("Q"), "Q"), vector_from_json(d.at("b"), "b"),
                          d.at("w").get<double>());
    } else if (kind == "skew_rotation") {
        p = make_skew_rotation(d.at("rho").get<double>(), vector_from_json(d.at("c"), "c"));
    } else {
        throw UnknownProblem("unknown problem kind '" + kind + "'");
    }
    if (d.contains("name")) p.name = d.at("name").get<std::string>();
    return p;
}

}  // namespace fbflow
