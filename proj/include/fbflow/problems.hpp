#pragma once

#include "fbflow/operators.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbflow {

/// A monotone inclusion 0 in A x + B x with known moduli and solution. Smooth
/// instances additionally carry f (A = df) and g (B = grad g).
struct ProblemInstance {
    std::string name;
    std::string description;
    ResolventOracle a;
    MonotoneMap b;
    std::optional<FunctionOracle> f;
    std::optional<FunctionOracle> g;
    /// Strong monotonicity modulus of A + B.
    double rho = 0.0;
    /// B is (1/beta)-Lipschitz.
    double beta = 0.0;
    Vector x_star;
    nlohmann::json descriptor;

    Eigen::Index dim() const { return x_star.size(); }
    bool smooth() const { return g.has_value(); }
    /// f vanishes, so f + g = g and the gradient systems apply.
    bool gradient_ready() const { return g.has_value() && (!f || f->description == "zero"); }
    /// (f + g)(x), available for smooth instances.
    std::optional<double> objective(const Vector& x) const;
    /// |x - J_{eta A}(x - eta B x)|
    double fixed_point_residual(const Vector& x, double eta = 1.0) const;
};

class UnknownProblem : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// g(x) = 1/2 x'Qx + b'x with rho = lambda_min(Q), beta = 1/lambda_max(Q).
ProblemInstance make_quadratic(const Matrix& q, const Vector& b);

/// f = w |.|_1 plus the quadratic g above; x* from ground_truth.
ProblemInstance make_sc_lasso(const Matrix& q, const Vector& b, double w);

/// A(x) = rho x - c, B = rotation by -90 degrees (monotone, 1-Lipschitz, not
/// cocoercive). x* = (rho I + S)^{-1} c.
ProblemInstance make_skew_rotation(double rho, const Vector& c);

/// Discrete forward-backward iteration x+ = J_{eta A}(x - eta B x) with
/// eta = beta min(1, rho beta), stopped when |x+ - x| <= tol * 1e-2.
Vector ground_truth(const ProblemInstance& p, double tol, std::size_t max_iter = 1'000'000);

struct InstanceAudit {
    AuditReport sum;   // A + B against rho
    AuditReport map;   // B against monotonicity and beta
    std::size_t value_points = 0;
    std::size_t sandwich_violations = 0;
    std::size_t descent_violations = 0;
    std::vector<std::string> failures;

    bool pass() const { return failures.empty(); }
    /// Informational: cocoercivity of B with modulus beta held on every pair.
    bool b_cocoercive() const { return map.cocoercivity_violations == 0; }
};

InstanceAudit audit_instance(const ProblemInstance& p, std::size_t n_pairs, std::uint64_t seed);

/// Random symmetric matrix with eigenvalues spread uniformly on [eig_min, eig_max].
Matrix random_spd(Eigen::Index dim, std::uint64_t seed, double eig_min, double eig_max);

std::vector<std::string> registry_names();
ProblemInstance make_registered(const std::string& name);
ProblemInstance instance_from_descriptor(const nlohmann::json& d);

}  // namespace fbflow
