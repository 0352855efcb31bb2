#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace fbflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an input violates a stated constraint. The message names the
/// constraint that failed.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Single-valued monotone map B that is (1/beta)-Lipschitz.
struct MonotoneMap {
    std::function<Vector(const Vector&)> eval;
    double beta = 1.0;
    std::string description;

    Vector operator()(const Vector& x) const { return eval(x); }
};

/// Resolvent J_{eta A} of a maximally monotone operator A.
///
/// `graph_distance(p, u)` returns the distance from u to the set A(p); it is
/// zero exactly when (p, u) lies on the graph of A. Catalog operators provide
/// it in closed form so resolvent outputs can be checked against the
/// inclusion (x - p) / eta in A(p).
struct ResolventOracle {
    std::function<Vector(double, const Vector&)> resolve_fn;
    std::function<double(const Vector&, const Vector&)> graph_distance;
    std::string description;

    Vector resolve(double eta, const Vector& x) const;
};

/// Convex function with whichever of gradient / prox it supports.
struct FunctionOracle {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::function<Vector(double, const Vector&)> prox;
    /// Distance from u to the subdifferential at p (see ResolventOracle).
    std::function<double(const Vector&, const Vector&)> subgradient_distance;
    double strong_convexity = 0.0;
    std::string description;

    bool has_gradient() const { return static_cast<bool>(gradient); }
    bool has_prox() const { return static_cast<bool>(prox); }

    /// J_{eta df} = prox_{eta f}.
    ResolventOracle subdifferential() const;
    /// The gradient viewed as a monotone map with Lipschitz constant 1/beta.
    MonotoneMap gradient_map(double beta) const;
};

namespace prox_spec {
struct Zero {};
struct L1Norm {
    double weight;
};
/// f(x) = (c/2) |x|^2
struct ScaledSqNorm {
    double c;
};
struct BoxIndicator {
    Vector lo;
    Vector hi;
};
/// f(x) = (rho/2) |x|^2 - <c, x>, so that df(x) = rho x - c.
struct TranslatedLinear {
    double rho;
    Vector c;
};
}  // namespace prox_spec

using ProxSpec = std::variant<prox_spec::Zero, prox_spec::L1Norm, prox_spec::ScaledSqNorm,
                              prox_spec::BoxIndicator, prox_spec::TranslatedLinear>;

/// Closed-form catalog of proximable functions.
FunctionOracle build_prox(const ProxSpec& spec);

/// Catalog operators A, exposed through their resolvents.
ResolventOracle zero_operator();
ResolventOracle translated_linear_operator(double rho, Vector c);
ResolventOracle box_normal_cone(Vector lo, Vector hi);

Vector resolvent(const ResolventOracle& a, double eta, const Vector& x);

MonotoneMap identity_map();
/// x -> M x, with beta = 1 / |M|_2.
MonotoneMap linear_map(const Matrix& m, std::string description = "linear");
/// (x, y) -> (y, -x): monotone, 1-Lipschitz, not cocoercive.
MonotoneMap rotation_map();

/// Produces one (input, output) point on the graph of the audited map from a
/// sampled base point z.
using GraphSampler = std::function<std::pair<Vector, Vector>(const Vector& z)>;

GraphSampler sample_map(const MonotoneMap& map);
/// Graph of A + B: p = J_{eta A}(z), a = (z - p) / eta in A(p), output a + B p.
GraphSampler sample_sum(const ResolventOracle& a, const MonotoneMap& b, double eta = 1.0);

struct AuditReport {
    std::size_t pairs = 0;
    std::size_t discarded = 0;
    double max_lipschitz_ratio = 0.0;
    double min_monotone_quotient = 0.0;
    double rho_claim = 0.0;
    std::optional<double> beta_claim;
    bool monotone_pass = false;
    bool lipschitz_pass = true;
    /// Pairs with <dOut, dIn> - beta |dOut|^2 < -1e-6 (only when beta is claimed).
    std::size_t cocoercivity_violations = 0;
    double cocoercivity_violation_fraction = 0.0;

    bool pass() const { return monotone_pass && lipschitz_pass; }
};

inline constexpr double kAuditSlack = 1e-9;
inline constexpr double kAuditRadius = 10.0;

/// Audits strong monotonicity (rho) and, when a beta claim is given, the
/// (1/beta)-Lipschitz bound on n_pairs random pairs drawn uniformly from the
/// ball of radius 10 in dimension `dim`.
AuditReport audit_map(const GraphSampler& sampler, std::size_t dim, double rho_claim,
                      std::optional<double> beta_claim, std::size_t n_pairs, std::uint64_t seed);

}  // namespace fbflow
