#pragma once

#include "fbflow/flows.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbflow {

/// The four convergence results a certificate can attest.
enum class Theorem { FB1, GRAD1, FB2, GRAD2 };

const char* to_string(Theorem t);
Theorem theorem_from_string(const std::string& s);

enum class Relation { Less, LessEqual };

/// One named hypothesis "lhs < rhs" or "lhs <= rhs". For conditions checked on
/// a time grid, lhs/rhs are taken at the worst grid point `at_time` and
/// `slack` is the grid tolerance.
struct Inequality {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    Relation relation = Relation::LessEqual;
    double slack = 0.0;
    std::optional<double> at_time;
    bool holds = false;
};

inline constexpr double kRounding = 1e-12;

/// Re-evaluates the relation from the stored numbers. Non-strict relations
/// allow kRounding relative rounding on top of the stored slack.
bool evaluate(const Inequality& q);

struct RateCertificate {
    Theorem theorem = Theorem::FB1;
    std::map<std::string, double> inputs;
    std::map<std::string, double> constants;
    std::vector<Inequality> inequalities;
    /// r in the final exp(-r t) envelope.
    double decay_exponent = 0.0;
    /// gamma_lower - 1 for the second-order results.
    std::optional<double> transient_exponent;
    std::optional<double> gamma_lower;

    double input(const std::string& key) const;
    double constant(const std::string& key) const;
};

/// Thrown when a hypothesis set fails; lists every violated inequality.
class CertificationError : public std::runtime_error {
public:
    CertificationError(Theorem theorem, std::vector<Inequality> failures);

    Theorem theorem() const { return theorem_; }
    const std::vector<Inequality>& failures() const { return failures_; }
    bool names(const std::string& inequality) const;

private:
    Theorem theorem_;
    std::vector<Inequality> failures_;
};

/// First-order forward-backward flow. Returns C = (2 rho lambda_lower - alpha/beta^2) / (2 rho + 1/eta).
RateCertificate certify_fb1(double rho, double beta, double lambda_lower, double lambda_upper,
                            double alpha, double eta);

/// First-order gradient flow; the value gap decays like exp(-alpha t).
RateCertificate certify_grad1(double rho, double beta, double lambda_lower, double alpha);

/// Scalar algebra shared by the second-order forward-backward results.
struct Fb2Algebra {
    double s = 0.0;          // 1/beta + 1/(4 rho beta^2 alpha)
    double inv_eta = 0.0;    // s/delta - rho
    double k = 0.0;          // 2 rho (1 - alpha) / (rho + s/delta)
    double theta_per_lambda = 0.0;  // theta(t) = theta_per_lambda * lambda(t)
};

Fb2Algebra fb2_algebra(double rho, double beta, double alpha, double delta);

RateCertificate certify_fb2(double rho, double beta, double alpha, double delta, const Schedule& sched,
                            const GridOptions& grid = {});

/// `alpha_bar` is the lower bound on alpha(t); sched.alpha carries alpha(t).
RateCertificate certify_grad2(double rho, double beta, double alpha_bar, const Schedule& sched,
                              const GridOptions& grid = {});

/// Recomputes derived constants and scalar inequalities from the stored
/// inputs and re-evaluates every stored inequality.
bool revalidate(const RateCertificate& cert);

struct ConstantParameters {
    double lambda = 0.0;
    double gamma = 0.0;
    double eta = 0.0;
    /// Only set for the second-order gradient system.
    std::optional<double> alpha;
};

/// Smallest constant lambda meeting theta > 2 and the quadratic bound on
/// theta, inflated by 1%, with gamma at the midpoint of its window.
ConstantParameters suggest_constants_fb2(double rho, double beta, double alpha, double delta);

/// alpha = 2/(beta rho)^2 - 1 if beta rho < 1, else 1 + epsilon; lambda at the
/// lower end of its window and gamma at the midpoint of its window.
ConstantParameters suggest_constants_grad2(double rho, double beta, double epsilon = 0.5);

enum class LemmaCase { I, II, III };

const char* to_string(LemmaCase c);
LemmaCase lemma_case_for(double gamma_lower);

/// Coefficients of h'' + gamma h' + b1 h + b2 u' + b3 u <= 0.
struct LemmaCoefficients {
    ScalarFn gamma;
    ScalarFn b1;
    ScalarFn b2;
    ScalarFn b3;
    double gamma_lower = 0.0;
    LemmaCase case_tag = LemmaCase::II;
};

LemmaCoefficients lemma_coefficients_fb2(double rho, double beta, double alpha, double delta,
                                         const Schedule& sched);
LemmaCoefficients lemma_coefficients_grad2(double rho, double beta, double alpha_bar,
                                           const Schedule& sched);

/// gamma >= gamma_lower > 1, b2 >= 0, gamma + gamma' <= b1 + 1, b2 + b2' <= b3 on the grid.
std::vector<Inequality> check_lemma_hypotheses(const LemmaCoefficients& c, const GridOptions& grid = {});

struct LemmaM {
    double raw = 0.0;
    double clamped = 0.0;
};

inline constexpr double kMinM = 1e-12;

/// Value at t = 0 of h' + (gamma - 1) h + b2 u, the quantity whose exp(t)
/// multiple is nonincreasing.
LemmaM lemma_M(double h0, double hdot0, double gamma0, double b2_0, double u0);

/// Closed-form bound on h(t) for the given case.
double lemma_bound(LemmaCase c, double gamma_lower, double h0, double m, double t);

}  // namespace fbflow
