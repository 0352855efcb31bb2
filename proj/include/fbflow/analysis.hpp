#pragma once

#include "fbflow/certificates.hpp"
#include "fbflow/metrics.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fbflow {

/// Least-squares slope of -log y against t over the last `tail_fraction` of
/// the samples. Samples with y <= 1e-300 are skipped; fewer than 10 usable
/// samples is an error.
double fit_rate(std::span<const double> t, std::span<const double> y, double tail_fraction);

enum class MetricKind { Distance, Gap };

const char* to_string(MetricKind m);

struct InitialMetrics {
    double h0 = 0.0;               // |x(0) - x*|^2
    std::optional<double> gap0;    // F(x(0)) - F(x*)
    std::optional<double> m_raw;   // lemma_M(...).raw for the second-order results
};

/// Closed-form upper bound on |x(t) - x*|^2 or on the value gap.
struct Envelope {
    Theorem theorem = Theorem::FB1;
    MetricKind metric = MetricKind::Distance;
    double initial = 0.0;
    /// Exponent of the single-exponential bounds (FB1, GRAD1).
    double rate = 0.0;
    /// Lemma-form bounds (FB2, GRAD2).
    double gamma_lower = 0.0;
    double m = 0.0;
    LemmaCase lemma_case = LemmaCase::II;

    double operator()(double t) const;
    /// Theoretical exponent of the slowest decaying term.
    double decay_exponent() const;
    /// Same function as a gnuplot expression in the variable x.
    std::string gnuplot_expression() const;
};

/// FB2 uses M = 2 M_raw (the lemma works with h = |x - x*|^2 / 2). The lemma
/// form needs M > 0, so a nonpositive M_raw is replaced by kMinM.
Envelope build_envelope(const RateCertificate& cert, const InitialMetrics& init);

struct RateReport {
    MetricKind metric = MetricKind::Distance;
    std::optional<double> fitted_rate;
    double theoretical_rate = 0.0;
    double max_ratio = 0.0;
    double max_relative_violation = 0.0;
    std::size_t violations = 0;
    std::size_t samples = 0;
    double tol_abs = 0.0;
    double tol_rel = 0.0;
    bool rate_ok = true;
    bool pass = false;
    std::string note;
};

inline constexpr double kRateTolerance = 0.05;

/// metric(t) <= envelope(t) (1 + tol_rel) + tol_abs at every sample, plus the
/// fitted decay rate r_hat >= r - 0.05 when a rate can be fitted. The fit only
/// uses samples before the metric first drops below `fit_floor`.
RateReport verify_envelope(const MetricSeries& metrics, MetricKind which, const Envelope& env, double tol_abs,
                           double tol_rel, double tail_fraction = 0.5, double fit_floor = 0.0);

struct ChainCheck {
    std::string name;
    std::size_t violations = 0;
    double worst_excess = 0.0;
};

struct ChainReport {
    std::vector<ChainCheck> checks;
    std::size_t samples = 0;
    bool pass = false;
};

/// For a smooth strongly convex g with f = 0, checks at every sample
///   0 <= (rho/2)|x - x*|^2 <= gap <= |x - x*|^2 / (2 beta),  rho |x - x*| <= |grad g(x)|,
/// and, given the value envelope, gap <= env(t) <= |x0 - x*|^2 / (2 beta) exp(-r t).
/// Slack is 1e-8 (1 + |values|).
ChainReport verify_value_chain(const MetricSeries& metrics, double rho, double beta,
                               const std::optional<Envelope>& value_envelope = std::nullopt);

/// h and h' along the trajectory for the lemma's differential inequality.
struct LyapunovTarget {
    std::function<std::pair<double, double>(const Vector& x, const Vector& v)> eval;
    std::string description;
};

/// h = |x - x*|^2 / 2, h' = <x - x*, v>
LyapunovTarget half_distance_target(Vector x_star);
/// h = g(x) - g*, h' = <grad g(x), v>
LyapunovTarget value_gap_target(const FunctionOracle& g, double g_star);

struct LyapunovReport {
    std::vector<double> t;
    std::vector<double> values;
    double max_increase_rate = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

inline constexpr double kLyapunovDrift = 1e-6;

/// L(t) = e^t (h' + (gamma(t) - 1) h + b2(t) u) with u = |x'|^2 must be
/// nonincreasing up to a drift of 1e-6 (1 + |L(0)|) per unit time.
LyapunovReport verify_lyapunov(const Trajectory& traj, const LemmaCoefficients& coeffs,
                               const LyapunovTarget& target);

}  // namespace fbflow
