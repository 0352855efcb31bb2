#include "fbflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace fbflow {
namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double chain_slack(double a, double b) { return 1e-8 * (1.0 + std::abs(a) + std::abs(b)); }

void tally(ChainCheck& c, double lhs, double rhs) {
    const double excess = lhs - rhs;
    if (excess > chain_slack(lhs, rhs)) ++c.violations;
    c.worst_excess = std::max(c.worst_excess, excess);
}

}  // namespace

double fit_rate(std::span<const double> t, std::span<const double> y, double tail_fraction) {
    if (t.size() != y.size()) throw ParameterError("fit_rate: t and y differ in length");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw ParameterError("tail_fraction in (0,1] required");
    const std::size_t n = t.size();
    const auto take = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n)));
    const std::size_t start = n - std::min(n, take);

    std::vector<double> ts;
    std::vector<double> ls;
    for (std::size_t i = start; i < n; ++i) {
        if (y[i] > 1e-300 && std::isfinite(y[i])) {
            ts.push_back(t[i]);
            ls.push_back(-std::log(y[i]));
        }
    }
    if (ts.size() < 10) {
        throw ParameterError("fit_rate: fewer than 10 positive samples in the tail window (shorten t_end)");
    }
    const double m = static_cast<double>(ts.size());
    double tbar = 0.0, lbar = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        tbar += ts[i];
        lbar += ls[i];
    }
    tbar /= m;
    lbar /= m;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sxy += (ts[i] - tbar) * (ls[i] - lbar);
        sxx += (ts[i] - tbar) * (ts[i] - tbar);
    }
    if (sxx == 0.0) throw ParameterError("fit_rate: tail window has no time spread");
    return sxy / sxx;
}

const char* to_string(MetricKind m) { return m == MetricKind::Distance ? "h" : "gap"; }

double Envelope::operator()(double t) const {
    if (theorem == Theorem::FB1 || theorem == Theorem::GRAD1) return initial * std::exp(-rate * t);
    return lemma_bound(lemma_case, gamma_lower, initial, m, t);
}

double Envelope::decay_exponent() const {
    if (theorem == Theorem::FB1 || theorem == Theorem::GRAD1) return rate;
    return lemma_case == LemmaCase::I ? gamma_lower - 1.0 : 1.0;
}

std::string Envelope::gnuplot_expression() const {
    if (theorem == Theorem::FB1 || theorem == Theorem::GRAD1) {
        return fmt17(initial) + "*exp(-" + fmt17(rate) + "*x)";
    }
    const std::string g = fmt17(gamma_lower);
    switch (lemma_case) {
        case LemmaCase::I:
            return "(" + fmt17(initial) + "+" + fmt17(m) + "/(2-" + g + "))*exp(-(" + g + "-1)*x)";
        case LemmaCase::II:
            return fmt17(initial) + "*exp(-(" + g + "-1)*x)+" + fmt17(m) + "/(" + g + "-2)*exp(-x)";
        case LemmaCase::III:
            return "(" + fmt17(initial) + "+" + fmt17(m) + "*x)*exp(-x)";
    }
    return "0";
}

Envelope build_envelope(const RateCertificate& cert, const InitialMetrics& init) {
    Envelope env;
    env.theorem = cert.theorem;
    switch (cert.theorem) {
        case Theorem::FB1:
            env.metric = MetricKind::Distance;
            env.initial = init.h0;
            env.rate = cert.constant("C");
            break;
        case Theorem::GRAD1:
            if (!init.gap0) throw ParameterError("GRAD1 envelope needs the initial value gap");
            env.metric = MetricKind::Gap;
            env.initial = *init.gap0;
            env.rate = cert.input("alpha");
            break;
        case Theorem::FB2:
        case Theorem::GRAD2: {
            if (!init.m_raw) throw ParameterError("second-order envelope needs M from lemma_M");
            if (!cert.gamma_lower) throw ParameterError("certificate has no γ̲");
            const double m = std::max(*init.m_raw, kMinM);
            env.gamma_lower = *cert.gamma_lower;
            env.lemma_case = lemma_case_for(env.gamma_lower);
            if (cert.theorem == Theorem::FB2) {
                env.metric = MetricKind::Distance;
                env.initial = init.h0;
                env.m = 2.0 * m;
            } else {
                if (!init.gap0) throw ParameterError("GRAD2 envelope needs the initial value gap");
                env.metric = MetricKind::Gap;
                env.initial = *init.gap0;
                env.m = m;
            }
            break;
        }
    }
    if (!(env.initial >= 0.0)) throw ParameterError("initial metric must be nonnegative");
    return env;
}

RateReport verify_envelope(const MetricSeries& metrics, MetricKind which, const Envelope& env, double tol_abs,
                           double tol_rel, double tail_fraction, double fit_floor) {
    const std::vector<double>& y = which == MetricKind::Distance ? metrics.h : metrics.gap;
    if (y.size() != metrics.t.size()) throw ParameterError("metric series lacks the requested metric");
    RateReport rep;
    rep.metric = which;
    rep.samples = y.size();
    rep.tol_abs = tol_abs;
    rep.tol_rel = tol_rel;
    rep.theoretical_rate = env.decay_exponent();
    rep.max_relative_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double bound = env(metrics.t[i]);
        if (y[i] > bound * (1.0 + tol_rel) + tol_abs) ++rep.violations;
        if (bound > 0.0) {
            rep.max_ratio = std::max(rep.max_ratio, y[i] / bound);
            rep.max_relative_violation = std::max(rep.max_relative_violation, (y[i] - bound) / bound);
        }
    }
    std::size_t usable = 0;
    while (usable < y.size() && y[usable] >= fit_floor) ++usable;
    try {
        rep.fitted_rate = fit_rate(std::span(metrics.t).first(usable), std::span(y).first(usable), tail_fraction);
        rep.rate_ok = *rep.fitted_rate >= rep.theoretical_rate - kRateTolerance;
    } catch (const ParameterError& e) {
        rep.note = std::string("rate comparison skipped: ") + e.what();
        rep.rate_ok = true;
    }
    rep.pass = rep.violations == 0 && rep.rate_ok;
    return rep;
}

ChainReport verify_value_chain(const MetricSeries& metrics, double rho, double beta,
                               const std::optional<Envelope>& value_envelope) {
    if (!metrics.has_gap() || !metrics.has_gradnorm()) {
        throw ParameterError("value chain needs gap and gradnorm metrics");
    }
    ChainReport rep;
    rep.samples = metrics.size();
    ChainCheck nonneg{"0 ≤ (ρ/2)‖x−x*‖²"};
    ChainCheck lower{"(ρ/2)‖x−x*‖² ≤ g(x)−g(x*)"};
    ChainCheck descent{"g(x)−g(x*) ≤ ‖x−x*‖²/(2β)"};
    ChainCheck gradient{"ρ‖x−x*‖ ≤ ‖∇g(x)‖"};
    ChainCheck env_upper{"g(x)−g(x*) ≤ envelope(t)"};
    ChainCheck env_tail{"envelope(t) ≤ ‖x0−x*‖²/(2β)·exp(−rt)"};
    const double h0 = metrics.h.empty() ? 0.0 : metrics.h.front();
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        const double half_rho_h = 0.5 * rho * metrics.h[i];
        tally(nonneg, 0.0, half_rho_h);
        tally(lower, half_rho_h, metrics.gap[i]);
        tally(descent, metrics.gap[i], metrics.h[i] / (2.0 * beta));
        tally(gradient, rho * std::sqrt(metrics.h[i]), metrics.gradnorm[i]);
        if (value_envelope) {
            const double e = (*value_envelope)(metrics.t[i]);
            tally(env_upper, metrics.gap[i], e);
            const double r = value_envelope->decay_exponent();
            tally(env_tail, e, h0 / (2.0 * beta) * std::exp(-r * metrics.t[i]));
        }
    }
    rep.checks = {nonneg, lower, descent, gradient};
    if (value_envelope) {
        rep.checks.push_back(env_upper);
        rep.checks.push_back(env_tail);
    }
    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(),
                           [](const ChainCheck& c) { return c.violations == 0; });
    return rep;
}

LyapunovTarget half_distance_target(Vector x_star) {
    LyapunovTarget t;
    t.description = "h = |x - x*|^2 / 2";
    t.eval = [xs = std::move(x_star)](const Vector& x, const Vector& v) {
        const Vector e = x - xs;
        return std::make_pair(0.5 * e.squaredNorm(), e.dot(v));
    };
    return t;
}

LyapunovTarget value_gap_target(const FunctionOracle& g, double g_star) {
    if (!g.has_gradient()) throw ParameterError("value gap target needs a gradient");
    LyapunovTarget t;
    t.description = "h = g(x) - g*";
    t.eval = [value = g.value, grad = g.gradient, g_star](const Vector& x, const Vector& v) {
        return std::make_pair(value(x) - g_star, grad(x).dot(v));
    };
    return t;
}

LyapunovReport verify_lyapunov(const Trajectory& traj, const LemmaCoefficients& coeffs,
                               const LyapunovTarget& target) {
    if (traj.order != FlowOrder::Second) throw ParameterError("Lyapunov check needs a second-order trajectory");
    LyapunovReport rep;
    rep.t = traj.t;
    rep.values.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double t = traj.t[i];
        const auto [h, hdot] = target.eval(traj.x[i], traj.xdot[i]);
        const double u = traj.xdot[i].squaredNorm();
        rep.values.push_back(std::exp(t) * (hdot + (coeffs.gamma(t) - 1.0) * h + coeffs.b2(t) * u));
    }
    rep.tolerance = kLyapunovDrift * (1.0 + (rep.values.empty() ? 0.0 : std::abs(rep.values.front())));
    rep.max_increase_rate = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < rep.values.size(); ++i) {
        const double dt = rep.t[i] - rep.t[i - 1];
        rep.max_increase_rate = std::max(rep.max_increase_rate, (rep.values[i] - rep.values[i - 1]) / dt);
    }
    if (rep.values.size() < 2) rep.max_increase_rate = 0.0;
    rep.pass = rep.max_increase_rate <= rep.tolerance;
    return rep;
}

}  // namespace fbflow
