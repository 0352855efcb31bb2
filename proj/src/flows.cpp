#include "fbflow/flows.hpp"

#include <algorithm>
#include <cmath>

namespace fbflow {
namespace {

void require_eta(double eta) {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw ParameterError("flow step must satisfy eta > 0");
}

void require_lambda(const Schedule& s) {
    if (!s.lambda) throw ParameterError("schedule is missing lambda(t)");
}

void require_gamma(const Schedule& s) {
    if (!s.gamma) throw ParameterError("schedule is missing gamma(t)");
}

}  // namespace

Schedule Schedule::constant(double lambda, std::optional<double> gamma, std::optional<double> alpha) {
    Schedule s;
    s.lambda = [lambda](double) { return lambda; };
    s.lambda_lower = lambda;
    s.lambda_upper = lambda;
    if (gamma) {
        const double g = *gamma;
        s.gamma = [g](double) { return g; };
        s.gamma_nonincreasing = true;
        s.gamma_over_lambda_nonincreasing = true;
    }
    if (alpha) {
        const double a = *alpha;
        s.alpha = [a](double) { return a; };
    }
    return s;
}

std::vector<double> GridOptions::times() const {
    const std::size_t n = std::max<std::size_t>(points, 2);
    std::vector<double> ts(n);
    for (std::size_t i = 0; i < n; ++i) {
        ts[i] = t_end * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return ts;
}

double time_derivative(const ScalarFn& f, double t) {
    const double h = 1e-4 * std::max(1.0, std::abs(t));
    if (t - h < 0.0) {
        return (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2.0 * h)) / (2.0 * h);
    }
    return (f(t + h) - f(t - h)) / (2.0 * h);
}

ScheduleCheck check_schedule(const Schedule& s, const GridOptions& grid) {
    require_lambda(s);
    ScheduleCheck out;
    if (!(s.lambda_lower > 0.0) || s.lambda_lower > s.lambda_upper) {
        out.bounds_ok = false;
        out.failures.emplace_back("0 < λ̲ ≤ λ̄");
    }
    for (double t : grid.times()) {
        const double lam = s.lambda(t);
        if (out.bounds_ok && (lam < s.lambda_lower - grid.slack || lam > s.lambda_upper + grid.slack)) {
            out.bounds_ok = false;
            out.failures.emplace_back("λ̲ ≤ λ(t) ≤ λ̄");
        }
        if (s.gamma_nonincreasing && s.gamma && out.gamma_flag_ok &&
            time_derivative(s.gamma, t) > grid.slack) {
            out.gamma_flag_ok = false;
            out.failures.emplace_back("γ̇(t) ≤ 0");
        }
        if (s.gamma_over_lambda_nonincreasing && s.gamma && out.ratio_flag_ok) {
            const ScalarFn ratio = [&s](double tt) { return s.gamma(tt) / s.lambda(tt); };
            if (time_derivative(ratio, t) > grid.slack) {
                out.ratio_flag_ok = false;
                out.failures.emplace_back("d/dt(γ(t)/λ(t)) ≤ 0");
            }
        }
    }
    return out;
}

FlowRHS::FlowRHS(FirstFn f, std::string name, double eta)
    : order_(FlowOrder::First), first_(std::move(f)), name_(std::move(name)), eta_(eta) {}

FlowRHS::FlowRHS(SecondFn f, std::string name, double eta)
    : order_(FlowOrder::Second), second_(std::move(f)), name_(std::move(name)), eta_(eta) {}

Vector FlowRHS::velocity(double t, const Vector& x) const {
    if (order_ != FlowOrder::First) throw ParameterError("velocity() called on a second-order flow");
    return first_(t, x);
}

Vector FlowRHS::acceleration(double t, const Vector& x, const Vector& v) const {
    if (order_ != FlowOrder::Second) throw ParameterError("acceleration() called on a first-order flow");
    return second_(t, x, v);
}

FlowRHS fb1_rhs(const ResolventOracle& a, const MonotoneMap& b, double eta, const Schedule& sched) {
    require_eta(eta);
    require_lambda(sched);
    FlowRHS::FirstFn f = [a, b, eta, lambda = sched.lambda](double t, const Vector& x) {
        return Vector(lambda(t) * (a.resolve(eta, x - eta * b(x)) - x));
    };
    return FlowRHS(std::move(f), "fb1", eta);
}

FlowRHS fb2_rhs(const ResolventOracle& a, const MonotoneMap& b, double eta, const Schedule& sched) {
    require_eta(eta);
    require_lambda(sched);
    require_gamma(sched);
    FlowRHS::SecondFn f = [a, b, eta, lambda = sched.lambda, gamma = sched.gamma](
                              double t, const Vector& x, const Vector& v) {
        return Vector(-gamma(t) * v - lambda(t) * (x - a.resolve(eta, x - eta * b(x))));
    };
    return FlowRHS(std::move(f), "fb2", eta);
}

FlowRHS grad1_rhs(const FunctionOracle& g, const Schedule& sched) {
    if (!g.has_gradient()) throw ParameterError("grad1 requires g with a gradient");
    require_lambda(sched);
    FlowRHS::FirstFn f = [grad = g.gradient, lambda = sched.lambda](double t, const Vector& x) {
        return Vector(-lambda(t) * grad(x));
    };
    return FlowRHS(std::move(f), "grad1");
}

FlowRHS grad2_rhs(const FunctionOracle& g, const Schedule& sched) {
    if (!g.has_gradient()) throw ParameterError("grad2 requires g with a gradient");
    require_lambda(sched);
    require_gamma(sched);
    FlowRHS::SecondFn f = [grad = g.gradient, lambda = sched.lambda, gamma = sched.gamma](
                              double t, const Vector& x, const Vector& v) {
        return Vector(-gamma(t) * v - lambda(t) * grad(x));
    };
    return FlowRHS(std::move(f), "grad2");
}

FlowRHS prox_gradient_rhs(const FunctionOracle& f, const FunctionOracle& g, double eta,
                          const Schedule& sched) {
    require_eta(eta);
    require_lambda(sched);
    if (!f.has_prox()) throw ParameterError("prox-gradient flow requires f with a prox");
    if (!g.has_gradient()) throw ParameterError("prox-gradient flow requires g with a gradient");
    FlowRHS::FirstFn rhs = [prox = f.prox, grad = g.gradient, eta, lambda = sched.lambda](
                               double t, const Vector& x) {
        return Vector(lambda(t) * (prox(eta, x - eta * grad(x)) - x));
    };
    return FlowRHS(std::move(rhs), "prox_gradient1", eta);
}

}  // namespace fbflow
