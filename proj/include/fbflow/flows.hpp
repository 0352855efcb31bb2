#pragma once

#include "fbflow/operators.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fbflow {

using ScalarFn = std::function<double(double)>;

/// Time-varying relaxation lambda(t), damping gamma(t) and (second-order
/// gradient system only) alpha(t), with declared bounds and monotonicity flags.
/// The flags are trusted inputs; check_schedule re-verifies them on a grid.
struct Schedule {
    ScalarFn lambda;
    ScalarFn gamma;
    ScalarFn alpha;
    double lambda_lower = 0.0;
    double lambda_upper = 0.0;
    bool gamma_nonincreasing = false;
    bool gamma_over_lambda_nonincreasing = false;

    static Schedule constant(double lambda, std::optional<double> gamma = std::nullopt,
                             std::optional<double> alpha = std::nullopt);
};

struct GridOptions {
    double t_end = 100.0;
    std::size_t points = 2000;
    double slack = 1e-9;

    std::vector<double> times() const;
};

/// Central difference of f at t (one-sided at t = 0).
double time_derivative(const ScalarFn& f, double t);

struct ScheduleCheck {
    bool bounds_ok = true;
    bool gamma_flag_ok = true;
    bool ratio_flag_ok = true;
    std::vector<std::string> failures;

    bool ok() const { return bounds_ok && gamma_flag_ok && ratio_flag_ok; }
};

/// Checks 0 < lambda_lower <= lambda(t) <= lambda_upper and every declared
/// monotonicity flag on the grid.
ScheduleCheck check_schedule(const Schedule& s, const GridOptions& grid = {});

enum class FlowOrder { First = 1, Second = 2 };

/// Right-hand side of a first-order (x' = F(t, x)) or second-order
/// (x'' = F(t, x, v)) flow. Immutable after construction.
class FlowRHS {
public:
    using FirstFn = std::function<Vector(double, const Vector&)>;
    using SecondFn = std::function<Vector(double, const Vector&, const Vector&)>;

    FlowRHS(FirstFn f, std::string name, double eta = 0.0);
    FlowRHS(SecondFn f, std::string name, double eta = 0.0);

    FlowOrder order() const { return order_; }
    const std::string& name() const { return name_; }
    double eta() const { return eta_; }

    /// x' for first-order flows.
    Vector velocity(double t, const Vector& x) const;
    /// x'' for second-order flows.
    Vector acceleration(double t, const Vector& x, const Vector& v) const;

private:
    FlowOrder order_;
    FirstFn first_;
    SecondFn second_;
    std::string name_;
    double eta_;
};

/// x' = lambda(t) [J_{eta A}(x - eta B x) - x]
FlowRHS fb1_rhs(const ResolventOracle& a, const MonotoneMap& b, double eta, const Schedule& sched);

/// x'' = -gamma(t) v - lambda(t) [x - J_{eta A}(x - eta B x)]
FlowRHS fb2_rhs(const ResolventOracle& a, const MonotoneMap& b, double eta, const Schedule& sched);

/// x' = -lambda(t) grad g(x)
FlowRHS grad1_rhs(const FunctionOracle& g, const Schedule& sched);

/// x'' = -gamma(t) v - lambda(t) grad g(x)
FlowRHS grad2_rhs(const FunctionOracle& g, const Schedule& sched);

/// x' = lambda(t) [prox_{eta f}(x - eta grad g(x)) - x], built from (f, g) directly.
FlowRHS prox_gradient_rhs(const FunctionOracle& f, const FunctionOracle& g, double eta,
                          const Schedule& sched);

}  // namespace fbflow
