#pragma once

#include "fbflow/flows.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fbflow {

struct FixedStep {
    double h = 1e-2;
};

/// Embedded Dormand-Prince 5(4) pair with PI step-size control.
struct Adaptive {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
};

using StepControl = std::variant<FixedStep, Adaptive>;

struct InitialState {
    Vector x0;
    /// Required for second-order flows.
    std::optional<Vector> v0;
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    double min_step = 0.0;
    double max_step = 0.0;
};

/// Sampled solution. `xdot` holds x'(t) at every sample: the integrated
/// velocity for second-order flows, the right-hand side re-evaluated at the
/// sample for first-order flows.
struct Trajectory {
    FlowOrder order = FlowOrder::First;
    std::vector<double> t;
    std::vector<Vector> x;
    std::vector<Vector> xdot;
    std::string solver;
    double rel_tol = 0.0;
    double abs_tol = 0.0;
    double fixed_step = 0.0;
    StepStats stats;

    std::size_t size() const { return t.size(); }
    Eigen::Index dim() const { return x.empty() ? 0 : x.front().size(); }
    bool has_velocity_state() const { return order == FlowOrder::Second; }
};

class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMinSamples = 500;

/// Integrates the flow on [0, t_end]. Samples are the accepted step endpoints
/// plus at least `min_samples` evenly spaced times (dense output).
Trajectory integrate(const FlowRHS& flow, const InitialState& init, double t_end, const StepControl& control,
                     std::size_t min_samples = kMinSamples);

}  // namespace fbflow
