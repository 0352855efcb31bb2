#pragma once

#include "fbflow/integrate.hpp"
#include "fbflow/problems.hpp"

#include <iosfwd>
#include <vector>

namespace fbflow {

/// Per-sample quantities bounded by the convergence results. `h` is the
/// un-halved squared distance |x(t) - x*|^2.
struct MetricSeries {
    std::vector<double> t;
    std::vector<double> h;
    std::vector<double> u;
    /// F(x(t)) - F(x*), empty unless the instance has a value oracle.
    std::vector<double> gap;
    /// |grad g(x(t))|, empty unless the instance has a smooth part.
    std::vector<double> gradnorm;

    std::size_t size() const { return t.size(); }
    bool has_gap() const { return !gap.empty(); }
    bool has_gradnorm() const { return !gradnorm.empty(); }
};

MetricSeries record_metrics(const Trajectory& traj, const ProblemInstance& problem);

/// Header `t,x_0..x_{d-1}[,v_0..v_{d-1}],h,u,gap,gradnorm`; 17 significant
/// digits; missing metrics are written as `nan`.
void write_csv(std::ostream& os, const Trajectory& traj, const MetricSeries& metrics);

}  // namespace fbflow
