#include "fbflow/metrics.hpp"

#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace fbflow {
namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

MetricSeries record_metrics(const Trajectory& traj, const ProblemInstance& problem) {
    if (problem.x_star.size() == 0) throw ParameterError("record_metrics requires a ground-truth x*");
    if (traj.size() > 0 && traj.dim() != problem.dim()) {
        throw ParameterError("trajectory dimension does not match the problem");
    }
    MetricSeries m;
    m.t = traj.t;
    m.h.reserve(traj.size());
    m.u.reserve(traj.size());
    std::optional<double> f_star = problem.objective(problem.x_star);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        m.h.push_back((traj.x[i] - problem.x_star).squaredNorm());
        m.u.push_back(traj.xdot[i].squaredNorm());
        if (f_star) m.gap.push_back(*problem.objective(traj.x[i]) - *f_star);
        if (problem.g) m.gradnorm.push_back(problem.g->gradient(traj.x[i]).norm());
    }
    return m;
}

void write_csv(std::ostream& os, const Trajectory& traj, const MetricSeries& metrics) {
    const Eigen::Index d = traj.dim();
    const bool with_v = traj.has_velocity_state();
    os << "t";
    for (Eigen::Index i = 0; i < d; ++i) os << ",x_" << i;
    if (with_v) {
        for (Eigen::Index i = 0; i < d; ++i) os << ",v_" << i;
    }
    os << ",h,u,gap,gradnorm\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << fmt17(traj.t[k]);
        for (Eigen::Index i = 0; i < d; ++i) os << ',' << fmt17(traj.x[k][i]);
        if (with_v) {
            for (Eigen::Index i = 0; i < d; ++i) os << ',' << fmt17(traj.xdot[k][i]);
        }
        os << ',' << fmt17(metrics.h[k]) << ',' << fmt17(metrics.u[k]) << ','
           << fmt17(metrics.has_gap() ? metrics.gap[k] : nan) << ','
           << fmt17(metrics.has_gradnorm() ? metrics.gradnorm[k] : nan) << '\n';
    }
}

}  // namespace fbflow
