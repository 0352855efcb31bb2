#include "fbflow/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fbflow {
namespace {

constexpr std::size_t kMaxSteps = 20'000'000;

/// The flow as an autonomous-in-form system y' = F(t, y) on the (x[, v]) state.
class StateSystem {
public:
    StateSystem(const FlowRHS& flow, Eigen::Index dim) : flow_(flow), dim_(dim) {}

    Vector operator()(double t, const Vector& y) {
        ++evals;
        if (flow_.order() == FlowOrder::First) return flow_.velocity(t, y);
        Vector dy(2 * dim_);
        dy.head(dim_) = y.tail(dim_);
        dy.tail(dim_) = flow_.acceleration(t, y.head(dim_), y.tail(dim_));
        return dy;
    }

    std::size_t evals = 0;

private:
    const FlowRHS& flow_;
    Eigen::Index dim_;
};

class Recorder {
public:
    Recorder(const FlowRHS& flow, Trajectory& traj, Eigen::Index dim) : flow_(flow), traj_(traj), dim_(dim) {}

    void push(double t, const Vector& y) {
        if (!traj_.t.empty() && !(t > traj_.t.back())) return;
        traj_.t.push_back(t);
        if (flow_.order() == FlowOrder::First) {
            traj_.x.push_back(y);
            traj_.xdot.push_back(flow_.velocity(t, y));
        } else {
            traj_.x.push_back(y.head(dim_));
            traj_.xdot.push_back(y.tail(dim_));
        }
    }

private:
    const FlowRHS& flow_;
    Trajectory& traj_;
    Eigen::Index dim_;
};

[[noreturn]] void abort_with(const std::string& what, double t, double h) {
    std::ostringstream os;
    os << "integration aborted: " << what << " at t=" << t << " (step h=" << h << ")";
    throw IntegrationError(os.str());
}

std::vector<double> even_grid(double t_end, std::size_t n) {
    n = std::max<std::size_t>(n, 2);
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = t_end * static_cast<double>(i) / static_cast<double>(n - 1);
    g.back() = t_end;
    return g;
}

void note_step(StepStats& s, double h) {
    if (s.accepted == 0) {
        s.min_step = s.max_step = h;
    } else {
        s.min_step = std::min(s.min_step, h);
        s.max_step = std::max(s.max_step, h);
    }
    ++s.accepted;
}

void run_rk4(StateSystem& sys, Recorder& rec, Vector y, double t_end, double h_nominal, std::size_t min_samples,
             StepStats& stats) {
    if (!(h_nominal > 0.0)) throw ParameterError("fixed step h > 0 required");
    const auto grid = even_grid(t_end, min_samples);
    std::size_t next = 1;
    double t = 0.0;
    Vector f0 = sys(t, y);
    rec.push(t, y);
    while (t < t_end) {
        if (stats.accepted >= kMaxSteps) abort_with("step budget exhausted", t, h_nominal);
        const double h = std::min(h_nominal, t_end - t);
        if (h < 1e-14 * t_end) break;
        const Vector k1 = f0;
        const Vector k2 = sys(t + 0.5 * h, y + 0.5 * h * k1);
        const Vector k3 = sys(t + 0.5 * h, y + 0.5 * h * k2);
        const Vector k4 = sys(t + h, y + h * k3);
        Vector y1 = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        const double t1 = (t_end - (t + h) < 1e-14 * t_end) ? t_end : t + h;
        if (!y1.allFinite()) abort_with("non-finite state", t1, h);
        const Vector f1 = sys(t1, y1);
        // Cubic Hermite interpolation for the evenly spaced samples.
        while (next < grid.size() && grid[next] < t1) {
            const double s = (grid[next] - t) / h;
            const double h10 = s * (1 - s) * (1 - s);
            const double h01 = s * s * (3 - 2 * s);
            const double h11 = s * s * (s - 1);
            rec.push(grid[next], y + h01 * (y1 - y) + h10 * h * f0 + h11 * h * f1);
            ++next;
        }
        note_step(stats, h);
        t = t1;
        y = std::move(y1);
        f0 = f1;
        rec.push(t, y);
    }
}

// Dormand-Prince 5(4) tableau with Hairer's continuous extension.
namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
}  // namespace dp

double scaled_norm(const Vector& e, const Vector& y0, const Vector& y1, double rtol, double atol) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        const double sk = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double r = e[i] / sk;
        sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(e.size()));
}

double initial_step(StateSystem& sys, const Vector& y0, const Vector& f0, double t_end, double rtol,
                    double atol) {
    const double d0 = scaled_norm(y0, y0, y0, rtol, atol);
    const double d1 = scaled_norm(f0, y0, y0, rtol, atol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end);
    const Vector y1 = y0 + h0 * f0;
    const Vector f1 = sys(h0, y1);
    const double d2 = scaled_norm(Vector(f1 - f0), y0, y0, rtol, atol) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    return std::min({100.0 * h0, h1, t_end});
}

void run_dopri5(StateSystem& sys, Recorder& rec, Vector y, double t_end, const Adaptive& ctl,
                std::size_t min_samples, StepStats& stats) {
    if (!(ctl.rel_tol > 0.0) || !(ctl.abs_tol > 0.0)) throw ParameterError("tolerances must be positive");
    using namespace dp;
    const double rtol = ctl.rel_tol;
    const double atol = ctl.abs_tol;
    const double safe = 0.9, beta = 0.04, expo1 = 0.2 - beta * 0.75;
    const double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
    const double h_min = 1e-14 * t_end;

    const auto grid = even_grid(t_end, min_samples);
    std::size_t next = 1;
    double t = 0.0;
    Vector k1 = sys(t, y);
    rec.push(t, y);
    double h = initial_step(sys, y, k1, t_end, rtol, atol);
    double facold = 1e-4;
    bool last_rejected = false;

    while (t < t_end) {
        if (stats.accepted + stats.rejected >= kMaxSteps) abort_with("step budget exhausted", t, h);
        if (h < h_min) abort_with("step size underflow", t, h);
        bool last = false;
        if (t + 1.01 * h >= t_end) {
            h = t_end - t;
            last = true;
        }
        const Vector k2 = sys(t + c2 * h, y + h * a21 * k1);
        const Vector k3 = sys(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const Vector k4 = sys(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = sys(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6 = sys(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Vector y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const double t1 = last ? t_end : t + h;
        if (!y1.allFinite()) abort_with("non-finite state", t1, h);
        const Vector k7 = sys(t1, y1);
        const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double en = scaled_norm(err, y, y1, rtol, atol);
        if (!std::isfinite(en)) abort_with("non-finite error estimate", t, h);

        const double fac11 = std::pow(en, expo1);
        if (en <= 1.0) {
            double fac = fac11 / std::pow(facold, beta);
            fac = std::max(facc2, std::min(facc1, fac / safe));
            double h_new = h / fac;
            facold = std::max(en, 1e-4);

            // Dense output on [t, t1] for the evenly spaced samples.
            if (next < grid.size() && grid[next] < t1) {
                const Vector ydiff = y1 - y;
                const Vector bspl = h * k1 - ydiff;
                const Vector r4 = ydiff - h * k7 - bspl;
                const Vector r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                while (next < grid.size() && grid[next] < t1) {
                    const double th = (grid[next] - t) / h;
                    const double th1 = 1.0 - th;
                    rec.push(grid[next], y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5))));
                    ++next;
                }
            }
            note_step(stats, h);
            t = t1;
            y = std::move(y1);
            k1 = k7;
            rec.push(t, y);
            if (last_rejected) h_new = std::min(h_new, h);
            last_rejected = false;
            h = std::min(h_new, t_end);
        } else {
            ++stats.rejected;
            h = h / std::min(facc1, fac11 / safe);
            last_rejected = true;
        }
    }
}

}  // namespace

Trajectory integrate(const FlowRHS& flow, const InitialState& init, double t_end, const StepControl& control,
                     std::size_t min_samples) {
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ParameterError("t_end > 0 required");
    if (init.x0.size() == 0 || !init.x0.allFinite()) throw ParameterError("x0 must be finite and nonempty");
    const Eigen::Index dim = init.x0.size();

    Vector y0;
    if (flow.order() == FlowOrder::First) {
        y0 = init.x0;
    } else {
        if (!init.v0) throw ParameterError("second-order flow requires v0");
        if (init.v0->size() != dim || !init.v0->allFinite()) throw ParameterError("v0 must match x0");
        y0.resize(2 * dim);
        y0.head(dim) = init.x0;
        y0.tail(dim) = *init.v0;
    }

    Trajectory traj;
    traj.order = flow.order();
    StateSystem sys(flow, dim);
    Recorder rec(flow, traj, dim);

    if (const auto* fixed = std::get_if<FixedStep>(&control)) {
        traj.solver = "rk4";
        traj.fixed_step = fixed->h;
        run_rk4(sys, rec, std::move(y0), t_end, fixed->h, min_samples, traj.stats);
    } else {
        const auto& ad = std::get<Adaptive>(control);
        traj.solver = "dopri5";
        traj.rel_tol = ad.rel_tol;
        traj.abs_tol = ad.abs_tol;
        run_dopri5(sys, rec, std::move(y0), t_end, ad, min_samples, traj.stats);
    }
    traj.stats.rhs_evals = sys.evals;
    // Sample 0 is the initial condition itself.
    traj.x.front() = init.x0;
    if (init.v0 && flow.order() == FlowOrder::Second) traj.xdot.front() = *init.v0;
    return traj;
}

}  // namespace fbflow
