// Independent reference computations used by the tests. Nothing here calls
// into the library's closed forms.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

/// argmin_p f(p) + (p - x)^2 / (2 eta) on [lo, hi]: a 10^4-point grid scan
/// followed by golden-section refinement around the best grid point.
inline double brute_prox_1d(const std::function<double(double)>& f, double eta, double x, double lo,
                            double hi) {
    auto phi = [&](double p) { return f(p) + (p - x) * (p - x) / (2.0 * eta); };
    constexpr int n = 10000;
    const double dx = (hi - lo) / (n - 1);
    int best = 0;
    double best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double v = phi(lo + dx * i);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    double a = lo + dx * std::max(0, best - 1);
    double b = lo + dx * std::min(n - 1, best + 1);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = phi(c), fd = phi(d);
    for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = phi(d);
        }
    }
    const double mid = 0.5 * (a + b);
    // Boundary minimisers (box faces) are best represented by the grid end.
    const double edge = lo + dx * best;
    return phi(edge) < phi(mid) ? edge : mid;
}

/// Central finite-difference gradient.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-6) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        g[i] = (f(xp) - f(xm)) / (2.0 * h);
    }
    return g;
}

/// Solution of x'' + a x' + b x = 0 for distinct real roots.
inline double damped_closed_form(double a, double b, double x0, double v0, double t) {
    const double disc = std::sqrt(a * a - 4.0 * b);
    const double r1 = (-a + disc) / 2.0, r2 = (-a - disc) / 2.0;
    const double c2 = (v0 - r1 * x0) / (r2 - r1);
    const double c1 = x0 - c2;
    return c1 * std::exp(r1 * t) + c2 * std::exp(r2 * t);
}

}  // namespace oracle
