#include "fbflow/analysis.hpp"
#include "fbflow/integrate.hpp"
#include "fbflow/metrics.hpp"
#include "fbflow/problems.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fbflow;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double c : v) x[i++] = c;
    return x;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return t;
}

MetricSeries synthetic(const std::vector<double>& t, const std::function<double(double)>& h) {
    MetricSeries m;
    m.t = t;
    for (double s : t) {
        m.h.push_back(h(s));
        m.u.push_back(0.0);
    }
    return m;
}

}  // namespace

TEST_CASE("fit_rate examples") {
    const auto t = linspace(0.0, 20.0, 1000);
    std::vector<double> y, ones, mix;
    for (double s : t) y.push_back(std::exp(-0.5 * s));
    CHECK(fit_rate(t, y, 0.5) == doctest::Approx(0.5).epsilon(1e-6));
    ones.assign(t.size(), 1.0);
    CHECK(std::abs(fit_rate(t, ones, 0.5)) <= 1e-15);

    const auto t30 = linspace(0.0, 30.0, 3000);
    for (double s : t30) mix.push_back(2.0 * std::exp(-s) + std::exp(-3.0 * s));
    CHECK(std::abs(fit_rate(t30, mix, 0.25) - 1.0) <= 1e-3);
}

TEST_CASE("fit_rate is invariant under positive scaling") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto t = linspace(0.0, 10.0, 800);
    std::vector<double> y;
    for (double s : t) y.push_back(std::exp(-1.3 * s) * (1.0 + 0.1 * std::sin(7.0 * s)));
    const double base = fit_rate(t, y, 0.6);
    for (int k = 0; k < 20; ++k) {
        const double c = std::exp(20.0 * (u(rng) - 0.5));
        std::vector<double> z = y;
        for (double& v : z) v *= c;
        CHECK(std::abs(fit_rate(t, z, 0.6) - base) <= 1e-12);
    }
}

TEST_CASE("fit_rate rejects an underflowed tail") {
    const auto t = linspace(0.0, 10.0, 100);
    std::vector<double> y(t.size(), 1.0);
    for (std::size_t i = 50; i < y.size(); ++i) y[i] = 0.0;
    CHECK_THROWS_WITH_AS(fit_rate(t, y, 0.5), doctest::Contains("shorten t_end"), ParameterError);
    CHECK_THROWS_AS(fit_rate(t, y, 0.0), ParameterError);
    CHECK_THROWS_AS(fit_rate(t, y, 1.5), ParameterError);
}

TEST_CASE("build_envelope examples") {
    const RateCertificate fb1 = certify_fb1(1.0, 1.0, 1.0, 1.0, 0.5, 1.0);
    const Envelope e1 = build_envelope(fb1, {4.0, std::nullopt, std::nullopt});
    CHECK(e1(0.0) == 4.0);
    CHECK(e1(2.0) == doctest::Approx(4.0 * std::exp(-1.0)));

    const RateCertificate g1 = certify_grad1(1.0, 1.0, 1.0, 2.0);
    const Envelope e2 = build_envelope(g1, {1.0, 0.5, std::nullopt});
    CHECK(e2(1.0) == doctest::Approx(0.06767).epsilon(1e-4));
    CHECK(e2.metric == MetricKind::Gap);
    CHECK_THROWS_AS(build_envelope(g1, {1.0, std::nullopt, std::nullopt}), ParameterError);

    const RateCertificate fb2 = certify_fb2(1.0, 1.0, 0.5, 0.5, Schedule::constant(40.0, 11.0));
    const Envelope e3 = build_envelope(fb2, {1.0, std::nullopt, 3.0});
    const double gl = *fb2.gamma_lower;
    for (double t : {0.0, 0.3, 2.0, 9.0}) {
        CHECK(e3(t) == doctest::Approx(std::exp(-(gl - 1.0) * t) + 6.0 / (gl - 2.0) * std::exp(-t)));
    }
    CHECK(e3.m == 6.0);
    CHECK_THROWS_AS(build_envelope(fb2, {1.0, std::nullopt, std::nullopt}), ParameterError);

    // nonpositive M falls back to the smallest admissible constant
    const Envelope e4 = build_envelope(fb2, {1.0, std::nullopt, -2.0});
    CHECK(e4.m == 2.0 * kMinM);
}

TEST_CASE("envelope starts above the metric it bounds") {
    const RateCertificate fb2 = certify_fb2(1.0, 1.0, 0.5, 0.5, Schedule::constant(40.0, 11.0));
    const RateCertificate g2 = certify_grad2(1.0, 1.0, 1.5, Schedule::constant(1.5, 2.4, 1.5));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int i = 0; i < 100; ++i) {
        const double h0 = u(rng), gap0 = u(rng), m = u(rng) - 1.0;
        CHECK(build_envelope(fb2, {h0, std::nullopt, m})(0.0) > h0);
        CHECK(build_envelope(g2, {h0, gap0, m})(0.0) > gap0);
        CHECK(build_envelope(certify_fb1(1.0, 1.0, 1.0, 1.0, 0.5, 1.0), {h0, std::nullopt, std::nullopt})(0.0) >= h0);
    }
}

TEST_CASE("gnuplot expression evaluates like the envelope") {
    const RateCertificate fb2 = certify_fb2(1.0, 1.0, 0.5, 0.5, Schedule::constant(40.0, 11.0));
    const Envelope e = build_envelope(fb2, {1.0, std::nullopt, 3.0});
    const std::string expr = e.gnuplot_expression();
    CHECK(expr.find("exp(-x)") != std::string::npos);
    CHECK(expr.find("exp(-(") != std::string::npos);
}

TEST_CASE("verify_envelope examples") {
    const RateCertificate fb1 = certify_fb1(1.0, 1.0, 1.0, 1.0, 0.5, 1.0);
    const auto t = linspace(0.0, 20.0, 600);

    const MetricSeries at_star = synthetic(t, [](double) { return 0.0; });
    const RateReport r0 = verify_envelope(at_star, MetricKind::Distance,
                                          build_envelope(fb1, {0.0, std::nullopt, std::nullopt}), 1e-8, 1e-6);
    CHECK(r0.pass);
    CHECK(r0.violations == 0);

    const MetricSeries fast = synthetic(t, [](double s) { return std::exp(-2.0 * s); });
    const RateReport r1 = verify_envelope(fast, MetricKind::Distance,
                                          build_envelope(fb1, {1.0, std::nullopt, std::nullopt}), 1e-8, 1e-6);
    CHECK(r1.pass);
    CHECK(*r1.fitted_rate == doctest::Approx(2.0));

    const Envelope env = build_envelope(fb1, {1.0, std::nullopt, std::nullopt});
    const MetricSeries twice = synthetic(t, [&](double s) { return 2.0 * env(s); });
    const RateReport r2 = verify_envelope(twice, MetricKind::Distance, env, 0.0, 1e-6);
    CHECK_FALSE(r2.pass);
    CHECK(r2.violations == t.size());
    CHECK(r2.max_ratio == doctest::Approx(2.0));
}

TEST_CASE("verify_envelope flags a rate shortfall") {
    const RateCertificate fb1 = certify_fb1(1.0, 1.0, 1.0, 1.0, 0.5, 1.0);
    const auto t = linspace(0.0, 20.0, 600);
    // under the envelope everywhere but flattening out in the tail
    const MetricSeries slow = synthetic(t, [](double s) { return 0.5 * std::exp(-0.5 * s) + 1e-30 * std::exp(-0.3 * s); });
    const RateReport r = verify_envelope(slow, MetricKind::Distance,
                                         build_envelope(fb1, {1.0, std::nullopt, std::nullopt}), 0.0, 1e-6);
    CHECK(r.violations == 0);
    CHECK(r.rate_ok);

    const MetricSeries slower = synthetic(t, [](double s) { return 1e-5 * std::exp(-0.2 * s); });
    const RateReport r2 = verify_envelope(slower, MetricKind::Distance,
                                          build_envelope(fb1, {1.0, std::nullopt, std::nullopt}), 0.0, 1e-6);
    CHECK(r2.violations == 0);
    CHECK_FALSE(r2.rate_ok);
    CHECK_FALSE(r2.pass);
}

TEST_CASE("verify_envelope on a scalar decay under an FB1 certificate") {
    const ProblemInstance p = make_registered("isotropic-quadratic-1d");
    const FlowRHS f = fb1_rhs(p.a, p.b, 1.0, Schedule::constant(1.0));
    // x' = J(x - x) - x = -x for A = 0, B = I, eta = 1
    const Trajectory tr = integrate(f, {vec({1.0}), std::nullopt}, 20.0, Adaptive{});
    const MetricSeries m = record_metrics(tr, p);
    const RateCertificate cert = certify_fb1(1.0, 1.0, 1.0, 1.0, 0.5, 1.0);
    const RateReport r = verify_envelope(m, MetricKind::Distance, build_envelope(cert, {m.h[0], m.gap[0], std::nullopt}),
                                         1e-8, 1e-6, 0.5, 1e-20);
    CHECK(r.pass);
    CHECK(*r.fitted_rate == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("value chain examples") {
    const ProblemInstance p = make_registered("isotropic-quadratic-1d");
    const Trajectory tr = integrate(grad1_rhs(*p.g, Schedule::constant(1.0)), {vec({2.0}), std::nullopt}, 5.0, Adaptive{});
    const MetricSeries m = record_metrics(tr, p);
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(m.gap[i] == doctest::Approx(0.5 * m.h[i]));
    const ChainReport r = verify_value_chain(m, p.rho, p.beta);
    CHECK(r.pass);

    MetricSeries star;
    star.t = {0.0};
    star.h = {0.0};
    star.u = {0.0};
    star.gap = {0.0};
    star.gradnorm = {0.0};
    CHECK(verify_value_chain(star, 1.0, 1.0).pass);

    Matrix q = Matrix::Zero(2, 2);
    q.diagonal() << 1.0, 4.0;
    const ProblemInstance d = make_quadratic(q, Vector::Zero(2));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 3.0);
    MetricSeries rand;
    for (int i = 0; i < 200; ++i) {
        const Vector x = vec({n(rng), n(rng)});
        rand.t.push_back(i);
        rand.h.push_back(x.squaredNorm());
        rand.u.push_back(0.0);
        rand.gap.push_back(d.g->value(x));
        rand.gradnorm.push_back(d.g->gradient(x).norm());
    }
    const ChainReport rr = verify_value_chain(rand, 1.0, 0.25);
    CHECK(rr.pass);
    // strict: a tiny inflation of rho breaks the lower sandwich somewhere
    CHECK_FALSE(verify_value_chain(rand, 1.5, 0.25).pass);

    MetricSeries no_gap = m;
    no_gap.gap.clear();
    CHECK_THROWS_AS(verify_value_chain(no_gap, 1.0, 1.0), ParameterError);
}

TEST_CASE("Lyapunov checks") {
    const ProblemInstance p = make_registered("skew-rotation");
    const Schedule sched = Schedule::constant(40.0, 11.0);
    const LemmaCoefficients c = lemma_coefficients_fb2(1.0, 1.0, 0.5, 0.5, sched);

    Trajectory eq;
    eq.order = FlowOrder::Second;
    for (int i = 0; i < 50; ++i) {
        eq.t.push_back(0.1 * i);
        eq.x.push_back(p.x_star);
        eq.xdot.push_back(Vector::Zero(2));
    }
    const LyapunovReport r0 = verify_lyapunov(eq, c, half_distance_target(p.x_star));
    CHECK(r0.pass);
    for (double v : r0.values) CHECK(v == 0.0);

    const Trajectory tr = integrate(fb2_rhs(p.a, p.b, 0.5, sched), {vec({2.0, 2.0}), vec({0.0, 0.0})}, 10.0, Adaptive{});
    CHECK(verify_lyapunov(tr, c, half_distance_target(p.x_star)).pass);

    // negative control: an underdamped trajectory cannot keep e^t(h' + (gamma - 1) h) nonincreasing
    const Schedule weak = Schedule::constant(40.0, 0.2);
    const Trajectory osc = integrate(fb2_rhs(p.a, p.b, 0.5, weak), {vec({2.0, 2.0}), vec({0.0, 0.0})}, 10.0, Adaptive{});
    LemmaCoefficients bad = c;
    bad.gamma = [](double) { return 0.2; };
    bad.b1 = [](double) { return 0.0; };
    bool hyp_fail = false;
    for (const auto& q : check_lemma_hypotheses(bad)) hyp_fail = hyp_fail || !q.holds;
    CHECK(hyp_fail);
    CHECK_FALSE(verify_lyapunov(osc, bad, half_distance_target(p.x_star)).pass);

    const Trajectory first = integrate(fb1_rhs(p.a, p.b, 1.0, Schedule::constant(1.0)), {vec({1.0, 1.0}), std::nullopt},
                                       1.0, Adaptive{});
    CHECK_THROWS_AS(verify_lyapunov(first, c, half_distance_target(p.x_star)), ParameterError);
}

TEST_CASE("Lyapunov value-gap target on the gradient system") {
    const ProblemInstance p = make_registered("isotropic-quadratic-1d");
    const Schedule sched = Schedule::constant(1.5, 2.4, 1.5);
    const LemmaCoefficients c = lemma_coefficients_grad2(1.0, 1.0, 1.5, sched);
    const Trajectory tr = integrate(grad2_rhs(*p.g, sched), {vec({1.0}), vec({0.5})}, 12.0, Adaptive{});
    CHECK(verify_lyapunov(tr, c, value_gap_target(*p.g, p.g->value(p.x_star))).pass);
    CHECK_THROWS_AS(value_gap_target(build_prox(prox_spec::L1Norm{1.0}), 0.0), ParameterError);
}

TEST_CASE("lemma case (iii) envelope is accepted by verify_envelope") {
    // no certificate produces gamma_lower = 2; build the envelope by hand
    Envelope e;
    e.theorem = Theorem::FB2;
    e.metric = MetricKind::Distance;
    e.initial = 1.0;
    e.gamma_lower = 2.0;
    e.m = 2.0;
    e.lemma_case = LemmaCase::III;
    const auto t = linspace(0.0, 20.0, 500);
    const MetricSeries m = synthetic(t, [](double s) { return std::exp(-1.5 * s); });
    const RateReport r = verify_envelope(m, MetricKind::Distance, e, 0.0, 1e-6);
    CHECK(r.pass);
    CHECK(e.decay_exponent() == 1.0);
}
