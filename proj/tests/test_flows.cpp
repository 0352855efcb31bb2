#include "fbflow/flows.hpp"
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

FunctionOracle half_sq() { return build_prox(prox_spec::ScaledSqNorm{1.0}); }

}  // namespace

TEST_CASE("fb1 rhs examples") {
    const auto a = zero_operator();
    const auto b = identity_map();
    CHECK(fb1_rhs(a, b, 0.5, Schedule::constant(1.0)).velocity(0.0, vec({2.0}))[0] == doctest::Approx(-1.0));
    CHECK(fb1_rhs(a, b, 0.5, Schedule::constant(3.0)).velocity(0.0, vec({2.0}))[0] == doctest::Approx(-3.0));

    const ProblemInstance p = make_registered("skew-rotation");
    CHECK(fb1_rhs(p.a, p.b, 1.0, Schedule::constant(1.0)).velocity(0.0, p.x_star).norm() <= 1e-15);
}

TEST_CASE("fb2 rhs examples") {
    const ProblemInstance p = make_registered("skew-rotation");
    const auto f = fb2_rhs(p.a, p.b, 0.5, Schedule::constant(1.0, 2.0));
    CHECK(f.acceleration(0.0, p.x_star, Vector::Zero(2)).norm() <= 1e-15);
    const Vector acc = f.acceleration(0.0, p.x_star, vec({1.0, 0.0}));
    CHECK(acc[0] == doctest::Approx(-2.0));
    CHECK(std::abs(acc[1]) <= 1e-15);

    const auto g = fb2_rhs(zero_operator(), identity_map(), 0.5, Schedule::constant(1.0, 3.0));
    CHECK(g.acceleration(0.0, vec({2.0}), vec({0.5}))[0] == doctest::Approx(-2.5));
}

TEST_CASE("gradient rhs examples") {
    const auto g = half_sq();
    const Vector v1 = grad1_rhs(g, Schedule::constant(2.0)).velocity(0.0, vec({1.0, 1.0}));
    CHECK(v1[0] == doctest::Approx(-2.0));
    CHECK(v1[1] == doctest::Approx(-2.0));
    CHECK(grad1_rhs(g, Schedule::constant(1.0)).velocity(0.0, vec({0.0, 0.0})).norm() == 0.0);
    Schedule zero_lambda = Schedule::constant(1.0);
    zero_lambda.lambda = [](double) { return 0.0; };
    CHECK(grad1_rhs(g, zero_lambda).velocity(0.0, vec({4.0, -7.0})).norm() == 0.0);

    const auto f2 = grad2_rhs(g, Schedule::constant(1.5, 2.4));
    CHECK(f2.acceleration(0.0, vec({0.0}), vec({0.0}))[0] == 0.0);
    CHECK(f2.acceleration(0.0, vec({1.0}), vec({0.0}))[0] == doctest::Approx(-1.5));
    CHECK(f2.acceleration(0.0, vec({0.0}), vec({1.0}))[0] == doctest::Approx(-2.4));
}

TEST_CASE("missing schedule parts are rejected") {
    Schedule no_gamma = Schedule::constant(1.0);
    CHECK_THROWS_AS(fb2_rhs(zero_operator(), identity_map(), 1.0, no_gamma), ParameterError);
    CHECK_THROWS_AS(grad2_rhs(half_sq(), no_gamma), ParameterError);
    Schedule no_lambda;
    CHECK_THROWS_AS(fb1_rhs(zero_operator(), identity_map(), 1.0, no_lambda), ParameterError);
    CHECK_THROWS_AS(grad1_rhs(build_prox(prox_spec::L1Norm{1.0}), Schedule::constant(1.0)), ParameterError);
    CHECK_THROWS_AS(fb1_rhs(zero_operator(), identity_map(), 0.0, Schedule::constant(1.0)), ParameterError);
}

TEST_CASE("order mismatch is rejected") {
    const auto f1 = grad1_rhs(half_sq(), Schedule::constant(1.0));
    CHECK(f1.order() == FlowOrder::First);
    CHECK_THROWS(f1.acceleration(0.0, vec({1.0}), vec({1.0})));
    const auto f2 = grad2_rhs(half_sq(), Schedule::constant(1.0, 2.0));
    CHECK(f2.order() == FlowOrder::Second);
    CHECK_THROWS(f2.velocity(0.0, vec({1.0})));
}

TEST_CASE("every suite instance is a fixed point of its flows") {
    std::vector<double> grid;
    for (int i = 0; i <= 50; ++i) grid.push_back(0.4 * i);
    Schedule sched;
    sched.lambda = [](double t) { return 2.0 + std::exp(-t); };
    sched.gamma = [](double t) { return 3.0 + 1.0 / (1.0 + t); };
    sched.lambda_lower = 2.0;
    sched.lambda_upper = 3.0;
    for (const auto& name : registry_names()) {
        const ProblemInstance p = make_registered(name);
        const double eta = p.beta;
        const auto f1 = fb1_rhs(p.a, p.b, eta, sched);
        const auto f2 = fb2_rhs(p.a, p.b, eta, sched);
        const Vector zero = Vector::Zero(p.dim());
        for (double t : grid) {
            CHECK(f1.velocity(t, p.x_star).norm() <= 1e-9);
            CHECK(f2.acceleration(t, p.x_star, zero).norm() <= 1e-9);
            if (p.gradient_ready()) {
                CHECK(grad1_rhs(*p.g, sched).velocity(t, p.x_star).norm() <= 1e-9);
                CHECK(grad2_rhs(*p.g, sched).acceleration(t, p.x_star, zero).norm() <= 1e-9);
            }
        }
    }
}

TEST_CASE("fb1 rhs is linear in lambda") {
    const ProblemInstance p = make_registered("sc-lasso-20d");
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n(0.0, 3.0);
    Vector x(p.dim());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = n(rng);
    const Vector base = fb1_rhs(p.a, p.b, p.beta, Schedule::constant(1.0)).velocity(0.0, x);
    for (double lam : {0.1, 2.0, 7.5}) {
        const Vector v = fb1_rhs(p.a, p.b, p.beta, Schedule::constant(lam)).velocity(0.0, x);
        CHECK((v - lam * base).norm() <= 1e-12 * (1.0 + v.norm()));
    }
}

TEST_CASE("fb1 with A = df, B = grad g agrees with the prox-gradient rhs") {
    const ProblemInstance p = make_registered("sc-lasso-20d");
    std::mt19937_64 rng(10);
    std::normal_distribution<double> n(0.0, 3.0);
    const Schedule sched = Schedule::constant(1.3);
    const auto generic = fb1_rhs(p.f->subdifferential(), p.g->gradient_map(p.beta), 0.7, sched);
    const auto direct = prox_gradient_rhs(*p.f, *p.g, 0.7, sched);
    for (int k = 0; k < 50; ++k) {
        Vector x(p.dim());
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = n(rng);
        CHECK((generic.velocity(0.0, x) - direct.velocity(0.0, x)).norm() <= 1e-12);
    }
}

TEST_CASE("check_schedule re-verifies bounds and flags") {
    Schedule s = Schedule::constant(2.0, 5.0);
    CHECK(check_schedule(s).ok());

    Schedule rising = s;
    rising.gamma = [](double t) { return 5.0 + 0.1 * t; };
    CHECK_FALSE(check_schedule(rising).gamma_flag_ok);

    Schedule ratio = s;
    ratio.lambda = [](double t) { return 1.0 + 1.0 / (1.0 + t); };
    ratio.lambda_lower = 1.0;
    ratio.lambda_upper = 2.0;
    CHECK(check_schedule(ratio).bounds_ok);
    CHECK_FALSE(check_schedule(ratio).ratio_flag_ok);

    Schedule out_of_bounds = s;
    out_of_bounds.lambda_lower = 2.5;
    out_of_bounds.lambda_upper = 3.0;
    CHECK_FALSE(check_schedule(out_of_bounds).bounds_ok);
}

TEST_CASE("time_derivative of smooth schedules") {
    const ScalarFn f = [](double t) { return std::exp(-0.5 * t); };
    for (double t : {0.0, 0.3, 4.0, 50.0}) {
        CHECK(time_derivative(f, t) == doctest::Approx(-0.5 * std::exp(-0.5 * t)).epsilon(1e-6));
    }
}
