#include "fbflow/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fbflow {
namespace {

Inequality make_scalar(std::string name, double lhs, double rhs, Relation rel) {
    Inequality q{std::move(name), lhs, rhs, rel, 0.0, std::nullopt, false};
    q.holds = evaluate(q);
    return q;
}

/// Worst grid point of lhs(t) <= rhs(t).
template <class Lhs, class Rhs>
Inequality make_grid(std::string name, const GridOptions& grid, Lhs lhs, Rhs rhs) {
    Inequality worst{std::move(name), 0.0, 0.0, Relation::LessEqual, grid.slack, 0.0, false};
    double worst_gap = -std::numeric_limits<double>::infinity();
    for (double t : grid.times()) {
        const double l = lhs(t);
        const double r = rhs(t);
        const double gap = std::isnan(l - r) ? std::numeric_limits<double>::infinity() : l - r;
        if (gap > worst_gap) {
            worst_gap = gap;
            worst.lhs = l;
            worst.rhs = r;
            worst.at_time = t;
        }
    }
    worst.holds = evaluate(worst);
    return worst;
}

bool close(double a, double b) {
    return std::abs(a - b) <= kRounding * std::max({1.0, std::abs(a), std::abs(b)});
}

[[noreturn]] void fail_if_any(Theorem th, const std::vector<Inequality>& all) {
    std::vector<Inequality> failed;
    for (const auto& q : all) {
        if (!q.holds) failed.push_back(q);
    }
    throw CertificationError(th, std::move(failed));
}

void throw_on_failures(Theorem th, const std::vector<Inequality>& all) {
    if (std::any_of(all.begin(), all.end(), [](const Inequality& q) { return !q.holds; })) {
        fail_if_any(th, all);
    }
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParameterError(std::string(what) + " > 0 required");
    }
}

void require_open_unit(double v, const char* what) {
    if (!(v > 0.0 && v < 1.0)) {
        throw ParameterError(std::string(what) + " in (0,1) required");
    }
}

// Scalar hypotheses and derived constants, shared between certification and
// revalidation.

double fb1_rate(double rho, double beta, double lambda_lower, double alpha, double eta) {
    return (2.0 * rho * lambda_lower - alpha / (beta * beta)) / (2.0 * rho + 1.0 / eta);
}

std::vector<Inequality> fb1_scalars(double rho, double beta, double lambda_lower, double lambda_upper,
                                    double alpha, double eta) {
    std::vector<Inequality> out;
    out.push_back(make_scalar("α < 2ρβ²λ̲", alpha, 2.0 * rho * beta * beta * lambda_lower, Relation::Less));
    out.push_back(make_scalar("1/β + λ̄/(2α) ≤ ρ + 1/η", 1.0 / beta + lambda_upper / (2.0 * alpha),
                              rho + 1.0 / eta, Relation::LessEqual));
    out.push_back(make_scalar("C > 0", 0.0, fb1_rate(rho, beta, lambda_lower, alpha, eta), Relation::Less));
    return out;
}

std::vector<Inequality> grad1_scalars(double rho, double beta, double lambda_lower, double alpha) {
    return {make_scalar("α ≤ 2λ̲βρ²", alpha, 2.0 * lambda_lower * beta * rho * rho, Relation::LessEqual)};
}

double fb2_gamma_lower(double theta) { return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta)); }

std::vector<Inequality> fb2_scalars(double rho, double beta, double alpha, double delta, double lambda_lower) {
    const Fb2Algebra g = fb2_algebra(rho, beta, alpha, delta);
    const double theta = g.theta_per_lambda * lambda_lower;
    std::vector<Inequality> out;
    out.push_back(make_scalar("δβρ < 1", delta * beta * rho, 1.0, Relation::Less));
    out.push_back(make_scalar("1/η > 0", 0.0, g.inv_eta, Relation::Less));
    out.push_back(make_scalar("λ̲ > 0", 0.0, lambda_lower, Relation::Less));
    out.push_back(make_scalar("θ > 2", 2.0, theta, Relation::Less));
    return out;
}

double grad2_gamma_lower(double rho, double beta, double alpha_bar) {
    return 0.5 * (1.0 + std::sqrt(1.0 + 8.0 * alpha_bar / (beta * beta * rho * rho)));
}

std::vector<Inequality> grad2_scalars(double rho, double beta, double alpha_bar) {
    std::vector<Inequality> out;
    out.push_back(make_scalar("ᾱ > 1", 1.0, alpha_bar, Relation::Less));
    out.push_back(make_scalar("ρβ ≤ 1", rho * beta, 1.0, Relation::LessEqual));
    out.push_back(make_scalar("γ̲ > 2", 2.0, grad2_gamma_lower(rho, beta, alpha_bar), Relation::Less));
    return out;
}

void require_schedule_fields(const Schedule& s, bool need_alpha) {
    if (!s.lambda) throw ParameterError("schedule is missing lambda(t)");
    if (!s.gamma) throw ParameterError("schedule is missing gamma(t)");
    if (need_alpha && !s.alpha) throw ParameterError("schedule is missing alpha(t)");
}

void append_monotonicity(std::vector<Inequality>& out, const Schedule& s, const GridOptions& grid) {
    out.push_back(make_grid(
        "γ̇(t) ≤ 0", grid, [&](double t) { return time_derivative(s.gamma, t); },
        [](double) { return 0.0; }));
    const ScalarFn ratio = [&s](double t) { return s.gamma(t) / s.lambda(t); };
    out.push_back(make_grid(
        "d/dt(γ(t)/λ(t)) ≤ 0", grid, [&](double t) { return time_derivative(ratio, t); },
        [](double) { return 0.0; }));
}

}  // namespace

const char* to_string(Theorem t) {
    switch (t) {
        case Theorem::FB1: return "FB1";
        case Theorem::GRAD1: return "GRAD1";
        case Theorem::FB2: return "FB2";
        case Theorem::GRAD2: return "GRAD2";
    }
    return "?";
}

Theorem theorem_from_string(const std::string& s) {
    if (s == "FB1" || s == "fb1") return Theorem::FB1;
    if (s == "GRAD1" || s == "grad1") return Theorem::GRAD1;
    if (s == "FB2" || s == "fb2") return Theorem::FB2;
    if (s == "GRAD2" || s == "grad2") return Theorem::GRAD2;
    throw ParameterError("unknown system kind '" + s + "'");
}

bool evaluate(const Inequality& q) {
    if (!std::isfinite(q.lhs) || !std::isfinite(q.rhs)) return false;
    if (q.relation == Relation::Less) return q.lhs < q.rhs + q.slack;
    const double round = kRounding * std::max({1.0, std::abs(q.lhs), std::abs(q.rhs)});
    return q.lhs <= q.rhs + q.slack + round;
}

double RateCertificate::input(const std::string& key) const {
    auto it = inputs.find(key);
    if (it == inputs.end()) throw ParameterError("certificate has no input '" + key + "'");
    return it->second;
}

double RateCertificate::constant(const std::string& key) const {
    auto it = constants.find(key);
    if (it == constants.end()) throw ParameterError("certificate has no constant '" + key + "'");
    return it->second;
}

namespace {
std::string describe_failures(Theorem th, const std::vector<Inequality>& failures) {
    std::ostringstream os;
    os << to_string(th) << " hypotheses violated:";
    for (const auto& q : failures) {
        os << " [" << q.name << " violated: lhs=" << q.lhs << ", rhs=" << q.rhs;
        if (q.at_time) os << " at t=" << *q.at_time;
        os << "]";
    }
    return os.str();
}
}  // namespace

CertificationError::CertificationError(Theorem theorem, std::vector<Inequality> failures)
    : std::runtime_error(describe_failures(theorem, failures)),
      theorem_(theorem),
      failures_(std::move(failures)) {}

bool CertificationError::names(const std::string& inequality) const {
    return std::any_of(failures_.begin(), failures_.end(),
                       [&](const Inequality& q) { return q.name == inequality; });
}

RateCertificate certify_fb1(double rho, double beta, double lambda_lower, double lambda_upper, double alpha,
                            double eta) {
    require_positive(rho, "ρ");
    require_positive(beta, "β");
    require_positive(lambda_lower, "λ̲");
    require_positive(lambda_upper, "λ̄");
    require_positive(alpha, "α");
    require_positive(eta, "η");
    if (lambda_lower > lambda_upper) throw ParameterError("λ̲ ≤ λ̄ required");

    RateCertificate cert;
    cert.theorem = Theorem::FB1;
    cert.inputs = {{"rho", rho}, {"beta", beta}, {"lambda_lower", lambda_lower},
                   {"lambda_upper", lambda_upper}, {"alpha", alpha}, {"eta", eta}};
    cert.inequalities = fb1_scalars(rho, beta, lambda_lower, lambda_upper, alpha, eta);
    throw_on_failures(Theorem::FB1, cert.inequalities);
    const double c = fb1_rate(rho, beta, lambda_lower, alpha, eta);
    cert.constants = {{"C", c}};
    cert.decay_exponent = c;
    return cert;
}

RateCertificate certify_grad1(double rho, double beta, double lambda_lower, double alpha) {
    require_positive(rho, "ρ");
    require_positive(beta, "β");
    require_positive(lambda_lower, "λ̲");
    require_positive(alpha, "α");

    RateCertificate cert;
    cert.theorem = Theorem::GRAD1;
    cert.inputs = {{"rho", rho}, {"beta", beta}, {"lambda_lower", lambda_lower}, {"alpha", alpha}};
    cert.inequalities = grad1_scalars(rho, beta, lambda_lower, alpha);
    throw_on_failures(Theorem::GRAD1, cert.inequalities);
    cert.decay_exponent = alpha;
    return cert;
}

Fb2Algebra fb2_algebra(double rho, double beta, double alpha, double delta) {
    Fb2Algebra g;
    g.s = 1.0 / beta + 1.0 / (4.0 * rho * beta * beta * alpha);
    g.inv_eta = g.s / delta - rho;
    const double denom = rho + g.s / delta;  // equals 2 rho + 1/eta
    g.k = 2.0 * rho * (1.0 - alpha) / denom;
    g.theta_per_lambda = (delta / (1.0 - delta)) * denom / g.s;
    return g;
}

RateCertificate certify_fb2(double rho, double beta, double alpha, double delta, const Schedule& sched,
                            const GridOptions& grid) {
    require_positive(rho, "ρ");
    require_positive(beta, "β");
    require_open_unit(alpha, "α");
    require_open_unit(delta, "δ");
    require_schedule_fields(sched, false);

    const Fb2Algebra g = fb2_algebra(rho, beta, alpha, delta);
    const double lambda_lower = sched.lambda_lower;
    const double theta = g.theta_per_lambda * lambda_lower;
    const double gamma_lower = fb2_gamma_lower(theta);

    RateCertificate cert;
    cert.theorem = Theorem::FB2;
    cert.inputs = {{"rho", rho}, {"beta", beta}, {"alpha", alpha}, {"delta", delta},
                   {"lambda_lower", lambda_lower}};
    auto& qs = cert.inequalities;
    qs = fb2_scalars(rho, beta, alpha, delta, lambda_lower);

    const auto& lam = sched.lambda;
    const auto& gam = sched.gamma;
    const double a = g.theta_per_lambda;
    const double k = g.k;
    qs.push_back(make_grid(
        "λ̲ ≤ λ(t)", grid, [&](double) { return lambda_lower; }, [&](double t) { return lam(t); }));
    qs.push_back(make_grid(
        "θ(t) ≤ Kλ(t) + K²λ(t)²", grid, [&](double t) { return a * lam(t); },
        [&](double t) { return k * lam(t) + k * k * lam(t) * lam(t); }));
    qs.push_back(make_grid(
        "(1+√(1+4θ(t)))/2 ≤ γ(t)", grid, [&](double t) { return fb2_gamma_lower(a * lam(t)); },
        [&](double t) { return gam(t); }));
    qs.push_back(make_grid(
        "γ(t) ≤ 1 + Kλ(t)", grid, [&](double t) { return gam(t); }, [&](double t) { return 1.0 + k * lam(t); }));
    append_monotonicity(qs, sched, grid);
    throw_on_failures(Theorem::FB2, qs);

    cert.constants = {{"s", g.s},         {"inv_eta", g.inv_eta},         {"eta", 1.0 / g.inv_eta},
                      {"K", g.k},         {"theta", theta},               {"gamma_lower", gamma_lower},
                      {"theta_per_lambda", g.theta_per_lambda}};
    cert.decay_exponent = 1.0;
    cert.transient_exponent = gamma_lower - 1.0;
    cert.gamma_lower = gamma_lower;
    return cert;
}

RateCertificate certify_grad2(double rho, double beta, double alpha_bar, const Schedule& sched,
                              const GridOptions& grid) {
    require_positive(rho, "ρ");
    require_positive(beta, "β");
    require_schedule_fields(sched, true);

    RateCertificate cert;
    cert.theorem = Theorem::GRAD2;
    cert.inputs = {{"rho", rho}, {"beta", beta}, {"alpha_bar", alpha_bar}};
    auto& qs = cert.inequalities;
    qs = grad2_scalars(rho, beta, alpha_bar);

    const auto& lam = sched.lambda;
    const auto& gam = sched.gamma;
    const auto& alp = sched.alpha;
    const double alpha_floor = std::max(alpha_bar, 2.0 / (beta * beta * rho * rho) - 1.0);
    qs.push_back(make_grid(
        "max{ᾱ, 2/(β²ρ²) − 1} ≤ α(t)", grid, [&](double) { return alpha_floor; },
        [&](double t) { return alp(t); }));
    qs.push_back(make_grid(
        "α(t)/(βρ²) ≤ λ(t)", grid, [&](double t) { return alp(t) / (beta * rho * rho); },
        [&](double t) { return lam(t); }));
    qs.push_back(make_grid(
        "λ(t) ≤ (β/2)(α(t)+α(t)²)", grid, [&](double t) { return lam(t); },
        [&](double t) { return 0.5 * beta * (alp(t) + alp(t) * alp(t)); }));
    qs.push_back(make_grid(
        "(1+√(1+8λ(t)/β))/2 ≤ γ(t)", grid,
        [&](double t) { return 0.5 * (1.0 + std::sqrt(1.0 + 8.0 * lam(t) / beta)); },
        [&](double t) { return gam(t); }));
    qs.push_back(make_grid(
        "γ(t) ≤ 1 + α(t)", grid, [&](double t) { return gam(t); }, [&](double t) { return 1.0 + alp(t); }));
    append_monotonicity(qs, sched, grid);
    throw_on_failures(Theorem::GRAD2, qs);

    const double gamma_lower = grad2_gamma_lower(rho, beta, alpha_bar);
    cert.constants = {{"gamma_lower", gamma_lower}};
    cert.decay_exponent = 1.0;
    cert.transient_exponent = gamma_lower - 1.0;
    cert.gamma_lower = gamma_lower;
    return cert;
}

bool revalidate(const RateCertificate& cert) {
    std::vector<Inequality> scalars;
    std::map<std::string, double> expected;
    double expected_rate = 0.0;
    try {
        switch (cert.theorem) {
            case Theorem::FB1: {
                const double rho = cert.input("rho"), beta = cert.input("beta");
                const double ll = cert.input("lambda_lower"), lu = cert.input("lambda_upper");
                const double alpha = cert.input("alpha"), eta = cert.input("eta");
                scalars = fb1_scalars(rho, beta, ll, lu, alpha, eta);
                expected_rate = fb1_rate(rho, beta, ll, alpha, eta);
                expected["C"] = expected_rate;
                break;
            }
            case Theorem::GRAD1: {
                const double alpha = cert.input("alpha");
                scalars = grad1_scalars(cert.input("rho"), cert.input("beta"), cert.input("lambda_lower"), alpha);
                expected_rate = alpha;
                break;
            }
            case Theorem::FB2: {
                const double rho = cert.input("rho"), beta = cert.input("beta");
                const double alpha = cert.input("alpha"), delta = cert.input("delta");
                const double ll = cert.input("lambda_lower");
                scalars = fb2_scalars(rho, beta, alpha, delta, ll);
                const Fb2Algebra g = fb2_algebra(rho, beta, alpha, delta);
                const double theta = g.theta_per_lambda * ll;
                expected = {{"s", g.s},         {"inv_eta", g.inv_eta},
                            {"eta", 1.0 / g.inv_eta},
                            {"K", g.k},         {"theta", theta},
                            {"gamma_lower", fb2_gamma_lower(theta)},
                            {"theta_per_lambda", g.theta_per_lambda}};
                expected_rate = 1.0;
                break;
            }
            case Theorem::GRAD2: {
                const double rho = cert.input("rho"), beta = cert.input("beta");
                const double alpha_bar = cert.input("alpha_bar");
                scalars = grad2_scalars(rho, beta, alpha_bar);
                expected = {{"gamma_lower", grad2_gamma_lower(rho, beta, alpha_bar)}};
                expected_rate = 1.0;
                break;
            }
        }
    } catch (const ParameterError&) {
        return false;
    }

    if (!(cert.decay_exponent > 0.0) || !close(cert.decay_exponent, expected_rate)) return false;
    for (const auto& [key, value] : expected) {
        auto it = cert.constants.find(key);
        if (it == cert.constants.end() || !close(it->second, value)) return false;
    }
    for (const auto& s : scalars) {
        auto it = std::find_if(cert.inequalities.begin(), cert.inequalities.end(),
                               [&](const Inequality& q) { return q.name == s.name; });
        if (it == cert.inequalities.end() || !close(it->lhs, s.lhs) || !close(it->rhs, s.rhs)) return false;
    }
    return std::all_of(cert.inequalities.begin(), cert.inequalities.end(),
                       [](const Inequality& q) { return q.holds && evaluate(q); });
}

ConstantParameters suggest_constants_fb2(double rho, double beta, double alpha, double delta) {
    require_positive(rho, "ρ");
    require_positive(beta, "β");
    require_open_unit(alpha, "α");
    require_open_unit(delta, "δ");
    const Fb2Algebra g = fb2_algebra(rho, beta, alpha, delta);
    {
        std::vector<Inequality> pre;
        pre.push_back(make_scalar("δβρ < 1", delta * beta * rho, 1.0, Relation::Less));
        pre.push_back(make_scalar("1/η > 0", 0.0, g.inv_eta, Relation::Less));
        pre.push_back(make_scalar("K > 0", 0.0, g.k, Relation::Less));
        throw_on_failures(Theorem::FB2, pre);
    }
    const double a = g.theta_per_lambda;
    const double k = g.k;
    // theta(lambda) = a lambda <= k lambda + k^2 lambda^2  <=>  lambda >= (a - k) / k^2.
    const double quad_root = (a - k) / (k * k);
    const double lambda = 1.01 * std::max(quad_root, 2.0 / a);
    const double lo = fb2_gamma_lower(a * lambda);
    const double hi = 1.0 + k * lambda;

    ConstantParameters p;
    p.lambda = lambda;
    p.gamma = 0.5 * (lo + hi);
    p.eta = 1.0 / g.inv_eta;
    certify_fb2(rho, beta, alpha, delta, Schedule::constant(p.lambda, p.gamma),
                GridOptions{1.0, 2, 1e-9});
    return p;
}

ConstantParameters suggest_constants_grad2(double rho, double beta, double epsilon) {
    require_positive(rho, "ρ");
    require_positive(beta, "β");
    require_positive(epsilon, "ε");
    throw_on_failures(Theorem::GRAD2, {make_scalar("ρβ ≤ 1", rho * beta, 1.0, Relation::LessEqual)});
    const double alpha = beta * rho < 1.0 ? 2.0 / (beta * beta * rho * rho) - 1.0 : 1.0 + epsilon;
    const double lambda = alpha / (beta * rho * rho);
    const double lo = 0.5 * (1.0 + std::sqrt(1.0 + 8.0 * lambda / beta));
    const double hi = 1.0 + alpha;

    ConstantParameters p;
    p.alpha = alpha;
    p.lambda = lambda;
    p.gamma = 0.5 * (lo + hi);
    certify_grad2(rho, beta, alpha, Schedule::constant(p.lambda, p.gamma, alpha), GridOptions{1.0, 2, 1e-9});
    return p;
}

const char* to_string(LemmaCase c) {
    switch (c) {
        case LemmaCase::I: return "i";
        case LemmaCase::II: return "ii";
        case LemmaCase::III: return "iii";
    }
    return "?";
}

LemmaCase lemma_case_for(double gamma_lower) {
    if (!(gamma_lower > 1.0)) throw ParameterError("γ̲ > 1 required");
    if (std::abs(gamma_lower - 2.0) <= kRounding) return LemmaCase::III;
    return gamma_lower < 2.0 ? LemmaCase::I : LemmaCase::II;
}

LemmaCoefficients lemma_coefficients_fb2(double rho, double beta, double alpha, double delta,
                                         const Schedule& sched) {
    require_schedule_fields(sched, false);
    const Fb2Algebra g = fb2_algebra(rho, beta, alpha, delta);
    const double den = 2.0 * rho + g.inv_eta;
    const double curv = rho + g.inv_eta - g.s;  // coefficient of |x''|^2 lambda^2
    const double b1c = 2.0 * rho * (1.0 - alpha) / den;
    const auto lam = sched.lambda;
    const auto gam = sched.gamma;

    LemmaCoefficients c;
    c.gamma = gam;
    c.b1 = [lam, b1c](double t) { return lam(t) * b1c; };
    c.b2 = [lam, gam, curv, den](double t) { return gam(t) / lam(t) * curv / den; };
    c.b3 = [lam, gam, curv, den](double t) {
        const double l = lam(t);
        const double y = gam(t);
        return (y * y * curv / (l * l) - den / l) / (den / l);
    };
    c.gamma_lower = fb2_gamma_lower(g.theta_per_lambda * sched.lambda_lower);
    c.case_tag = lemma_case_for(c.gamma_lower);
    return c;
}

LemmaCoefficients lemma_coefficients_grad2(double rho, double beta, double alpha_bar, const Schedule& sched) {
    require_schedule_fields(sched, true);
    const auto lam = sched.lambda;
    const auto gam = sched.gamma;
    LemmaCoefficients c;
    c.gamma = gam;
    c.b1 = sched.alpha;
    c.b2 = [lam, gam](double t) { return gam(t) / (2.0 * lam(t)); };
    c.b3 = [lam, gam, beta](double t) {
        const double y = gam(t);
        return y * y / (2.0 * lam(t)) - 1.0 / beta;
    };
    c.gamma_lower = grad2_gamma_lower(rho, beta, alpha_bar);
    c.case_tag = lemma_case_for(c.gamma_lower);
    return c;
}

std::vector<Inequality> check_lemma_hypotheses(const LemmaCoefficients& c, const GridOptions& grid) {
    std::vector<Inequality> out;
    out.push_back(make_scalar("γ̲ > 1", 1.0, c.gamma_lower, Relation::Less));
    out.push_back(make_grid(
        "γ̲ ≤ γ(t)", grid, [&](double) { return c.gamma_lower; }, [&](double t) { return c.gamma(t); }));
    out.push_back(make_grid(
        "b2(t) ≥ 0", grid, [](double) { return 0.0; }, [&](double t) { return c.b2(t); }));
    out.push_back(make_grid(
        "γ(t)+γ̇(t) ≤ b1(t)+1", grid, [&](double t) { return c.gamma(t) + time_derivative(c.gamma, t); },
        [&](double t) { return c.b1(t) + 1.0; }));
    out.push_back(make_grid(
        "b2(t)+ḃ2(t) ≤ b3(t)", grid, [&](double t) { return c.b2(t) + time_derivative(c.b2, t); },
        [&](double t) { return c.b3(t); }));
    return out;
}

LemmaM lemma_M(double h0, double hdot0, double gamma0, double b2_0, double u0) {
    if (!(h0 >= 0.0)) throw ParameterError("h(0) ≥ 0 required");
    if (!(u0 >= 0.0)) throw ParameterError("u(0) ≥ 0 required");
    if (!(gamma0 > 1.0)) throw ParameterError("γ(0) > 1 required");
    if (!(b2_0 >= 0.0)) throw ParameterError("b2(0) ≥ 0 required");
    LemmaM m;
    m.raw = hdot0 + (gamma0 - 1.0) * h0 + b2_0 * u0;
    m.clamped = std::max(m.raw, kMinM);
    return m;
}

double lemma_bound(LemmaCase c, double gamma_lower, double h0, double m, double t) {
    if (!(t >= 0.0)) throw ParameterError("t ≥ 0 required");
    if (!(m > 0.0)) throw ParameterError("M > 0 required");
    switch (c) {
        case LemmaCase::I:
            if (!(gamma_lower > 1.0 && gamma_lower < 2.0)) throw ParameterError("case (i) needs 1 < γ̲ < 2");
            return (h0 + m / (2.0 - gamma_lower)) * std::exp(-(gamma_lower - 1.0) * t);
        case LemmaCase::II:
            if (!(gamma_lower > 2.0)) throw ParameterError("case (ii) needs γ̲ > 2");
            return h0 * std::exp(-(gamma_lower - 1.0) * t) + m / (gamma_lower - 2.0) * std::exp(-t);
        case LemmaCase::III:
            if (std::abs(gamma_lower - 2.0) > kRounding) throw ParameterError("case (iii) needs γ̲ = 2");
            return (h0 + m * t) * std::exp(-t);
    }
    throw ParameterError("unknown lemma case");
}

}  // namespace fbflow
