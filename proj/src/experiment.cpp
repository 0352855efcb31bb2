#include "fbflow/experiment.hpp"

#include "fbflow/metrics.hpp"
#include "fbflow/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace fbflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kAuditPairs = 1000;
constexpr double kEnvelopeDrop = 1e-10;

const std::vector<std::string> kKnownParams = {"alpha", "eta", "delta", "alpha_bar", "lambda", "gamma", "epsilon"};

double number(const json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError("'" + key + "' must be finite");
    return v;
}

Vector vector_of(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty()) throw ConfigError("'" + key + "' must be a nonempty array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], key);
    return v;
}

std::optional<double> scalar_param(const json& params, const std::string& key) {
    if (!params.contains(key)) return std::nullopt;
    return number(params.at(key), key);
}

double required_param(const json& params, const std::string& key, SystemKind s) {
    auto v = scalar_param(params, key);
    if (!v) throw ConfigError(std::string(to_string(s)) + " needs params." + key);
    return *v;
}

std::optional<ParamProfile> profile_param(const json& params, const std::string& key) {
    if (!params.contains(key)) return std::nullopt;
    return ParamProfile::parse(params.at(key), key);
}

ProblemInstance load_problem(const json& d) {
    try {
        return instance_from_descriptor(d);
    } catch (const UnknownProblem&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("problem descriptor: ") + e.what());
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("problem descriptor: ") + e.what());
    }
}

GridOptions certification_grid(const ExperimentConfig& cfg) {
    GridOptions g;
    if (cfg.integrator.t_end) g.t_end = std::max(g.t_end, *cfg.integrator.t_end);
    return g;
}

/// Below this level the metric is dominated by integration error, so the rate
/// fit stops there.
double noise_floor(const ExperimentConfig& cfg, const Setup& s, MetricKind metric) {
    const auto& ic = cfg.integrator;
    const double scale = 1.0 + s.problem.x_star.norm();
    const double step_err = ic.fixed_step ? std::pow(*ic.fixed_step, 4) : ic.abs_tol + ic.rel_tol * scale;
    const double floor_h = 1e4 * static_cast<double>(s.problem.dim()) * step_err * step_err;
    if (metric == MetricKind::Distance) return floor_h;
    const double f_star = s.problem.objective(s.problem.x_star).value_or(0.0);
    return std::max(0.5 * s.problem.rho * floor_h, 1e-12 * (1.0 + std::abs(f_star)));
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << content;
}

std::string failure_names(const CertificationError& e) {
    std::string out;
    for (const auto& q : e.failures()) {
        if (!out.empty()) out += "; ";
        out += q.name;
    }
    return out;
}

std::string describe_failures(const CertificationError& e) {
    std::ostringstream os;
    os << to_string(e.theorem()) << " certification failed:\n";
    for (const auto& q : e.failures()) {
        os << "  " << q.name << " violated (lhs " << q.lhs << ", rhs " << q.rhs;
        if (q.at_time) os << ", t = " << *q.at_time;
        os << ")\n";
    }
    return os.str();
}

std::string csv_escape(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

const char* to_string(SystemKind s) {
    switch (s) {
        case SystemKind::FB1: return "fb1";
        case SystemKind::GRAD1: return "grad1";
        case SystemKind::FB2: return "fb2";
        case SystemKind::GRAD2: return "grad2";
    }
    return "?";
}

SystemKind system_from_string(const std::string& s) {
    if (s == "fb1") return SystemKind::FB1;
    if (s == "grad1") return SystemKind::GRAD1;
    if (s == "fb2") return SystemKind::FB2;
    if (s == "grad2") return SystemKind::GRAD2;
    throw ConfigError("unknown system '" + s + "' (expected fb1, grad1, fb2 or grad2)");
}

Theorem theorem_for(SystemKind s) {
    switch (s) {
        case SystemKind::FB1: return Theorem::FB1;
        case SystemKind::GRAD1: return Theorem::GRAD1;
        case SystemKind::FB2: return Theorem::FB2;
        case SystemKind::GRAD2: return Theorem::GRAD2;
    }
    return Theorem::FB1;
}

ParamProfile ParamProfile::parse(const json& j, const std::string& key) {
    if (j.is_number()) return constant(number(j, key));
    if (!j.is_object() || !j.contains("profile") || !j["profile"].is_string()) {
        throw ConfigError("'" + key + "' must be a number or an object with a 'profile'");
    }
    const std::string kind = j["profile"].get<std::string>();
    if (kind == "constant") {
        if (!j.contains("value")) throw ConfigError("'" + key + "': constant profile needs 'value'");
        return constant(number(j["value"], key + ".value"));
    }
    if (kind == "exp_approach") {
        for (const char* f : {"start", "limit", "rate"}) {
            if (!j.contains(f)) throw ConfigError("'" + key + "': exp_approach profile needs '" + f + "'");
        }
        ParamProfile p{number(j["start"], key + ".start"), number(j["limit"], key + ".limit"),
                       number(j["rate"], key + ".rate")};
        if (p.rate < 0.0) throw ConfigError("'" + key + "': exp_approach rate must be >= 0");
        return p;
    }
    throw ConfigError("'" + key + "': unknown profile '" + kind + "'");
}

double ParamProfile::lower() const { return std::min(start, limit); }
double ParamProfile::upper() const { return std::max(start, limit); }

ScalarFn ParamProfile::fn() const {
    if (is_constant()) {
        const double v = start;
        return [v](double) { return v; };
    }
    const double a = start, b = limit, r = rate;
    return [a, b, r](double t) { return b + (a - b) * std::exp(-r * t); };
}

StepControl IntegratorConfig::control() const {
    if (fixed_step) return FixedStep{*fixed_step};
    return Adaptive{rel_tol, abs_tol};
}

std::vector<double> SweepAxis::values() const {
    std::vector<double> v;
    if (count == 1) return {min};
    for (std::size_t i = 0; i < count; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(count - 1);
        v.push_back(log ? min * std::pow(max / min, s) : min + (max - min) * s);
    }
    return v;
}

ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [k, _] : j.items()) {
        static const std::vector<std::string> known = {"problem", "system", "params",    "initial",
                                                       "integrator", "tolerances", "sweep", "seed"};
        if (std::find(known.begin(), known.end(), k) == known.end()) {
            throw ConfigError("unknown config key '" + k + "'");
        }
    }
    ExperimentConfig cfg;
    if (!j.contains("problem")) throw ConfigError("config needs 'problem'");
    cfg.problem = j["problem"];
    if (!cfg.problem.is_string() && !cfg.problem.is_object()) {
        throw ConfigError("'problem' must be a registry name or a descriptor object");
    }
    if (!j.contains("system") || !j["system"].is_string()) throw ConfigError("config needs 'system'");
    cfg.system = system_from_string(j["system"].get<std::string>());

    if (j.contains("params")) {
        if (!j["params"].is_object()) throw ConfigError("'params' must be an object");
        cfg.params = j["params"];
        for (const auto& [k, _] : cfg.params.items()) {
            if (k == "rho" || k == "beta") {
                throw ConfigError("params." + k + " is read from the problem instance and cannot be overridden");
            }
            if (std::find(kKnownParams.begin(), kKnownParams.end(), k) == kKnownParams.end()) {
                throw ConfigError("unknown parameter '" + k + "'");
            }
        }
    }
    if (j.contains("initial")) {
        const json& in = j["initial"];
        if (!in.is_object()) throw ConfigError("'initial' must be an object");
        if (in.contains("x0")) cfg.x0 = vector_of(in["x0"], "initial.x0");
        if (in.contains("v0")) cfg.v0 = vector_of(in["v0"], "initial.v0");
    }
    if (j.contains("integrator")) {
        const json& ic = j["integrator"];
        if (!ic.is_object()) throw ConfigError("'integrator' must be an object");
        if (ic.contains("t_end")) cfg.integrator.t_end = number(ic["t_end"], "integrator.t_end");
        if (ic.contains("rel_tol")) cfg.integrator.rel_tol = number(ic["rel_tol"], "integrator.rel_tol");
        if (ic.contains("abs_tol")) cfg.integrator.abs_tol = number(ic["abs_tol"], "integrator.abs_tol");
        if (ic.contains("fixed_step")) cfg.integrator.fixed_step = number(ic["fixed_step"], "integrator.fixed_step");
        if (ic.contains("samples")) {
            const double n = number(ic["samples"], "integrator.samples");
            if (n < 2) throw ConfigError("integrator.samples must be >= 2");
            cfg.integrator.min_samples = static_cast<std::size_t>(n);
        }
        if (cfg.integrator.t_end && !(*cfg.integrator.t_end > 0.0)) throw ConfigError("integrator.t_end must be > 0");
        if (!(cfg.integrator.rel_tol > 0.0) || !(cfg.integrator.abs_tol > 0.0)) {
            throw ConfigError("integrator tolerances must be > 0");
        }
        if (cfg.integrator.fixed_step && !(*cfg.integrator.fixed_step > 0.0)) {
            throw ConfigError("integrator.fixed_step must be > 0");
        }
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) throw ConfigError("'tolerances' must be an object");
        if (t.contains("tol_rel")) cfg.tol_rel = number(t["tol_rel"], "tolerances.tol_rel");
        if (t.contains("tol_abs")) cfg.tol_abs = number(t["tol_abs"], "tolerances.tol_abs");
        if (cfg.tol_rel < 0.0 || cfg.tol_abs < 0.0) throw ConfigError("tolerances must be >= 0");
    }
    if (j.contains("sweep")) {
        if (!j["sweep"].is_object()) throw ConfigError("'sweep' must be an object of axes");
        for (const auto& [name, ax] : j["sweep"].items()) {
            if (std::find(kKnownParams.begin(), kKnownParams.end(), name) == kKnownParams.end()) {
                throw ConfigError("cannot sweep unknown parameter '" + name + "'");
            }
            if (!ax.is_object() || !ax.contains("min") || !ax.contains("max") || !ax.contains("count")) {
                throw ConfigError("sweep." + name + " needs min, max and count");
            }
            SweepAxis a;
            a.name = name;
            a.min = number(ax["min"], "sweep." + name + ".min");
            a.max = number(ax["max"], "sweep." + name + ".max");
            const double c = number(ax["count"], "sweep." + name + ".count");
            if (c < 1 || c != std::floor(c)) throw ConfigError("sweep." + name + ".count must be a positive integer");
            a.count = static_cast<std::size_t>(c);
            if (ax.contains("scale")) {
                const std::string sc = ax["scale"].get<std::string>();
                if (sc != "log" && sc != "linear") throw ConfigError("sweep scale must be 'log' or 'linear'");
                a.log = sc == "log";
            }
            if (a.log && !(a.min > 0.0 && a.max > 0.0)) throw ConfigError("log sweep needs positive bounds");
            cfg.sweep.push_back(a);
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("'seed' must be a nonnegative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

Setup prepare(const ExperimentConfig& cfg) {
    Setup s;
    s.problem = load_problem(cfg.problem);
    const auto& p = cfg.params;
    const SystemKind sys = cfg.system;
    const bool gradient_system = sys == SystemKind::GRAD1 || sys == SystemKind::GRAD2;
    if (gradient_system && !s.problem.gradient_ready()) {
        throw IncompatibleSystem(std::string(to_string(sys)) + " needs a smooth instance with f = 0; '" +
                                 s.problem.name + "' is not");
    }
    const double rho = s.problem.rho;
    const double beta = s.problem.beta;

    std::optional<ParamProfile> lambda = profile_param(p, "lambda");
    std::optional<ParamProfile> gamma = profile_param(p, "gamma");
    std::optional<ParamProfile> alpha_fn;

    switch (sys) {
        case SystemKind::FB1:
            s.params["alpha"] = required_param(p, "alpha", sys);
            s.params["eta"] = s.eta = required_param(p, "eta", sys);
            if (!lambda) lambda = ParamProfile::constant(1.0);
            break;
        case SystemKind::GRAD1:
            s.params["alpha"] = required_param(p, "alpha", sys);
            if (!lambda) lambda = ParamProfile::constant(1.0);
            break;
        case SystemKind::FB2: {
            if (p.contains("eta")) throw ConfigError("fb2 derives eta from alpha and delta; remove params.eta");
            const double alpha = required_param(p, "alpha", sys);
            const double delta = required_param(p, "delta", sys);
            s.params["alpha"] = alpha;
            s.params["delta"] = delta;
            if (lambda.has_value() != gamma.has_value()) {
                throw ConfigError("fb2 needs both lambda and gamma, or neither (suggested constants)");
            }
            if (!lambda) {
                const ConstantParameters c = suggest_constants_fb2(rho, beta, alpha, delta);
                lambda = ParamProfile::constant(c.lambda);
                gamma = ParamProfile::constant(c.gamma);
            }
            const Fb2Algebra g = fb2_algebra(rho, beta, alpha, delta);
            if (!(g.inv_eta > 0.0)) throw ParameterError("1/η > 0 violated for these α, δ");
            s.params["eta"] = s.eta = 1.0 / g.inv_eta;
            break;
        }
        case SystemKind::GRAD2: {
            alpha_fn = profile_param(p, "alpha");
            const bool any = lambda || gamma || alpha_fn || p.contains("alpha_bar");
            if (!any) {
                const double eps = scalar_param(p, "epsilon").value_or(0.5);
                const ConstantParameters c = suggest_constants_grad2(rho, beta, eps);
                alpha_fn = ParamProfile::constant(*c.alpha);
                lambda = ParamProfile::constant(c.lambda);
                gamma = ParamProfile::constant(c.gamma);
                s.params["alpha_bar"] = *c.alpha;
            } else {
                if (!lambda || !gamma) throw ConfigError("grad2 needs both lambda and gamma, or no schedule at all");
                const double alpha_bar = required_param(p, "alpha_bar", sys);
                if (!alpha_fn) alpha_fn = ParamProfile::constant(alpha_bar);
                s.params["alpha_bar"] = alpha_bar;
            }
            s.params["alpha"] = alpha_fn->start;
            break;
        }
    }
    if (sys == SystemKind::FB2 || sys == SystemKind::GRAD2) {
        s.schedule.gamma = gamma->fn();
        s.schedule.gamma_nonincreasing = gamma->nonincreasing();
        s.schedule.gamma_over_lambda_nonincreasing = gamma->is_constant() && lambda->is_constant();
        s.params["gamma"] = gamma->start;
    } else if (gamma) {
        throw ConfigError(std::string(to_string(sys)) + " has no damping parameter gamma");
    }
    if (alpha_fn) s.schedule.alpha = alpha_fn->fn();
    s.schedule.lambda = lambda->fn();
    s.schedule.lambda_lower = lambda->lower();
    s.schedule.lambda_upper = lambda->upper();
    s.params["lambda"] = lambda->start;

    const Eigen::Index d = s.problem.dim();
    if (cfg.x0) {
        if (cfg.x0->size() != d) throw ConfigError("initial.x0 has the wrong dimension");
        s.init.x0 = *cfg.x0;
    } else {
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        s.init.x0 = s.problem.x_star;
        for (Eigen::Index i = 0; i < d; ++i) s.init.x0[i] += normal(rng);
    }
    if (sys == SystemKind::FB2 || sys == SystemKind::GRAD2) {
        s.init.v0 = cfg.v0 ? *cfg.v0 : Vector(Vector::Zero(d));
        if (s.init.v0->size() != d) throw ConfigError("initial.v0 has the wrong dimension");
    } else if (cfg.v0) {
        throw ConfigError(std::string(to_string(sys)) + " is first order; remove initial.v0");
    }
    return s;
}

RateCertificate certify(const ExperimentConfig& cfg, const Setup& s) {
    const double rho = s.problem.rho;
    const double beta = s.problem.beta;
    const auto& sch = s.schedule;
    switch (cfg.system) {
        case SystemKind::FB1:
            return certify_fb1(rho, beta, sch.lambda_lower, sch.lambda_upper, s.params.at("alpha"), s.eta);
        case SystemKind::GRAD1:
            return certify_grad1(rho, beta, sch.lambda_lower, s.params.at("alpha"));
        case SystemKind::FB2:
            return certify_fb2(rho, beta, s.params.at("alpha"), s.params.at("delta"), sch, certification_grid(cfg));
        case SystemKind::GRAD2:
            return certify_grad2(rho, beta, s.params.at("alpha_bar"), sch, certification_grid(cfg));
    }
    throw ConfigError("unknown system");
}

FlowRHS make_flow(const ExperimentConfig& cfg, const Setup& s) {
    const auto& p = s.problem;
    switch (cfg.system) {
        case SystemKind::FB1: return fb1_rhs(p.a, p.b, s.eta, s.schedule);
        case SystemKind::GRAD1: return grad1_rhs(*p.g, s.schedule);
        case SystemKind::FB2: return fb2_rhs(p.a, p.b, s.eta, s.schedule);
        case SystemKind::GRAD2: return grad2_rhs(*p.g, s.schedule);
    }
    throw ConfigError("unknown system");
}

namespace {

std::optional<LemmaCoefficients> coefficients_for(const ExperimentConfig& cfg, const Setup& s) {
    const double rho = s.problem.rho;
    const double beta = s.problem.beta;
    if (cfg.system == SystemKind::FB2) {
        return lemma_coefficients_fb2(rho, beta, s.params.at("alpha"), s.params.at("delta"), s.schedule);
    }
    if (cfg.system == SystemKind::GRAD2) {
        return lemma_coefficients_grad2(rho, beta, s.params.at("alpha_bar"), s.schedule);
    }
    return std::nullopt;
}

std::optional<LemmaM> initial_m(const ExperimentConfig& cfg, const Setup& s) {
    auto c = coefficients_for(cfg, s);
    if (!c) return std::nullopt;
    const Vector& x0 = s.init.x0;
    const Vector& v0 = *s.init.v0;
    double h0 = 0.0, hdot0 = 0.0;
    if (cfg.system == SystemKind::FB2) {
        const Vector e = x0 - s.problem.x_star;
        h0 = 0.5 * e.squaredNorm();
        hdot0 = e.dot(v0);
    } else {
        const auto& g = *s.problem.g;
        h0 = std::max(0.0, g.value(x0) - g.value(s.problem.x_star));
        hdot0 = g.gradient(x0).dot(v0);
    }
    return lemma_M(h0, hdot0, c->gamma(0.0), c->b2(0.0), v0.squaredNorm());
}

}  // namespace

InitialMetrics initial_metrics(const ExperimentConfig& cfg, const Setup& s) {
    InitialMetrics m;
    m.h0 = (s.init.x0 - s.problem.x_star).squaredNorm();
    if (auto f0 = s.problem.objective(s.init.x0)) m.gap0 = std::max(0.0, *f0 - *s.problem.objective(s.problem.x_star));
    if (auto lm = initial_m(cfg, s)) m.m_raw = lm->raw;
    return m;
}

double default_t_end(const Envelope& env) {
    const double target = kEnvelopeDrop * env(0.0);
    if (!(target > 0.0)) return 10.0;
    double lo = 0.0, hi = 1.0;
    while (env(hi) > target) {
        hi *= 2.0;
        if (hi > 1e6) throw ParameterError("envelope decays too slowly for a default t_end; set integrator.t_end");
    }
    for (int i = 0; i < 100 && hi - lo > 1e-9 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (env(mid) > target ? lo : hi) = mid;
    }
    return hi;
}

VerifyResult run_verify(const ExperimentConfig& cfg, const Setup& s) {
    VerifyResult r;
    r.cert = certify(cfg, s);
    const InitialMetrics im = initial_metrics(cfg, s);
    r.envelope = build_envelope(r.cert, im);
    r.t_end = cfg.integrator.t_end ? *cfg.integrator.t_end : default_t_end(r.envelope);
    if (auto lm = initial_m(cfg, s)) r.m = lm;

    r.traj = integrate(make_flow(cfg, s), s.init, r.t_end, cfg.integrator.control(), cfg.integrator.min_samples);
    r.metrics = record_metrics(r.traj, s.problem);
    r.envelope_report = verify_envelope(r.metrics, r.envelope.metric, r.envelope, cfg.tol_abs, cfg.tol_rel, 0.5,
                                        noise_floor(cfg, s, r.envelope.metric));
    bool pass = r.envelope_report.pass;

    if (cfg.system == SystemKind::GRAD1) {
        r.chain = verify_value_chain(r.metrics, s.problem.rho, s.problem.beta, r.envelope);
    } else if (cfg.system == SystemKind::GRAD2) {
        r.chain = verify_value_chain(r.metrics, s.problem.rho, s.problem.beta);
    }
    if (r.chain) pass = pass && r.chain->pass;

    if (auto c = coefficients_for(cfg, s)) {
        r.lemma_hypotheses = check_lemma_hypotheses(*c, GridOptions{r.t_end, 2000, 1e-9});
        for (const auto& q : r.lemma_hypotheses) pass = pass && q.holds;
        const LyapunovTarget target =
            cfg.system == SystemKind::FB2
                ? half_distance_target(s.problem.x_star)
                : value_gap_target(*s.problem.g, s.problem.g->value(s.problem.x_star));
        r.lyapunov = verify_lyapunov(r.traj, *c, target);
        pass = pass && r.lyapunov->pass;
    }

    r.audit = audit_instance(s.problem, kAuditPairs, cfg.seed);
    pass = pass && r.audit.pass();
    r.pass = pass;
    return r;
}

json VerifyResult::report(const ExperimentConfig& cfg, const Setup& s) const {
    json j;
    j["version"] = kVersion;
    j["problem"] = s.problem.name;
    j["descriptor"] = s.problem.descriptor;
    j["system"] = to_string(cfg.system);
    j["seed"] = cfg.seed;
    j["params"] = s.params;
    j["certificate"] = to_json(cert);
    j["envelope"] = to_json(envelope);
    j["envelope_check"] = to_json(envelope_report);
    if (m) j["M"] = {{"raw", m->raw}, {"clamped", m->clamped}};
    if (chain) j["value_chain"] = to_json(*chain);
    if (lyapunov) j["lyapunov"] = to_json(*lyapunov);
    if (!lemma_hypotheses.empty()) {
        j["lemma_hypotheses"] = json::array();
        for (const auto& q : lemma_hypotheses) j["lemma_hypotheses"].push_back(to_json(q));
    }
    j["audit"] = {{"pairs", audit.sum.pairs},
                  {"rho_pass", audit.sum.monotone_pass},
                  {"map_monotone_pass", audit.map.monotone_pass},
                  {"map_lipschitz_pass", audit.map.lipschitz_pass},
                  {"cocoercive", audit.b_cocoercive()},
                  {"cocoercivity_violation_fraction", audit.map.cocoercivity_violation_fraction},
                  {"failures", audit.failures},
                  {"pass", audit.pass()}};
    j["integrator"] = {{"solver", traj.solver},
                       {"t_end", t_end},
                       {"samples", traj.size()},
                       {"rel_tol", traj.rel_tol},
                       {"abs_tol", traj.abs_tol},
                       {"fixed_step", traj.fixed_step},
                       {"accepted", traj.stats.accepted},
                       {"rejected", traj.stats.rejected},
                       {"rhs_evals", traj.stats.rhs_evals}};
    j["pass"] = pass;
    return j;
}

namespace {

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + p.string() + ": " + ec.message());
}

int run_list(std::ostream& out) {
    for (const auto& name : registry_names()) {
        const ProblemInstance p = make_registered(name);
        out << name << "  dim=" << p.dim() << "  rho=" << p.rho << "  beta=" << p.beta
            << "  gradient_systems=" << (p.gradient_ready() ? "yes" : "no") << "  " << p.description << "\n";
    }
    return kExitOk;
}

int run_certify(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out, std::ostream& err) {
    const Setup s = prepare(cfg);
    ensure_dir(opts.out_dir);
    try {
        const RateCertificate cert = certify(cfg, s);
        json j = to_json(cert);
        j["certified"] = true;
        j["version"] = kVersion;
        write_file(opts.out_dir / "certificate.json", j.dump(2) + "\n");
        if (!opts.quiet) {
            out << to_string(cert.theorem) << " certified; decay exponent " << cert.decay_exponent;
            if (cert.gamma_lower) out << ", γ̲ = " << *cert.gamma_lower;
            if (cert.theorem == Theorem::FB1) out << ", C = " << cert.constant("C");
            out << "\n";
        }
        return kExitOk;
    } catch (const CertificationError& e) {
        json j = failures_to_json(e);
        j["version"] = kVersion;
        write_file(opts.out_dir / "certificate.json", j.dump(2) + "\n");
        err << describe_failures(e);
        return kExitFailed;
    }
}

int run_simulate(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out) {
    const Setup s = prepare(cfg);
    double t_end = 0.0;
    if (cfg.integrator.t_end) {
        t_end = *cfg.integrator.t_end;
    } else {
        try {
            t_end = default_t_end(build_envelope(certify(cfg, s), initial_metrics(cfg, s)));
        } catch (const CertificationError&) {
            throw ConfigError("parameters do not certify, so integrator.t_end must be given explicitly");
        }
    }
    const Trajectory traj = integrate(make_flow(cfg, s), s.init, t_end, cfg.integrator.control(),
                                      cfg.integrator.min_samples);
    const MetricSeries m = record_metrics(traj, s.problem);
    ensure_dir(opts.out_dir);
    std::ofstream csv(opts.out_dir / "trajectory.csv", std::ios::binary);
    write_csv(csv, traj, m);
    if (!opts.quiet) {
        out << "integrated " << to_string(cfg.system) << " on " << s.problem.name << " to t = " << t_end << " ("
            << traj.size() << " samples); final |x - x*|^2 = " << m.h.back() << "\n";
    }
    return kExitOk;
}

int run_verify_command(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out, std::ostream& err) {
    const Setup s = prepare(cfg);
    ensure_dir(opts.out_dir);
    VerifyResult r;
    try {
        r = run_verify(cfg, s);
    } catch (const CertificationError& e) {
        json j = failures_to_json(e);
        j["version"] = kVersion;
        write_file(opts.out_dir / "certificate.json", j.dump(2) + "\n");
        err << describe_failures(e);
        return kExitFailed;
    }
    json cj = to_json(r.cert);
    cj["certified"] = true;
    cj["version"] = kVersion;
    write_file(opts.out_dir / "certificate.json", cj.dump(2) + "\n");
    {
        std::ofstream csv(opts.out_dir / "trajectory.csv", std::ios::binary);
        write_csv(csv, r.traj, r.metrics);
    }
    write_file(opts.out_dir / "report.json", r.report(cfg, s).dump(2) + "\n");
    write_file(opts.out_dir / "plot.gp", plot_script("trajectory.csv", r.envelope.metric, r.envelope));
    if (!opts.quiet) {
        const auto& e = r.envelope_report;
        out << to_string(r.cert.theorem) << " on " << s.problem.name << ": envelope "
            << (e.violations == 0 ? "holds" : "VIOLATED") << " (" << e.violations << " of " << e.samples
            << " samples, max ratio " << e.max_ratio << ")";
        if (e.fitted_rate) out << ", fitted rate " << *e.fitted_rate << " vs " << e.theoretical_rate;
        out << "\n";
        if (r.chain) out << "value chain: " << (r.chain->pass ? "holds" : "VIOLATED") << "\n";
        if (r.lyapunov) out << "Lyapunov: " << (r.lyapunov->pass ? "nonincreasing" : "INCREASES") << "\n";
        out << (r.pass ? "PASS" : "FAIL") << "\n";
    }
    if (!r.pass) err << "verification failed; see " << (opts.out_dir / "report.json").string() << "\n";
    return r.pass ? kExitOk : kExitFailed;
}

std::vector<SweepAxis> sweep_axes(const ExperimentConfig& cfg, const Setup& s) {
    if (!cfg.sweep.empty()) return cfg.sweep;
    if (cfg.system != SystemKind::FB1) {
        throw ConfigError("sweep needs a 'sweep' block for " + std::string(to_string(cfg.system)));
    }
    // alpha below its strict bound 2 rho beta^2 lambda_lower, eta across four decades
    const double bound = 2.0 * s.problem.rho * s.problem.beta * s.problem.beta * s.schedule.lambda_lower;
    return {SweepAxis{"alpha", 1e-3 * bound, 0.999 * bound, 25, true}, SweepAxis{"eta", 1e-2, 1e2, 25, true}};
}

int run_sweep(const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& out) {
    const Setup base = prepare(cfg);
    const std::vector<SweepAxis> axes = sweep_axes(cfg, base);
    std::vector<std::vector<double>> values;
    std::size_t cells = 1;
    for (const auto& a : axes) {
        values.push_back(a.values());
        cells *= values.back().size();
    }
    ensure_dir(opts.out_dir);
    std::ofstream csv(opts.out_dir / "sweep.csv", std::ios::binary);
    for (const auto& a : axes) csv << a.name << ',';
    csv << "feasible,decay_exponent,transient_exponent,failures\n";

    std::size_t feasible = 0;
    double best_rate = -1.0;
    std::vector<double> best;
    std::vector<std::size_t> idx(axes.size(), 0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        std::size_t rem = cell;
        for (std::size_t k = axes.size(); k-- > 0;) {
            idx[k] = rem % values[k].size();
            rem /= values[k].size();
        }
        ExperimentConfig c = cfg;
        std::vector<double> point;
        for (std::size_t k = 0; k < axes.size(); ++k) {
            point.push_back(values[k][idx[k]]);
            c.params[axes[k].name] = point.back();
        }
        for (double v : point) csv << std::setprecision(17) << v << ',';
        try {
            const RateCertificate cert = certify(c, prepare(c));
            ++feasible;
            csv << "1," << cert.decay_exponent << ',';
            if (cert.transient_exponent) csv << *cert.transient_exponent;
            csv << ",\n";
            if (cert.decay_exponent > best_rate) {
                best_rate = cert.decay_exponent;
                best = point;
            }
        } catch (const CertificationError& e) {
            csv << "0,,," << csv_escape(failure_names(e)) << "\n";
        } catch (const ParameterError& e) {
            csv << "0,,," << csv_escape(e.what()) << "\n";
        }
    }
    if (!opts.quiet) {
        out << feasible << " of " << cells << " cells certify";
        if (!best.empty()) {
            out << "; best decay exponent " << best_rate << " at";
            for (std::size_t k = 0; k < axes.size(); ++k) out << ' ' << axes[k].name << '=' << best[k];
        }
        out << "\n";
    }
    return kExitOk;
}

}  // namespace

int execute(const std::string& command, const std::optional<fs::path>& config, const RunOptions& opts,
            std::ostream& out, std::ostream& err) {
    try {
        if (command == "list") return run_list(out);
        if (command != "certify" && command != "simulate" && command != "verify" && command != "sweep") {
            err << "unknown command '" << command << "'\n";
            return kExitMalformed;
        }
        if (!config) {
            err << command << " needs --config\n";
            return kExitMalformed;
        }
        ExperimentConfig cfg = load_config(*config);
        if (opts.seed) cfg.seed = *opts.seed;
        if (command == "certify") return run_certify(cfg, opts, out, err);
        if (command == "simulate") return run_simulate(cfg, opts, out);
        if (command == "verify") return run_verify_command(cfg, opts, out, err);
        return run_sweep(cfg, opts, out);
    } catch (const UnknownProblem& e) {
        err << "error: " << e.what() << "\n";
        return kExitUnknownProblem;
    } catch (const IncompatibleSystem& e) {
        err << "error: " << e.what() << "\n";
        return kExitIncompatible;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const json::exception& e) {
        err << "error: malformed config: " << e.what() << "\n";
        return kExitMalformed;
    } catch (const CertificationError& e) {
        err << describe_failures(e);
        return kExitFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailed;
    }
}

}  // namespace fbflow
