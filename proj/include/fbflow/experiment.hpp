#pragma once

#include "fbflow/analysis.hpp"
#include "fbflow/integrate.hpp"
#include "fbflow/problems.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fbflow {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailed = 1,
    kExitUnknownProblem = 2,
    kExitIncompatible = 3,
    kExitMalformed = 4,
};

/// The config does not parse or is missing / contradicts required fields.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested system cannot run on the instance (gradient systems need f = 0).
class IncompatibleSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SystemKind { FB1, GRAD1, FB2, GRAD2 };

const char* to_string(SystemKind s);
SystemKind system_from_string(const std::string& s);
Theorem theorem_for(SystemKind s);

/// A parameter given either as a number or as a named profile:
///   {"profile": "constant", "value": v}
///   {"profile": "exp_approach", "start": a, "limit": b, "rate": r}  ->  b + (a - b) exp(-r t)
struct ParamProfile {
    double start = 0.0;
    double limit = 0.0;
    double rate = 0.0;

    static ParamProfile constant(double v) { return {v, v, 0.0}; }
    static ParamProfile parse(const nlohmann::json& j, const std::string& key);

    bool is_constant() const { return rate == 0.0 || start == limit; }
    double lower() const;
    double upper() const;
    bool nonincreasing() const { return is_constant() || start >= limit; }
    ScalarFn fn() const;
};

struct IntegratorConfig {
    std::optional<double> t_end;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    std::optional<double> fixed_step;
    std::size_t min_samples = kMinSamples;

    StepControl control() const;
};

struct SweepAxis {
    std::string name;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 1;
    bool log = false;

    std::vector<double> values() const;
};

struct ExperimentConfig {
    nlohmann::json problem;
    SystemKind system = SystemKind::FB1;
    nlohmann::json params = nlohmann::json::object();
    std::optional<Vector> x0;
    std::optional<Vector> v0;
    IntegratorConfig integrator;
    double tol_rel = 1e-6;
    double tol_abs = 1e-8;
    std::vector<SweepAxis> sweep;
    std::uint64_t seed = 0;
};

/// Throws ConfigError on anything malformed.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Everything resolved from a config before integration.
struct Setup {
    ProblemInstance problem;
    Schedule schedule;
    double eta = 0.0;
    /// Resolved scalar parameters (alpha, delta, eta, alpha_bar, lambda(0), gamma(0)).
    std::map<std::string, double> params;
    InitialState init;
};

/// Throws UnknownProblem, IncompatibleSystem, ConfigError or ParameterError.
Setup prepare(const ExperimentConfig& cfg);
RateCertificate certify(const ExperimentConfig& cfg, const Setup& s);
FlowRHS make_flow(const ExperimentConfig& cfg, const Setup& s);
InitialMetrics initial_metrics(const ExperimentConfig& cfg, const Setup& s);

/// Smallest t with envelope(t) <= 1e-10 envelope(0).
double default_t_end(const Envelope& env);

struct VerifyResult {
    RateCertificate cert;
    Envelope envelope;
    Trajectory traj;
    MetricSeries metrics;
    RateReport envelope_report;
    std::optional<ChainReport> chain;
    std::optional<LyapunovReport> lyapunov;
    std::vector<Inequality> lemma_hypotheses;
    std::optional<LemmaM> m;
    InstanceAudit audit;
    double t_end = 0.0;
    bool pass = false;

    nlohmann::json report(const ExperimentConfig& cfg, const Setup& s) const;
};

/// certify + integrate + envelope / chain / Lyapunov checks. Throws
/// CertificationError when the parameters do not certify.
VerifyResult run_verify(const ExperimentConfig& cfg, const Setup& s);

struct RunOptions {
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

/// Runs one command and maps every failure mode to its exit code.
int execute(const std::string& command, const std::optional<std::filesystem::path>& config, const RunOptions& opts,
            std::ostream& out, std::ostream& err);

}  // namespace fbflow
