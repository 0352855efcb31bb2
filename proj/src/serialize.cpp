#include "fbflow/serialize.hpp"

#include <sstream>

namespace fbflow {

using nlohmann::json;

json to_json(const Inequality& q) {
    json j = {{"name", q.name},
              {"lhs", q.lhs},
              {"rhs", q.rhs},
              {"relation", q.relation == Relation::Less ? "<" : "<="},
              {"slack", q.slack},
              {"holds", q.holds}};
    if (q.at_time) j["at_time"] = *q.at_time;
    return j;
}

json to_json(const RateCertificate& cert) {
    json j;
    j["theorem"] = to_string(cert.theorem);
    j["inputs"] = cert.inputs;
    j["constants"] = cert.constants;
    j["decay_exponent"] = cert.decay_exponent;
    if (cert.transient_exponent) j["transient_exponent"] = *cert.transient_exponent;
    if (cert.gamma_lower) j["gamma_lower"] = *cert.gamma_lower;
    j["inequalities"] = json::array();
    for (const auto& q : cert.inequalities) j["inequalities"].push_back(to_json(q));
    return j;
}

RateCertificate certificate_from_json(const json& j) {
    RateCertificate cert;
    cert.theorem = theorem_from_string(j.at("theorem").get<std::string>());
    cert.inputs = j.at("inputs").get<std::map<std::string, double>>();
    cert.constants = j.at("constants").get<std::map<std::string, double>>();
    cert.decay_exponent = j.at("decay_exponent").get<double>();
    if (j.contains("transient_exponent")) cert.transient_exponent = j["transient_exponent"].get<double>();
    if (j.contains("gamma_lower")) cert.gamma_lower = j["gamma_lower"].get<double>();
    for (const auto& e : j.at("inequalities")) {
        Inequality q;
        q.name = e.at("name").get<std::string>();
        q.lhs = e.at("lhs").get<double>();
        q.rhs = e.at("rhs").get<double>();
        q.relation = e.at("relation").get<std::string>() == "<" ? Relation::Less : Relation::LessEqual;
        q.slack = e.at("slack").get<double>();
        if (e.contains("at_time")) q.at_time = e["at_time"].get<double>();
        q.holds = e.at("holds").get<bool>();
        cert.inequalities.push_back(q);
    }
    return cert;
}

json failures_to_json(const CertificationError& e) {
    json j;
    j["theorem"] = to_string(e.theorem());
    j["certified"] = false;
    j["failures"] = json::array();
    for (const auto& q : e.failures()) j["failures"].push_back(to_json(q));
    return j;
}

json to_json(const Envelope& env) {
    json j = {{"theorem", to_string(env.theorem)},
              {"metric", to_string(env.metric)},
              {"initial", env.initial},
              {"decay_exponent", env.decay_exponent()},
              {"expression", env.gnuplot_expression()}};
    if (env.theorem == Theorem::FB2 || env.theorem == Theorem::GRAD2) {
        j["gamma_lower"] = env.gamma_lower;
        j["M"] = env.m;
        j["lemma_case"] = to_string(env.lemma_case);
    } else {
        j["rate"] = env.rate;
    }
    return j;
}

json to_json(const RateReport& r) {
    json j = {{"metric", to_string(r.metric)},
              {"theoretical_rate", r.theoretical_rate},
              {"max_ratio", r.max_ratio},
              {"max_relative_violation", r.max_relative_violation},
              {"violations", r.violations},
              {"samples", r.samples},
              {"tol_abs", r.tol_abs},
              {"tol_rel", r.tol_rel},
              {"rate_ok", r.rate_ok},
              {"pass", r.pass}};
    j["fitted_rate"] = r.fitted_rate ? json(*r.fitted_rate) : json(nullptr);
    if (!r.note.empty()) j["note"] = r.note;
    return j;
}

json to_json(const ChainReport& r) {
    json j = {{"samples", r.samples}, {"pass", r.pass}, {"checks", json::array()}};
    for (const auto& c : r.checks) {
        j["checks"].push_back({{"name", c.name}, {"violations", c.violations}, {"worst_excess", c.worst_excess}});
    }
    return j;
}

json to_json(const LyapunovReport& r) {
    return {{"samples", r.values.size()},
            {"L0", r.values.empty() ? 0.0 : r.values.front()},
            {"max_increase_rate", r.max_increase_rate},
            {"tolerance", r.tolerance},
            {"pass", r.pass}};
}

std::string plot_script(const std::string& csv_name, MetricKind metric, const Envelope& env) {
    std::ostringstream os;
    const char* column = metric == MetricKind::Distance ? "h" : "gap";
    os << "set datafile separator ','\n"
       << "set logscale y\n"
       << "set xlabel 't'\n"
       << "set ylabel '" << (metric == MetricKind::Distance ? "|x(t) - x*|^2" : "F(x(t)) - F(x*)") << "'\n"
       << "set key top right\n"
       << "envelope(x) = " << env.gnuplot_expression() << "\n"
       << "plot '" << csv_name << "' using 't':'" << column << "' with lines title '" << column << "', \\\n"
       << "     envelope(x) with lines dashtype 2 title 'envelope'\n";
    return os.str();
}

}  // namespace fbflow
