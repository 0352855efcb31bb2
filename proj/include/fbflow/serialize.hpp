#pragma once

#include "fbflow/analysis.hpp"

#include <json.hpp>

#include <string>

namespace fbflow {

inline constexpr const char* kVersion = "0.1.0";

nlohmann::json to_json(const Inequality& q);
nlohmann::json to_json(const RateCertificate& cert);
RateCertificate certificate_from_json(const nlohmann::json& j);
nlohmann::json failures_to_json(const CertificationError& e);

nlohmann::json to_json(const Envelope& env);
nlohmann::json to_json(const RateReport& r);
nlohmann::json to_json(const ChainReport& r);
nlohmann::json to_json(const LyapunovReport& r);

/// Gnuplot script drawing the metric column of `csv_name` against t on a log
/// scale together with the envelope.
std::string plot_script(const std::string& csv_name, MetricKind metric, const Envelope& env);

}  // namespace fbflow
