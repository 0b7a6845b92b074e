#pragma once

#include <span>
#include <string>

#include "json.hpp"
#include "qc/analytics/differential.hpp"
#include "qc/analytics/hourly.hpp"
#include "qc/analytics/regression.hpp"
#include "qc/analytics/scope.hpp"
#include "qc/analytics/signature.hpp"

// Plot-ready CSV tables and JSON summaries. Column layouts are listed in
// docs/outputs.md; every CSV starts with a header row.
namespace qc::report {

std::string hourly_csv(const HourlySeries& series);
nlohmann::json hourly_json(const HourlySeries& series);

std::string scatter_csv(std::string_view x_name, std::span<const double> x, std::string_view y_name,
                        std::span<const double> y);
nlohmann::json regression_json(const RegressionResult& result);

std::string differential_csv(const DifferentialResult& result, const DifferentialOptions& options);
std::string histogram_csv(const DifferentialResult& result);
nlohmann::json differential_json(const DifferentialResult& result, const DifferentialOptions& options);

std::string signature_csv(const Signature& signature);
nlohmann::json signature_json(const Signature& signature);
Signature signature_from_json(const nlohmann::json& j);

std::string events_csv(std::span<const AnomalyEvent> events);
nlohmann::json event_json(const AnomalyEvent& event);
nlohmann::json detection_json(const DetectionReport& report);

std::string scoped_csv(std::span<const ScopedAnomaly> anomalies);
nlohmann::json scoped_json(std::span<const ScopedAnomaly> anomalies);

}  // namespace qc::report
