#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qc/analytics/differential.hpp"
#include "qc/node_sim/scenario.hpp"
#include "qc/node_sim/sensors.hpp"
#include "qc/time.hpp"

namespace qc::cli {

struct AnalysisParams {
  double k = 3.5;
  double quorum = 0.75;
  Millis overlap_window = kHour;
  std::optional<Millis> merge_gap;
  HourWindow day_window{8.0, 18.0};
  HourWindow evening_window{20.0, 6.0};
  int utc_offset_minutes = 0;
  double histogram_bin_width = 1.0;
  HourlyStat stat = HourlyStat::mean;
  std::optional<std::pair<Timestamp, Timestamp>> train_window;
};

struct GatewayAddress {
  std::string host = "127.0.0.1";
  int port = 8080;
};

// One JSON document describing a run; relative paths resolve against the
// directory holding the file. Command-line flags override every field.
struct RunConfig {
  std::filesystem::path archive = "archive";
  std::filesystem::path output = "out";
  std::optional<EnvironmentScenario> scenario;
  std::optional<std::pair<Timestamp, Timestamp>> window;
  std::optional<std::uint64_t> seed;
  std::vector<NodeConfig> fleet;
  AnalysisParams analysis;
  GatewayAddress gateway;

  // Throws ValidationError for out-of-range parameters.
  void validate() const;
};

RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

// Reseeds the scenario and every fleet node from one run seed.
void apply_seed(RunConfig& config, std::uint64_t seed);

}  // namespace qc::cli
