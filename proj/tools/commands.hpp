#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "run_config.hpp"

namespace qc::cli {

enum ExitCode { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitIo = 4 };

// Bad flag combination detected after parsing; exits with kExitUsage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-invocation selections layered over the RunConfig.
struct Selection {
  std::vector<std::string> nodes;
  std::optional<std::string> metric;
  std::optional<std::pair<Timestamp, Timestamp>> window;
};

void cmd_simulate(const RunConfig& config, std::ostream& out);

// Registers the fleet (or each session's device) with the gateway, then posts
// the archive's records in the window. Sessions are walk session files.
void cmd_ingest(const RunConfig& config, const Selection& sel, const std::optional<std::filesystem::path>& source,
                const std::vector<std::filesystem::path>& sessions, std::ostream& out);

// Blocks until SIGINT or SIGTERM.
void cmd_serve(const RunConfig& config, std::ostream& out);

void cmd_analyze_hourly(const RunConfig& config, const Selection& sel, std::ostream& out);
void cmd_analyze_regress(const RunConfig& config, const Selection& sel, const std::string& x_metric,
                         std::ostream& out);
void cmd_analyze_diff(const RunConfig& config, const Selection& sel, std::ostream& out);
void cmd_analyze_signature(const RunConfig& config, const Selection& sel, std::ostream& out);
void cmd_analyze_anomaly(const RunConfig& config, const Selection& sel, std::ostream& out);
void cmd_analyze_scope(const RunConfig& config, const Selection& sel, std::ostream& out);

void cmd_walk_align(const RunConfig& config, const std::vector<std::filesystem::path>& sessions, std::ostream& out);
void cmd_walk_geojson(const RunConfig& config, const std::vector<std::filesystem::path>& sessions,
                      std::ostream& out);
void cmd_walk_series(const RunConfig& config, const Selection& sel, const std::vector<std::filesystem::path>& sessions,
                     const std::optional<std::filesystem::path>& calibration, std::ostream& out);
void cmd_walk_calibrate(const RunConfig& config, const Selection& sel, const std::filesystem::path& low_cost,
                        const std::filesystem::path& reference, double tolerance_s, std::ostream& out);

}  // namespace qc::cli
