// qc: simulate fleets, serve and feed the gateway, run analyses, process walks.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "qc/error.hpp"

namespace fs = std::filesystem;
using namespace qc;
using namespace qc::cli;

namespace {

struct Flags {
  std::string config;
  std::string from, to;
  std::string train_from, train_to;
  std::string out, archive;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> nodes;
  std::string metric;
  std::optional<double> k, quorum;
  std::string host;
  std::optional<int> port;
};

Timestamp flag_time(const std::string& text, const char* flag) {
  try {
    return parse_iso8601(text);
  } catch (const ParseError& e) {
    throw UsageError(std::string(flag) + ": " + e.detail());
  }
}

std::optional<std::pair<Timestamp, Timestamp>> flag_window(const std::string& from, const std::string& to,
                                                           const std::optional<std::pair<Timestamp, Timestamp>>& base,
                                                           const char* from_flag, const char* to_flag) {
  if (from.empty() && to.empty()) return std::nullopt;
  if ((from.empty() || to.empty()) && !base) {
    throw UsageError(std::string(from_flag) + " and " + to_flag + " must be given together");
  }
  auto w = base.value_or(std::pair<Timestamp, Timestamp>{});
  if (!from.empty()) w.first = flag_time(from, from_flag);
  if (!to.empty()) w.second = flag_time(to, to_flag);
  if (w.second <= w.first) {
    throw Error(ErrorCode::invalid_range, std::string(from_flag) + " must precede " + to_flag);
  }
  return w;
}

RunConfig build_config(const Flags& f, Selection& sel) {
  RunConfig config = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (!f.archive.empty()) config.archive = f.archive;
  if (!f.out.empty()) config.output = f.out;
  if (f.seed) apply_seed(config, *f.seed);
  if (f.k) config.analysis.k = *f.k;
  if (f.quorum) config.analysis.quorum = *f.quorum;
  if (!f.host.empty()) config.gateway.host = f.host;
  if (f.port) config.gateway.port = *f.port;
  if (auto w = flag_window(f.from, f.to, config.window, "--from", "--to")) {
    config.window = w;
    sel.window = w;
  }
  if (auto w = flag_window(f.train_from, f.train_to, config.analysis.train_window, "--train-from", "--train-to")) {
    config.analysis.train_window = w;
  }
  config.validate();
  sel.nodes = f.nodes;
  if (!f.metric.empty()) {
    parse_metric(f.metric);
    sel.metric = f.metric;
  }
  return config;
}

int report(const std::string& code, const std::string& message, int exit_code) {
  std::cerr << "qc: error [" << code << "]: " << message << '\n';
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Community sensing toolkit: node emulator, record archive, ingestion gateway, analyses, walk processing"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config, "Run configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--from", f.from, "Window start, ISO-8601 UTC (inclusive)");
  app.add_option("--to", f.to, "Window end, ISO-8601 UTC (exclusive)");
  app.add_option("--train-from", f.train_from, "Signature training window start");
  app.add_option("--train-to", f.train_to, "Signature training window end");
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--archive", f.archive, "Archive root");
  app.add_option("--seed", f.seed, "Run seed; reseeds the scenario and every node");
  app.add_option("--nodes", f.nodes, "Comma-separated node ids")->delimiter(',');
  app.add_option("--metric", f.metric, "Channel name, e.g. dust_p001cf");
  app.add_option("-k", f.k, "Anomaly threshold on |robust z|");
  app.add_option("--quorum", f.quorum, "Fleet fraction for a network-wide anomaly");
  app.add_option("--host", f.host, "Gateway host");
  app.add_option("--port", f.port, "Gateway port (0 picks a free port when serving)");

  auto* simulate = app.add_subcommand("simulate", "Emulate the fleet over the window and append to the archive");
  auto* serve = app.add_subcommand("serve", "Run the HTTP gateway over the archive");

  auto* ingest = app.add_subcommand("ingest", "Register nodes and post archive records to a running gateway");
  std::string source;
  std::vector<std::string> ingest_sessions;
  ingest->add_option("--source", source, "Archive to read (default: the config archive)")->check(CLI::ExistingDirectory);
  ingest->add_option("--session", ingest_sessions, "Walk session file to upload")->check(CLI::ExistingFile);

  auto* analyze = app.add_subcommand("analyze", "Run an analysis over the archive");
  analyze->require_subcommand(1);
  auto* hourly = analyze->add_subcommand("hourly", "Hourly aggregation per node");
  auto* regress = analyze->add_subcommand("regress", "OLS of --metric (default dust) on --x (default humidity)");
  std::string x_metric = "humidity_pct";
  regress->add_option("--x", x_metric, "Independent channel");
  auto* diff = analyze->add_subcommand("diff", "Paired hourly differential A - B (--nodes A,B)");
  auto* signature = analyze->add_subcommand("signature", "Hour-of-week signature per node");
  auto* anomaly = analyze->add_subcommand("anomaly", "Signature-based anomaly detection per node");
  auto* scope = analyze->add_subcommand("scope", "Detection plus localized/network-wide classification");

  auto* walk = app.add_subcommand("walk", "Process citizen-science walk sessions");
  walk->require_subcommand(1);
  std::vector<std::string> sessions;
  auto* walk_align = walk->add_subcommand("align", "Position each sample from the GPS trace");
  walk_align->add_option("sessions", sessions, "Session files")->required()->check(CLI::ExistingFile);
  auto* walk_geojson = walk->add_subcommand("geojson", "Export trajectories and annotations as GeoJSON");
  walk_geojson->add_option("sessions", sessions, "Session files")->required()->check(CLI::ExistingFile);
  auto* walk_series = walk->add_subcommand("series", "Per-team time series against elapsed time");
  std::string calibration;
  walk_series->add_option("sessions", sessions, "Session files")->required()->check(CLI::ExistingFile);
  walk_series->add_option("--calibration", calibration, "Calibration model to apply")->check(CLI::ExistingFile);
  auto* walk_calibrate = walk->add_subcommand("calibrate", "Fit a low-cost device against a reference");
  std::string low_cost, reference;
  double tolerance_s = 10.0;
  walk_calibrate->add_option("session", low_cost, "Low-cost session file")->required()->check(CLI::ExistingFile);
  walk_calibrate->add_option("--reference", reference, "Reference session file")
      ->required()
      ->check(CLI::ExistingFile);
  walk_calibrate->add_option("--tolerance", tolerance_s, "Pairing tolerance in seconds")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto to_paths = [](const std::vector<std::string>& v) { return std::vector<fs::path>(v.begin(), v.end()); };

  try {
    Selection sel;
    const RunConfig config = build_config(f, sel);
    auto& out = std::cout;
    if (*simulate) {
      cmd_simulate(config, out);
    } else if (*serve) {
      cmd_serve(config, out);
    } else if (*ingest) {
      std::optional<fs::path> src;
      if (!source.empty()) src = source;
      cmd_ingest(config, sel, src, to_paths(ingest_sessions), out);
    } else if (*hourly) {
      cmd_analyze_hourly(config, sel, out);
    } else if (*regress) {
      cmd_analyze_regress(config, sel, x_metric, out);
    } else if (*diff) {
      cmd_analyze_diff(config, sel, out);
    } else if (*signature) {
      cmd_analyze_signature(config, sel, out);
    } else if (*anomaly) {
      cmd_analyze_anomaly(config, sel, out);
    } else if (*scope) {
      cmd_analyze_scope(config, sel, out);
    } else if (*walk_align) {
      cmd_walk_align(config, to_paths(sessions), out);
    } else if (*walk_geojson) {
      cmd_walk_geojson(config, to_paths(sessions), out);
    } else if (*walk_series) {
      std::optional<fs::path> cal;
      if (!calibration.empty()) cal = calibration;
      cmd_walk_series(config, sel, to_paths(sessions), cal, out);
    } else if (*walk_calibrate) {
      cmd_walk_calibrate(config, sel, low_cost, reference, tolerance_s, out);
    }
    out.flush();
  } catch (const UsageError& e) {
    return report("usage", e.what(), kExitUsage);
  } catch (const Error& e) {
    return report(std::string(to_string(e.code())), e.what(), e.code() == ErrorCode::storage ? kExitIo : kExitData);
  } catch (const fs::filesystem_error& e) {
    return report("storage-error", e.what(), kExitIo);
  } catch (const std::exception& e) {
    return report("error", e.what(), kExitData);
  }
  return kExitOk;
}
