#include "commands.hpp"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include "qc/analytics/differential.hpp"
#include "qc/analytics/export.hpp"
#include "qc/analytics/hourly.hpp"
#include "qc/analytics/regression.hpp"
#include "qc/analytics/scope.hpp"
#include "qc/analytics/signature.hpp"
#include "qc/error.hpp"
#include "qc/fieldkit/walk.hpp"
#include "qc/gateway/gateway.hpp"
#include "qc/gateway/http.hpp"
#include "qc/node_sim/simulate.hpp"
#include "qc/store/codec.hpp"
#include "qc/store/record_store.hpp"

namespace qc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Window = std::pair<Timestamp, Timestamp>;

void write_file(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out) throw Error(ErrorCode::storage, "cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

std::string window_text(const Window& w) { return "[" + format_iso8601(w.first) + ", " + format_iso8601(w.second) + ")"; }

json window_json(const Window& w) { return {{"from", format_iso8601(w.first)}, {"to", format_iso8601(w.second)}}; }

Metric metric_or(const Selection& sel, Metric fallback) { return sel.metric ? parse_metric(*sel.metric) : fallback; }

std::string metric_name(Metric m) { return std::string(to_string(m)); }

// Flags, then the fleet, then whatever the archive holds.
std::vector<std::string> resolve_nodes(const RunConfig& config, const Selection& sel, const RecordStore& store) {
  if (!sel.nodes.empty()) return sel.nodes;
  std::vector<std::string> ids;
  for (const auto& node : config.fleet) ids.push_back(node.node_id);
  if (ids.empty()) ids = store.node_ids();
  if (ids.empty()) throw Error(ErrorCode::no_data, "archive " + store.root().string() + " holds no nodes");
  return ids;
}

// Flags, then the config window, then the union of the nodes' stored extents.
Window resolve_window(const RunConfig& config, const Selection& sel, const RecordStore& store,
                      const std::vector<std::string>& nodes) {
  if (sel.window) return *sel.window;
  if (config.window) return *config.window;
  std::optional<Window> span;
  for (const auto& id : nodes) {
    const auto ext = store.extent(id);
    if (!ext) continue;
    const Window w{ext->first, ext->second + Millis{1}};
    span = span ? Window{std::min(span->first, w.first), std::max(span->second, w.second)} : w;
  }
  if (!span) throw Error(ErrorCode::no_data, "no stored records for the selected nodes");
  return *span;
}

std::vector<SampleRecord> node_records(const RecordStore& store, const std::string& node, const Window& w) {
  const std::string ids[] = {node};
  auto records = store.query(ids, w.first, w.second);
  if (records.empty()) throw Error(ErrorCode::no_data, "no records for '" + node + "' in " + window_text(w));
  return records;
}

RecordStore open_archive(const RunConfig& config) {
  std::error_code ec;
  if (!fs::is_directory(config.archive, ec)) {
    throw Error(ErrorCode::storage, "archive " + config.archive.string() + " does not exist");
  }
  return RecordStore(config.archive);
}

const NodeConfig* fleet_node(const RunConfig& config, const std::string& id) {
  for (const auto& node : config.fleet) {
    if (node.node_id == id) return &node;
  }
  return nullptr;
}

DifferentialOptions differential_options(const AnalysisParams& a) {
  DifferentialOptions o;
  o.day = a.day_window;
  o.evening = a.evening_window;
  o.utc_offset_minutes = a.utc_offset_minutes;
  o.bin_width = a.histogram_bin_width;
  o.stat = a.stat;
  return o;
}

struct NodeDetection {
  std::string node_id;
  Signature signature;
  DetectionReport report;
};

std::vector<NodeDetection> run_detection(const RunConfig& config, const RecordStore& store,
                                         const std::vector<std::string>& nodes, Metric metric, const Window& window) {
  const Window train = config.analysis.train_window.value_or(window);
  DetectorOptions opts;
  opts.k = config.analysis.k;
  opts.merge_gap = config.analysis.merge_gap;
  std::vector<NodeDetection> out;
  for (const auto& id : nodes) {
    NodeDetection d;
    d.node_id = id;
    d.signature = build_signature(node_records(store, id, train), metric, train);
    d.report = detect_anomalies(node_records(store, id, window), d.signature, opts);
    out.push_back(std::move(d));
  }
  return out;
}

std::string file_tag(std::string text) {
  for (auto& c : text) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return text;
}

}  // namespace

void cmd_simulate(const RunConfig& config, std::ostream& out) {
  if (!config.scenario) throw UsageError("simulate needs a scenario in the config");
  if (config.fleet.empty()) throw UsageError("simulate needs a fleet in the config");
  if (!config.window) throw UsageError("simulate needs --from/--to or a config window");
  const auto [t0, t1] = *config.window;
  if (t1 <= t0) throw Error(ErrorCode::invalid_range, "simulation window is empty");
  RecordStore store(config.archive);
  std::size_t total = 0, added = 0, duplicates = 0;
  for (const auto& node : config.fleet) {
    const auto records = simulate_node(node, *config.scenario, t0, t1);
    const auto result = store.append(records);
    out << node.node_id << " records=" << records.size() << " added=" << result.added
        << " duplicates=" << result.duplicates << '\n';
    total += records.size();
    added += result.added;
    duplicates += result.duplicates;
  }
  out << "total records=" << total << " added=" << added << " duplicates=" << duplicates << '\n';
}

void cmd_ingest(const RunConfig& config, const Selection& sel, const std::optional<fs::path>& source,
                const std::vector<fs::path>& sessions, std::ostream& out) {
  GatewayClient client(config.gateway.host, config.gateway.port);
  auto register_once = [&](const NodeRegistration& reg) {
    try {
      client.register_node(reg);
      out << reg.node_id << " registered\n";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::conflict) throw;
      out << reg.node_id << " already registered\n";
    }
  };

  if (!sessions.empty()) {
    for (const auto& path : sessions) {
      const auto trace = load_walk_session(path.string());
      NodeRegistration reg;
      reg.node_id = trace.device.node_id;
      if (!trace.gps.empty()) reg.location = {trace.gps.front().lat, trace.gps.front().lon, 0.0};
      reg.placement = Placement::ground;
      reg.team_id = trace.team_id;
      register_once(reg);
      const auto result = client.ingest(reg.node_id, trace.samples);
      out << reg.node_id << " team=" << trace.team_id << " accepted=" << result.accepted
          << " duplicates=" << result.duplicates << '\n';
    }
    if (!source && sel.nodes.empty()) return;
  }

  RunConfig from = config;
  if (source) from.archive = *source;
  const auto store = open_archive(from);
  const auto nodes = resolve_nodes(from, sel, store);
  std::size_t accepted = 0, duplicates = 0;
  for (const auto& id : nodes) {
    if (const auto* node = fleet_node(config, id)) {
      NodeRegistration reg;
      reg.node_id = id;
      reg.location = node->location;
      reg.placement = node->placement;
      register_once(reg);
    }
    const auto window = resolve_window(from, sel, store, {id});
    const std::string ids[] = {id};
    const auto records = store.query(ids, window.first, window.second);
    const auto result = client.ingest(id, records);
    out << id << " accepted=" << result.accepted << " duplicates=" << result.duplicates << '\n';
    accepted += result.accepted;
    duplicates += result.duplicates;
  }
  out << "total accepted=" << accepted << " duplicates=" << duplicates << '\n';
}

void cmd_serve(const RunConfig& config, std::ostream& out) {
  // Block the stop signals before any thread starts so only the waiter sees them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  Gateway gateway(config.archive);
  GatewayServer server(gateway);
  const int port = server.bind(config.gateway.host, config.gateway.port);
  out << "listening on " << config.gateway.host << ":" << port << " archive=" << config.archive.string() << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&stop_signals, &sig);
    server.stop();
  });
  server.serve();
  // serve() can also return on its own (listener failure); release the waiter.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  out << "stopped" << std::endl;
}

void cmd_analyze_hourly(const RunConfig& config, const Selection& sel, std::ostream& out) {
  const auto store = open_archive(config);
  const auto nodes = resolve_nodes(config, sel, store);
  const auto window = resolve_window(config, sel, store, nodes);
  const auto metric = metric_or(sel, Metric::dust_p001cf);
  json summary{{"metric", metric_name(metric)},
               {"window", window_json(window)},
               {"stat", config.analysis.stat == HourlyStat::mean ? "mean" : "median"},
               {"nodes", json::array()}};
  for (const auto& id : nodes) {
    const auto series = hourly_aggregate(node_records(store, id, window), metric, config.analysis.stat);
    const auto path = config.output / ("hourly_" + file_tag(id) + "_" + metric_name(metric) + ".csv");
    write_file(path, report::hourly_csv(series));
    summary["nodes"].push_back(report::hourly_json(series));
    out << id << " hours=" << series.points.size() << " -> " << path.string() << '\n';
  }
  write_json(config.output / ("hourly_" + metric_name(metric) + ".json"), summary);
}

void cmd_analyze_regress(const RunConfig& config, const Selection& sel, const std::string& x_metric,
                         std::ostream& out) {
  const auto store = open_archive(config);
  const auto nodes = resolve_nodes(config, sel, store);
  const auto window = resolve_window(config, sel, store, nodes);
  const auto x_m = parse_metric(x_metric);
  const auto y_m = metric_or(sel, Metric::dust_p001cf);
  std::vector<double> x, y;
  for (const auto& r : store.query(nodes, window.first, window.second)) {
    if (!r.has(x_m) || !r.has(y_m)) continue;
    x.push_back(r.value(x_m));
    y.push_back(r.value(y_m));
  }
  if (x.empty()) {
    throw Error(ErrorCode::no_data, "no samples with both " + metric_name(x_m) + " and " + metric_name(y_m) + " in " +
                                        window_text(window));
  }
  const auto result = ols(x, y);
  const auto stem = "regress_" + metric_name(x_m) + "_" + metric_name(y_m);
  write_file(config.output / (stem + ".csv"), report::scatter_csv(metric_name(x_m), x, metric_name(y_m), y));
  json summary = report::regression_json(result);
  summary["x"] = metric_name(x_m);
  summary["y"] = metric_name(y_m);
  summary["nodes"] = nodes;
  summary["window"] = window_json(window);
  write_json(config.output / (stem + ".json"), summary);
  out << "n=" << result.n << " slope=" << result.slope << " intercept=" << result.intercept << " r=" << result.r
      << " p=" << result.p_value << '\n';
}

void cmd_analyze_diff(const RunConfig& config, const Selection& sel, std::ostream& out) {
  const auto store = open_archive(config);
  std::vector<std::string> pair = sel.nodes;
  if (pair.empty()) {
    // Default pairing: first roof node minus first ground node of the fleet.
    const NodeConfig *roof = nullptr, *ground = nullptr;
    for (const auto& node : config.fleet) {
      if (!roof && node.placement == Placement::roof) roof = &node;
      if (!ground && node.placement == Placement::ground) ground = &node;
    }
    if (roof && ground) pair = {roof->node_id, ground->node_id};
  }
  if (pair.size() != 2) throw UsageError("diff needs exactly two nodes: --nodes A,B computes A - B");
  const auto window = resolve_window(config, sel, store, pair);
  const auto metric = metric_or(sel, Metric::temperature_c);
  const auto options = differential_options(config.analysis);
  const auto result = differential_distribution(node_records(store, pair[0], window),
                                                node_records(store, pair[1], window), metric, options);
  const auto stem = "diff_" + file_tag(pair[0]) + "_" + file_tag(pair[1]) + "_" + metric_name(metric);
  write_file(config.output / (stem + ".csv"), report::differential_csv(result, options));
  write_file(config.output / (stem + "_histogram.csv"), report::histogram_csv(result));
  json summary = report::differential_json(result, options);
  summary["a"] = pair[0];
  summary["b"] = pair[1];
  summary["metric"] = metric_name(metric);
  summary["window"] = window_json(window);
  write_json(config.output / (stem + ".json"), summary);
  out << pair[0] << " - " << pair[1] << " hours=" << result.diffs.size();
  if (result.day) out << " day_max=" << result.day->max << " day_median=" << result.day->median;
  if (result.evening) out << " evening_median=" << result.evening->median;
  out << '\n';
}

void cmd_analyze_signature(const RunConfig& config, const Selection& sel, std::ostream& out) {
  const auto store = open_archive(config);
  const auto nodes = resolve_nodes(config, sel, store);
  const auto metric = metric_or(sel, Metric::dust_p001cf);
  const Window train = config.analysis.train_window.value_or(resolve_window(config, sel, store, nodes));
  for (const auto& id : nodes) {
    const auto sig = build_signature(node_records(store, id, train), metric, train);
    const auto stem = "signature_" + file_tag(id) + "_" + metric_name(metric);
    write_file(config.output / (stem + ".csv"), report::signature_csv(sig));
    write_json(config.output / (stem + ".json"), report::signature_json(sig));
    out << id << " buckets=" << sig.populated() << "/" << kHoursPerWeek << '\n';
  }
}

void cmd_analyze_anomaly(const RunConfig& config, const Selection& sel, std::ostream& out) {
  const auto store = open_archive(config);
  const auto nodes = resolve_nodes(config, sel, store);
  const auto window = resolve_window(config, sel, store, nodes);
  const auto metric = metric_or(sel, Metric::dust_p001cf);
  const auto detections = run_detection(config, store, nodes, metric, window);
  std::vector<AnomalyEvent> all;
  json per_node = json::object();
  for (const auto& d : detections) {
    all.insert(all.end(), d.report.events.begin(), d.report.events.end());
    per_node[d.node_id] = report::detection_json(d.report);
    out << d.node_id << " events=" << d.report.events.size() << '\n';
  }
  const auto stem = "anomaly_" + metric_name(metric);
  write_file(config.output / (stem + ".csv"), report::events_csv(all));
  write_json(config.output / (stem + ".json"),
             json{{"metric", metric_name(metric)},
                  {"k", config.analysis.k},
                  {"window", window_json(window)},
                  {"train", window_json(config.analysis.train_window.value_or(window))},
                  {"nodes", per_node}});
}

void cmd_analyze_scope(const RunConfig& config, const Selection& sel, std::ostream& out) {
  const auto store = open_archive(config);
  const auto nodes = resolve_nodes(config, sel, store);
  const auto window = resolve_window(config, sel, store, nodes);
  const auto metric = metric_or(sel, Metric::dust_p001cf);
  const auto detections = run_detection(config, store, nodes, metric, window);
  std::map<std::string, std::vector<AnomalyEvent>> by_node;
  for (const auto& d : detections) by_node[d.node_id] = d.report.events;
  ScopeOptions options;
  options.quorum = config.analysis.quorum;
  options.overlap_window = config.analysis.overlap_window;
  const auto scoped = classify_scope(by_node, metric, nodes, options);
  const auto stem = "scope_" + metric_name(metric);
  write_file(config.output / (stem + ".csv"), report::scoped_csv(scoped));
  write_json(config.output / (stem + ".json"),
             json{{"metric", metric_name(metric)},
                  {"k", config.analysis.k},
                  {"quorum", config.analysis.quorum},
                  {"fleet", nodes},
                  {"window", window_json(window)},
                  {"train", window_json(config.analysis.train_window.value_or(window))},
                  {"anomalies", report::scoped_json(scoped)}});
  for (const auto& group : scoped) {
    out << to_string(group.scope) << " " << format_iso8601(group.start) << " " << format_iso8601(group.end) << " nodes=";
    for (std::size_t i = 0; i < group.nodes.size(); ++i) out << (i ? "," : "") << group.nodes[i];
    out << '\n';
  }
  out << "anomalies=" << scoped.size() << '\n';
}

void cmd_walk_align(const RunConfig& config, const std::vector<fs::path>& sessions, std::ostream& out) {
  for (const auto& path : sessions) {
    const auto aligned = align(load_walk_session(path.string()));
    const auto file = config.output / ("aligned_" + file_tag(aligned.team_id) + ".csv");
    write_file(file, aligned_csv(aligned));
    out << aligned.team_id << " aligned=" << aligned.coverage.aligned
        << " dropped_before=" << aligned.coverage.dropped_before
        << " dropped_after=" << aligned.coverage.dropped_after << " -> " << file.string() << '\n';
  }
}

void cmd_walk_geojson(const RunConfig& config, const std::vector<fs::path>& sessions, std::ostream& out) {
  std::vector<AlignedTrace> traces;
  for (const auto& path : sessions) {
    const auto trace = load_walk_session(path.string());
    try {
      traces.push_back(align(trace));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::insufficient_gps) throw;
      out << "warning: team " << trace.team_id << " omitted: " << e.what() << '\n';
    }
  }
  const auto exported = export_geojson(traces);
  for (const auto& w : exported.warnings) out << "warning: " << w << '\n';
  const auto file = config.output / "walks.geojson";
  write_json(file, exported.document);
  out << "features=" << exported.document["features"].size() << " -> " << file.string() << '\n';
}

void cmd_walk_series(const RunConfig& config, const Selection& sel, const std::vector<fs::path>& sessions,
                     const std::optional<fs::path>& calibration, std::ostream& out) {
  std::optional<CalibrationModel> model;
  if (calibration) {
    std::ifstream in(*calibration);
    if (!in) throw Error(ErrorCode::storage, "cannot read " + calibration->string());
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::parse_error, calibration->string() + ": " + e.what());
    }
    model = calibration_from_json(j);
  }
  const auto metric = metric_or(sel, model ? model->metric : Metric::dust_p001cf);
  for (const auto& path : sessions) {
    const auto trace = load_walk_session(path.string());
    const auto series = team_series(trace, metric, model);
    const auto file =
        config.output / ("series_" + file_tag(trace.team_id) + "_" + metric_name(metric) + (model ? "_calibrated" : "") + ".csv");
    write_file(file, team_series_csv(series));
    out << trace.team_id << " points=" << series.size() << " -> " << file.string() << '\n';
  }
}

void cmd_walk_calibrate(const RunConfig& config, const Selection& sel, const fs::path& low_cost,
                        const fs::path& reference, double tolerance_s, std::ostream& out) {
  const auto low = load_walk_session(low_cost.string());
  const auto ref = load_walk_session(reference.string());
  const auto metric = metric_or(sel, Metric::dust_p001cf);
  const auto model = fit_calibration(low.samples, ref.samples, metric, tolerance_s);
  const auto stem = "calibration_" + file_tag(low.device.node_id) + "_" + metric_name(metric);
  write_json(config.output / (stem + ".json"), calibration_to_json(model));
  std::string csv = "ts,original,calibrated\n";
  for (const auto& s : apply_calibration(model, low.samples, metric)) {
    if (!s.record.has(metric)) continue;
    csv += format_iso8601(s.record.ts) + "," + format_number(s.original) + "," +
           format_number(s.record.value(metric)) + "\n";
  }
  write_file(config.output / (stem + ".csv"), csv);
  out << low.device.node_id << " vs " << ref.device.node_id << " pairs=" << model.n_pairs << " gain=" << model.gain
      << " offset=" << model.offset << " r2=" << model.r_squared << '\n';
}

}  // namespace qc::cli
