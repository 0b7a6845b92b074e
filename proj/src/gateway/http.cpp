#include "qc/gateway/http.hpp"

#include <algorithm>

#include "httplib.h"
#include "qc/error.hpp"
#include "qc/store/record_json.hpp"

namespace qc {

namespace {

using nlohmann::json;

constexpr std::size_t kMaxPayloadBytes = 64u << 20;

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::unknown_node:
    case ErrorCode::no_data:
      return 404;
    case ErrorCode::conflict:
      return 409;
    case ErrorCode::lone_node:
      return 422;
    case ErrorCode::storage:
      return 500;
    default:
      return 400;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                const json* result = nullptr) {
  json body{{"error", {{"code", code}, {"message", message}}}};
  if (result) body["result"] = *result;
  send_json(res, status, body);
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse_error, std::string("malformed JSON: ") + e.what());
  }
}

std::string required_param(const httplib::Request& req, const char* name) {
  if (!req.has_param(name)) throw ValidationError(name, "missing query parameter");
  return req.get_param_value(name);
}

Timestamp time_param(const httplib::Request& req, const char* name) {
  try {
    return parse_iso8601(required_param(req, name));
  } catch (const ParseError& e) {
    throw ValidationError(name, e.detail());
  }
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto part = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!part.empty()) out.push_back(part);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

// Runs a handler, converting qc::Error into the error envelope.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

struct GatewayServer::Impl {
  Gateway& gateway;
  httplib::Server server;

  explicit Impl(Gateway& g) : gateway(g) {
    server.set_payload_max_length(kMaxPayloadBytes);

    server.Post("/v1/nodes", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto reg = gateway.register_node(registration_from_json(parse_body(req)));
      send_json(res, 201, registration_to_json(reg));
    }));

    server.Get("/v1/nodes", guarded([this](const httplib::Request&, httplib::Response& res) {
      json list = json::array();
      for (const auto& reg : gateway.nodes()) list.push_back(registration_to_json(reg));
      send_json(res, 200, json{{"nodes", std::move(list)}});
    }));

    server.Post("/v1/records", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto body = parse_body(req);
      if (!body.is_object()) throw ValidationError("body", "must be a JSON object");
      if (!body.contains("node_id") || !body["node_id"].is_string()) {
        throw ValidationError("node_id", "missing or not a string");
      }
      if (!body.contains("records") || !body["records"].is_array()) {
        throw ValidationError("records", "missing or not an array");
      }
      const auto& items = body["records"];
      if (items.size() > Gateway::kMaxBatch) {
        send_error(res, 413, to_string(ErrorCode::validation),
                   "records: batch of " + std::to_string(items.size()) + " exceeds the limit of " +
                       std::to_string(Gateway::kMaxBatch));
        return;
      }
      std::vector<SampleRecord> records;
      records.reserve(items.size());
      for (std::size_t i = 0; i < items.size(); ++i) {
        try {
          records.push_back(record_from_json(items[i]));
        } catch (const ValidationError& e) {
          throw ValidationError(e.field(), "record " + std::to_string(i) + ": " + e.what());
        }
      }
      const auto result = gateway.ingest_batch(body["node_id"].get<std::string>(), records);
      send_json(res, 200, json{{"accepted", result.accepted}, {"duplicates", result.duplicates}});
    }));

    server.Get("/v1/query", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto t0 = time_param(req, "from");
      const auto t1 = time_param(req, "to");
      std::vector<std::string> ids;
      if (req.has_param("nodes")) {
        ids = split_csv(req.get_param_value("nodes"));
      } else {
        for (const auto& reg : gateway.nodes()) ids.push_back(reg.node_id);
      }
      std::optional<Metric> metric;
      if (req.has_param("metric")) metric = parse_metric(req.get_param_value("metric"));
      const auto records = gateway.query(ids, t0, t1);
      json out = json::array();
      for (const auto& r : records) {
        if (!metric) {
          out.push_back(record_to_json(r));
        } else {
          json point{{"node_id", r.node_id}, {"ts", format_iso8601(r.ts)}};
          point["value"] = r.has(*metric) ? json(r.value(*metric)) : json(nullptr);
          out.push_back(std::move(point));
        }
      }
      json body{{"records", std::move(out)}};
      if (metric) body["metric"] = std::string(to_string(*metric));
      send_json(res, 200, body);
    }));

    server.Get("/v1/compare", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto node = required_param(req, "node");
      const auto metric = parse_metric(required_param(req, "metric"));
      const auto result = gateway.compare(node, metric, time_param(req, "from"), time_param(req, "to"));
      const auto body = comparison_to_json(result);
      if (result.lone_node()) {
        send_error(res, status_for(ErrorCode::lone_node), to_string(ErrorCode::lone_node),
                   "no other node has " + std::string(to_string(metric)) + " samples in the window", &body);
        return;
      }
      send_json(res, 200, body);
    }));
  }
};

GatewayServer::GatewayServer(Gateway& gateway) : impl_(std::make_unique<Impl>(gateway)) {}
GatewayServer::~GatewayServer() { stop(); }

int GatewayServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw Error(ErrorCode::storage, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::storage, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void GatewayServer::serve() { impl_->server.listen_after_bind(); }
void GatewayServer::stop() { impl_->server.stop(); }
void GatewayServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

struct GatewayClient::Impl {
  httplib::Client client;

  Impl(const std::string& host, int port) : client(host, port) {
    client.set_connection_timeout(5, 0);
    client.set_read_timeout(120, 0);
    client.set_write_timeout(120, 0);
  }

  // Returns the parsed body of a 2xx response; rethrows server errors.
  json check(const httplib::Result& result, const char* what) {
    if (!result) {
      throw Error(ErrorCode::storage, std::string(what) + ": " + httplib::to_string(result.error()));
    }
    json body;
    try {
      body = json::parse(result->body);
    } catch (const json::parse_error&) {
      throw Error(ErrorCode::storage, std::string(what) + ": HTTP " + std::to_string(result->status) +
                                          " with a non-JSON body");
    }
    if (result->status >= 200 && result->status < 300) return body;
    if (body.contains("error")) {
      const auto code_text = body["error"].value("code", std::string{});
      const auto message = body["error"].value("message", std::string{});
      const auto code = error_code_from_string(code_text);
      throw Error(code.value_or(ErrorCode::storage), message);
    }
    throw Error(ErrorCode::storage, std::string(what) + ": HTTP " + std::to_string(result->status));
  }

  json post(const std::string& path, const json& body) {
    return check(client.Post(path, body.dump(), "application/json"), path.c_str());
  }

  json get(const std::string& path, const httplib::Params& params) {
    return check(client.Get(path, params, httplib::Headers{}), path.c_str());
  }
};

GatewayClient::GatewayClient(std::string host, int port) : impl_(std::make_unique<Impl>(host, port)) {}
GatewayClient::~GatewayClient() = default;

NodeRegistration GatewayClient::register_node(const NodeRegistration& reg) {
  auto body = registration_to_json(reg);
  if (reg.registered_at == Timestamp{}) body.erase("registered_at");
  return registration_from_json(impl_->post("/v1/nodes", body));
}

std::vector<NodeRegistration> GatewayClient::nodes() {
  std::vector<NodeRegistration> out;
  const auto body = impl_->get("/v1/nodes", {});
  for (const auto& entry : body.at("nodes")) out.push_back(registration_from_json(entry));
  return out;
}

IngestResult GatewayClient::ingest(const std::string& node_id, std::span<const SampleRecord> records,
                                   std::size_t batch_size) {
  if (batch_size == 0) throw Error(ErrorCode::invalid_parameter, "batch size must be positive");
  IngestResult total;
  for (std::size_t start = 0; start < records.size(); start += batch_size) {
    const auto chunk = records.subspan(start, std::min(batch_size, records.size() - start));
    json items = json::array();
    for (const auto& r : chunk) items.push_back(record_to_json(r));
    const auto reply = impl_->post("/v1/records", json{{"node_id", node_id}, {"records", std::move(items)}});
    total.accepted += reply.at("accepted").get<std::size_t>();
    total.duplicates += reply.at("duplicates").get<std::size_t>();
  }
  return total;
}

std::vector<SampleRecord> GatewayClient::query(std::span<const std::string> node_ids, Timestamp t0, Timestamp t1) {
  std::string nodes;
  for (const auto& id : node_ids) {
    if (!nodes.empty()) nodes += ',';
    nodes += id;
  }
  const auto reply =
      impl_->get("/v1/query", {{"nodes", nodes}, {"from", format_iso8601(t0)}, {"to", format_iso8601(t1)}});
  std::vector<SampleRecord> out;
  for (const auto& item : reply.at("records")) out.push_back(record_from_json(item));
  return out;
}

ComparisonResult GatewayClient::compare(const std::string& node_id, Metric metric, Timestamp t0, Timestamp t1) {
  const httplib::Params params{{"node", node_id},
                               {"metric", std::string(to_string(metric))},
                               {"from", format_iso8601(t0)},
                               {"to", format_iso8601(t1)}};
  const auto result = impl_->client.Get("/v1/compare", params, httplib::Headers{});
  // A lone node is a result, not a failure: surface the partial comparison.
  if (result && result->status == 422) {
    const auto body = json::parse(result->body, nullptr, false);
    if (!body.is_discarded() && body.contains("result")) return comparison_from_json(body["result"]);
  }
  return comparison_from_json(impl_->check(result, "/v1/compare"));
}

}  // namespace qc
