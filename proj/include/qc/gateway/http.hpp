#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qc/gateway/gateway.hpp"

namespace qc {

// HTTP/1.1 front end:
//
//   POST /v1/nodes      registration JSON -> 201 registration
//   GET  /v1/nodes      -> {"nodes": [...]}
//   POST /v1/records    {"node_id": id, "records": [...]} -> {"accepted": n, "duplicates": n}
//   GET  /v1/query      ?nodes=a,b&from=&to=[&metric=] -> {"records": [...]}
//   GET  /v1/compare    ?node=&metric=&from=&to= -> comparison JSON
//
// Failures answer {"error": {"code": ..., "message": ...}}. A lone-node
// comparison answers 422 with the partial comparison under "result".
class GatewayServer {
 public:
  explicit GatewayServer(Gateway& gateway);
  ~GatewayServer();

  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  // Binds host:port (port 0 picks a free port) and returns the bound port.
  // Throws storage-error when binding fails.
  int bind(const std::string& host, int port);

  // Serves until stop(); call after bind.
  void serve();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Blocking client. Server-reported failures are rethrown as qc::Error with the
// same code; transport failures raise storage-error.
class GatewayClient {
 public:
  GatewayClient(std::string host, int port);
  ~GatewayClient();

  NodeRegistration register_node(const NodeRegistration& reg);
  std::vector<NodeRegistration> nodes();

  // Splits into requests of at most Gateway::kMaxBatch records.
  IngestResult ingest(const std::string& node_id, std::span<const SampleRecord> records,
                      std::size_t batch_size = Gateway::kMaxBatch);

  std::vector<SampleRecord> query(std::span<const std::string> node_ids, Timestamp t0, Timestamp t1);
  ComparisonResult compare(const std::string& node_id, Metric metric, Timestamp t0, Timestamp t1);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace qc
