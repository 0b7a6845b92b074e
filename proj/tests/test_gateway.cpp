#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "qc/error.hpp"
#include "qc/gateway/gateway.hpp"
#include "qc/gateway/http.hpp"
#include "qc/store/record_json.hpp"
#include "support.hpp"

using namespace qc;
using doctest::Approx;
using qc::test::at;
using qc::test::make_record;
using qc::test::TempDir;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::storage;
}

NodeRegistration reg(const std::string& id, double lat = 40.68, double lon = -74.01) {
  NodeRegistration r;
  r.node_id = id;
  r.location = {lat, lon, 0.0};
  r.registered_at = at("2016-06-01T00:00:00Z");
  return r;
}

std::vector<std::string> ids(std::initializer_list<std::string> v) { return v; }

std::vector<SampleRecord> hour_of(const std::string& node, Timestamp t0, double temp = 20.0) {
  std::vector<SampleRecord> out;
  for (int i = 0; i < 720; ++i) out.push_back(make_record(node, t0 + Millis{5000} * i, temp));
  return out;
}

// Server on a free loopback port, stopped on scope exit.
struct LiveServer {
  Gateway gateway;
  GatewayServer server;
  int port;
  std::thread thread;

  explicit LiveServer(const std::filesystem::path& root)
      : gateway(root), server(gateway), port(server.bind("127.0.0.1", 0)), thread([this] { server.serve(); }) {
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
};

}  // namespace

TEST_CASE("registration") {
  TempDir dir("gw-reg");
  Gateway gw(dir.path());
  const auto stored = gw.register_node(reg("rh-roof"));
  CHECK(stored.node_id == "rh-roof");
  CHECK(code_of([&] { gw.register_node(reg("rh-roof")); }) == ErrorCode::conflict);
  CHECK_THROWS_AS(gw.register_node(reg("")), ValidationError);
  CHECK_THROWS_AS(gw.register_node(reg("bad id")), ValidationError);
  CHECK_THROWS_AS(gw.register_node(reg("far", 95.0, 0.0)), ValidationError);

  NodeRegistration unstamped;
  unstamped.node_id = "fresh";
  unstamped.location = {1.0, 2.0, 0.0};
  CHECK(gw.register_node(unstamped).registered_at > at("2020-01-01"));

  CHECK(gw.nodes().size() == 2);
  Gateway reopened(dir.path());
  REQUIRE(reopened.registration("rh-roof"));
  CHECK(reopened.registration("rh-roof")->location.lat == 40.68);
  CHECK_FALSE(reopened.registration("ghost"));

  auto j = registration_to_json(stored);
  CHECK(registration_from_json(j).node_id == "rh-roof");
  j["extra"] = 1;
  CHECK_THROWS_AS(registration_from_json(j), ValidationError);
}

TEST_CASE("idempotent ingestion") {
  TempDir dir("gw-ingest");
  Gateway gw(dir.path());
  gw.register_node(reg("a"));
  const auto t0 = at("2016-06-10T12:00:00Z");
  const auto batch = hour_of("a", t0);
  auto r = gw.ingest_batch("a", batch);
  CHECK(r.accepted == 720);
  CHECK(r.duplicates == 0);
  r = gw.ingest_batch("a", batch);
  CHECK(r.accepted == 0);
  CHECK(r.duplicates == 720);
  CHECK(gw.query(ids({"a"}), t0, t0 + kHour).size() == 720);

  CHECK(code_of([&] { gw.ingest_batch("ghost", hour_of("ghost", t0)); }) == ErrorCode::unknown_node);
  auto mixed = hour_of("a", t0 + kHour);
  mixed[3].node_id = "b";
  CHECK_THROWS_AS(gw.ingest_batch("a", mixed), ValidationError);
  CHECK(gw.query(ids({"a"}), t0 + kHour, t0 + 2 * kHour).empty());

  auto changed = batch;
  changed[0].temperature_c = 99.0;
  CHECK(code_of([&] { gw.ingest_batch("a", changed); }) == ErrorCode::conflict);

  std::vector<SampleRecord> huge(Gateway::kMaxBatch + 1, make_record("a", t0));
  CHECK_THROWS_AS(gw.ingest_batch("a", huge), ValidationError);
}

TEST_CASE("neighborhood comparison") {
  TempDir dir("gw-compare");
  Gateway gw(dir.path());
  const auto t0 = at("2016-06-10T12:00:00Z");
  gw.register_node(reg("a"));
  gw.ingest_batch("a", hour_of("a", t0, 10.0));
  auto lone = gw.compare("a", Metric::temperature_c, t0, t0 + kHour);
  CHECK(lone.lone_node());
  CHECK(lone.node_mean == 10.0);
  CHECK_FALSE(lone.ratio);

  gw.register_node(reg("b"));
  CHECK(gw.compare("a", Metric::temperature_c, t0, t0 + kHour).lone_node());
  gw.ingest_batch("b", hour_of("b", t0, 20.0));
  const auto ab = gw.compare("a", Metric::temperature_c, t0, t0 + kHour);
  const auto ba = gw.compare("b", Metric::temperature_c, t0, t0 + kHour);
  REQUIRE(ab.ratio);
  REQUIRE(ba.ratio);
  CHECK(*ab.ratio == 0.5);
  CHECK(*ab.ratio * *ba.ratio == Approx(1.0).epsilon(1e-12));
  CHECK(ab.node_count == 720);
  CHECK(ab.neighborhood_count == 720);
  CHECK(ab.neighborhood_nodes == std::vector<std::string>{"b"});

  gw.register_node(reg("c"));
  gw.ingest_batch("c", hour_of("c", t0, 20.0));
  CHECK(*gw.compare("b", Metric::temperature_c, t0, t0 + kHour).ratio == Approx(20.0 / 15.0));
  CHECK(*gw.compare("b", Metric::humidity_pct, t0, t0 + kHour).ratio == 1.0);

  const auto back = comparison_from_json(comparison_to_json(ab));
  CHECK(back.ratio == ab.ratio);
  CHECK(back.neighborhood_nodes == ab.neighborhood_nodes);

  CHECK(code_of([&] { gw.compare("ghost", Metric::temperature_c, t0, t0 + kHour); }) == ErrorCode::unknown_node);
  CHECK(code_of([&] { gw.compare("a", Metric::temperature_c, t0, t0); }) == ErrorCode::invalid_range);
  CHECK(code_of([&] { gw.compare("a", Metric::temperature_c, t0 + kDay, t0 + 2 * kDay); }) == ErrorCode::no_data);
}

TEST_CASE("http round trip") {
  TempDir dir("gw-http");
  LiveServer live(dir.path());
  GatewayClient client("127.0.0.1", live.port);
  const auto t0 = at("2016-06-10T23:30:00Z");

  client.register_node(reg("a"));
  client.register_node(reg("b"));
  CHECK(code_of([&] { client.register_node(reg("a")); }) == ErrorCode::conflict);
  CHECK(client.nodes().size() == 2);

  const auto batch = hour_of("a", t0, 10.0);
  auto r = client.ingest("a", batch, 250);
  CHECK(r.accepted == 720);
  r = client.ingest("a", batch);
  CHECK(r.duplicates == 720);
  CHECK(code_of([&] { client.ingest("ghost", hour_of("ghost", t0)); }) == ErrorCode::unknown_node);

  const auto got = client.query(ids({"a"}), t0, t0 + kHour);
  REQUIRE(got.size() == 720);
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == batch[i]);

  const auto lone = client.compare("a", Metric::temperature_c, t0, t0 + kHour);
  CHECK(lone.lone_node());
  client.ingest("b", hour_of("b", t0, 40.0));
  CHECK(*client.compare("a", Metric::temperature_c, t0, t0 + kHour).ratio == 0.25);
  CHECK(code_of([&] { client.compare("a", Metric::temperature_c, t0 + kHour, t0); }) == ErrorCode::invalid_range);

  httplib::Client raw("127.0.0.1", live.port);
  const auto lone_res = raw.Get("/v1/compare?node=a&metric=dust_p001cf&from=2016-06-09T00:00:00Z&to=2016-06-09T01:00:00Z");
  REQUIRE(lone_res);
  CHECK(lone_res->status == 404);

  nlohmann::json big{{"node_id", "a"}, {"records", nlohmann::json::array()}};
  const auto one = record_to_json(make_record("a", t0));
  for (std::size_t i = 0; i <= Gateway::kMaxBatch; ++i) big["records"].push_back(one);
  const auto res = raw.Post("/v1/records", big.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 413);
  CHECK(nlohmann::json::parse(res->body)["error"]["code"] == "validation");

  const auto bad = raw.Post("/v1/records", "{not json", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(nlohmann::json::parse(bad->body)["error"]["code"] == "parse-error");
}

TEST_CASE("concurrent duplicate submissions store one copy") {
  TempDir dir("gw-concurrent");
  LiveServer live(dir.path());
  live.gateway.register_node(reg("c"));
  const auto batch = hour_of("c", at("2016-06-10T15:00:00Z"));
  std::vector<IngestResult> results(8);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] {
      GatewayClient client("127.0.0.1", live.port);
      results[i] = client.ingest("c", batch);
    });
  }
  for (auto& t : threads) t.join();
  std::size_t accepted = 0;
  for (const auto& r : results) {
    accepted += r.accepted;
    CHECK(r.accepted + r.duplicates == 720);
  }
  CHECK(accepted == 720);
  CHECK(live.gateway.query(ids({"c"}), at("2016-06-10"), at("2016-06-11")).size() == 720);
}

TEST_CASE("transport failure is a storage error") {
  GatewayClient client("127.0.0.1", 1);
  CHECK(code_of([&] { client.nodes(); }) == ErrorCode::storage);
}
