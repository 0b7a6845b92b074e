#include <fstream>

#include "doctest.h"
#include "qc/error.hpp"
#include "run_config.hpp"
#include "support.hpp"

using namespace qc;
using namespace qc::cli;
using qc::test::at;
using qc::test::TempDir;

namespace {

const std::filesystem::path kConfigs = std::filesystem::path(QC_SOURCE_DIR) / "configs";

RunConfig parse(const std::string& text, const std::filesystem::path& base = "/base") {
  return run_config_from_json(nlohmann::json::parse(text), base);
}

}  // namespace

TEST_CASE("shipped configs load") {
  const auto redhook = load_run_config(kConfigs / "redhook.json");
  CHECK(redhook.fleet.size() == 4);
  REQUIRE(redhook.scenario);
  REQUIRE(redhook.window);
  CHECK(redhook.window->first == at("2016-06-09"));
  CHECK(redhook.window->second - redhook.window->first == 8 * kDay);
  CHECK(redhook.archive.is_absolute());
  CHECK(redhook.analysis.utc_offset_minutes == -240);
  CHECK(redhook.fleet[0].enclosure == Enclosure::acrylic_top);

  const auto bbq = load_run_config(kConfigs / "bbq.json");
  REQUIRE(bbq.analysis.train_window);
  CHECK(bbq.analysis.train_window->first == at("2016-06-11"));
  CHECK(bbq.scenario->events.size() == 2);
}

TEST_CASE("defaults and relative paths") {
  const auto c = parse(R"({"archive": "a/b", "output": "/abs/out"})");
  CHECK(c.archive == std::filesystem::path("/base/a/b"));
  CHECK(c.output == std::filesystem::path("/abs/out"));
  CHECK(c.analysis.k == 3.5);
  CHECK(c.analysis.quorum == 0.75);
  CHECK(c.analysis.overlap_window == kHour);
  CHECK(c.gateway.port == 8080);
  CHECK_FALSE(c.window);
  CHECK(c.fleet.empty());
}

TEST_CASE("analysis section") {
  const auto c = parse(R"({"analysis": {"k": 5, "quorum": 0.5, "overlap_window_s": 600, "merge_gap_s": 20,
    "day_window": [9, 17], "evening_window": [21, 5], "stat": "median", "histogram_bin_width": 0.5,
    "train": {"from": "2016-06-11", "to": "2016-06-25"}}})");
  CHECK(c.analysis.k == 5.0);
  CHECK(c.analysis.overlap_window == Millis{600000});
  CHECK(c.analysis.merge_gap == Millis{20000});
  CHECK(c.analysis.day_window.start_hour == 9.0);
  CHECK(c.analysis.evening_window.end_hour == 5.0);
  CHECK(c.analysis.stat == HourlyStat::median);
  CHECK(c.analysis.train_window->second == at("2016-06-25"));
}

TEST_CASE("invalid configs are rejected") {
  CHECK_THROWS_AS(parse(R"({"archiv": "x"})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"analysis": {"kk": 1}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"analysis": {"k": 0}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"analysis": {"quorum": 1.5}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"analysis": {"stat": "mode"}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"analysis": {"day_window": [8]}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"window": {"from": "2016-06-10", "to": "2016-06-09"}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"window": {"from": "June", "to": "2016-06-09"}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"gateway": {"port": 70000}})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"seed": -1})"), ValidationError);
  CHECK_THROWS_AS(parse(R"({"fleet": [{"node_id": "a"}, {"node_id": "a"}]})"), ValidationError);

  TempDir dir("cli-config");
  {
    std::ofstream(dir.path() / "broken.json") << "{\"archive\": ";
  }
  try {
    load_run_config(dir.path() / "broken.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse_error);
  }
  try {
    load_run_config(dir.path() / "absent.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::storage);
  }
}

TEST_CASE("run seed reseeds scenario and nodes") {
  auto a = load_run_config(kConfigs / "redhook.json");
  auto b = a;
  apply_seed(a, 1);
  apply_seed(b, 1);
  CHECK(a.scenario->seed == 1);
  for (std::size_t i = 0; i < a.fleet.size(); ++i) CHECK(a.fleet[i].rng_seed == b.fleet[i].rng_seed);
  CHECK(a.fleet[0].rng_seed != a.fleet[1].rng_seed);
  apply_seed(b, 2);
  CHECK(a.fleet[0].rng_seed != b.fleet[0].rng_seed);
}
