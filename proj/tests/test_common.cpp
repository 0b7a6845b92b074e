#include "doctest.h"
#include "qc/error.hpp"
#include "qc/time.hpp"

using namespace qc;

TEST_CASE("iso8601 formats and parses with millisecond precision") {
  const auto t = from_epoch_ms(1465570800000);  // 2016-06-10 15:00 UTC
  CHECK(format_iso8601(t) == "2016-06-10T15:00:00.000Z");
  CHECK(parse_iso8601("2016-06-10T15:00:00.000Z") == t);
  CHECK(parse_iso8601("2016-06-10T15:00:00Z") == t);
  CHECK(parse_iso8601("2016-06-10T15:00:00.5Z") == t + Millis{500});
  CHECK(parse_iso8601("2016-06-10T15:00:00.05Z") == t + Millis{50});
  CHECK(parse_iso8601("2016-06-10") == from_epoch_ms(1465516800000));
  CHECK(format_iso8601(from_epoch_ms(1465570800123)) == "2016-06-10T15:00:00.123Z");
}

TEST_CASE("iso8601 round trip over a spread of instants") {
  for (std::int64_t ms = -86'400'000LL * 400; ms < 86'400'000LL * 30000; ms += 7'777'777'777LL) {
    const auto t = from_epoch_ms(ms);
    CHECK(parse_iso8601(format_iso8601(t)) == t);
  }
}

TEST_CASE("iso8601 rejects malformed text") {
  for (const char* bad : {"", "2016-06-10T15:00:00", "2016-13-10T15:00:00Z", "2016-02-30T00:00:00Z",
                          "2016-06-10T24:00:00Z", "2016-06-10T15:00:00.1234Z", "2016/06/10", "2016-06-10T15:60:00Z"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_iso8601(bad), ParseError);
  }
}

TEST_CASE("calendar helpers") {
  const auto t = parse_iso8601("2016-06-10T15:42:07.250Z");
  CHECK(format_date(t) == "2016-06-10");
  CHECK(floor_hour(t) == parse_iso8601("2016-06-10T15:00:00Z"));
  CHECK(floor_day(t) == parse_iso8601("2016-06-10"));
  // 2016-06-10 is a Friday: 4 days after Monday 00:00.
  CHECK(hour_of_week(t) == 4 * 24 + 15);
  CHECK(hour_of_week(parse_iso8601("2016-06-06T00:00:00Z")) == 0);
  CHECK(hour_of_week(parse_iso8601("2016-06-12T23:59:59Z")) == 167);
  CHECK(hour_of_week(parse_iso8601("1969-12-31T12:00:00Z")) == 2 * 24 + 12);
  CHECK(local_hour(parse_iso8601("2016-06-10T19:30:00Z"), -240) == doctest::Approx(15.5));
  CHECK(local_hour(parse_iso8601("2016-06-10T02:00:00Z"), -240) == doctest::Approx(22.0));
  CHECK(local_weekday(parse_iso8601("2016-06-11T02:00:00Z"), -240) == 5);
  CHECK(local_weekday(parse_iso8601("2016-06-11T05:00:00Z"), -240) == 6);
}

TEST_CASE("error codes have stable names") {
  CHECK(to_string(ErrorCode::invalid_range) == "invalid-range");
  CHECK(to_string(ErrorCode::unknown_node) == "unknown-node");
  CHECK(to_string(ErrorCode::lone_node) == "lone-node");
  CHECK(to_string(ErrorCode::storage) == "storage-error");
  for (int i = 0; i <= static_cast<int>(ErrorCode::insufficient_pairs); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    CHECK(error_code_from_string(to_string(code)) == code);
  }
  CHECK_FALSE(error_code_from_string("nope").has_value());

  const ParseError p(7, "bad field");
  CHECK(p.line() == 7);
  CHECK(std::string(p.what()) == "line 7: bad field");
  CHECK(p.detail() == "bad field");
  const ValidationError v("humidity_pct", "out of range");
  CHECK(v.field() == "humidity_pct");
  CHECK(v.code() == ErrorCode::validation);
}
