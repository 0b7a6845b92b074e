#include "qc/time.hpp"

#include <charconv>
#include <cstdio>

#include "qc/error.hpp"

namespace qc {

namespace {

using std::chrono::days;
using std::chrono::floor;
using std::chrono::sys_days;
using std::chrono::year_month_day;

int parse_fixed(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos + len > text.size()) throw ParseError(1, "timestamp truncated: '" + std::string(text) + "'");
  int value = 0;
  auto first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc{} || ptr != first + len) {
    throw ParseError(1, "bad digits in timestamp: '" + std::string(text) + "'");
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw ParseError(1, std::string("expected '") + c + "' in timestamp: '" + std::string(text) + "'");
  }
}

}  // namespace

std::string format_iso8601(Timestamp t) {
  const auto day = floor<days>(t);
  const year_month_day ymd{day};
  const auto ms = (t - day).count();
  const auto h = ms / 3'600'000;
  const auto m = (ms / 60'000) % 60;
  const auto s = (ms / 1000) % 60;
  const auto frac = ms % 1000;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<long long>(h),
                static_cast<long long>(m), static_cast<long long>(s), static_cast<long long>(frac));
  return buf;
}

std::string format_date(Timestamp t) {
  const year_month_day ymd{floor<days>(t)};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

Timestamp parse_iso8601(std::string_view text) {
  const int y = parse_fixed(text, 0, 4);
  expect(text, 4, '-');
  const int mo = parse_fixed(text, 5, 2);
  expect(text, 7, '-');
  const int d = parse_fixed(text, 8, 2);
  const year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                           std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw ParseError(1, "invalid calendar date: '" + std::string(text) + "'");
  Timestamp base{sys_days{ymd}};
  if (text.size() == 10) return base;

  expect(text, 10, 'T');
  const int h = parse_fixed(text, 11, 2);
  expect(text, 13, ':');
  const int mi = parse_fixed(text, 14, 2);
  expect(text, 16, ':');
  const int s = parse_fixed(text, 17, 2);
  if (h > 23 || mi > 59 || s > 59) throw ParseError(1, "time of day out of range: '" + std::string(text) + "'");
  std::size_t pos = 19;
  int frac_ms = 0;
  if (pos < text.size() && text[pos] == '.') {
    std::size_t digits = 0;
    ++pos;
    while (pos + digits < text.size() && text[pos + digits] >= '0' && text[pos + digits] <= '9') ++digits;
    if (digits == 0 || digits > 3) throw ParseError(1, "fraction must have 1-3 digits: '" + std::string(text) + "'");
    frac_ms = parse_fixed(text, pos, digits);
    for (std::size_t i = digits; i < 3; ++i) frac_ms *= 10;
    pos += digits;
  }
  expect(text, pos, 'Z');
  if (pos + 1 != text.size()) throw ParseError(1, "trailing characters in timestamp: '" + std::string(text) + "'");
  return base + Millis{((h * 60LL + mi) * 60LL + s) * 1000LL + frac_ms};
}

Timestamp floor_hour(Timestamp t) { return floor<std::chrono::hours>(t); }

Timestamp floor_day(Timestamp t) { return floor<days>(t); }

int hour_of_week(Timestamp t) {
  const auto day_index = floor<days>(t).time_since_epoch().count();
  // 1970-01-01 was a Thursday (Monday-based index 3).
  const auto weekday = ((day_index + 3) % 7 + 7) % 7;
  const auto hour = std::chrono::duration_cast<std::chrono::hours>(t - floor<days>(t)).count();
  return static_cast<int>(weekday * 24 + hour);
}

double local_hour(Timestamp t, int utc_offset_minutes) {
  const auto local = t + std::chrono::minutes{utc_offset_minutes};
  const auto into_day = local - floor<days>(local);
  return static_cast<double>(into_day.count()) / 3'600'000.0;
}

int local_weekday(Timestamp t, int utc_offset_minutes) {
  const auto local = t + std::chrono::minutes{utc_offset_minutes};
  const auto day_index = floor<days>(local).time_since_epoch().count();
  return static_cast<int>(((day_index + 3) % 7 + 7) % 7) + 1;
}

}  // namespace qc
