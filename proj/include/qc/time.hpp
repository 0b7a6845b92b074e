#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace qc {

// UTC instant at millisecond resolution. The node's RTC is treated as drift-free.
using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Millis = std::chrono::milliseconds;

constexpr Millis kHour{3'600'000};
constexpr Millis kDay{86'400'000};
constexpr Millis kWeek{7 * 86'400'000LL};

inline Timestamp from_epoch_ms(std::int64_t ms) { return Timestamp{Millis{ms}}; }
inline std::int64_t epoch_ms(Timestamp t) { return t.time_since_epoch().count(); }

// "2016-06-10T15:00:00.000Z"
std::string format_iso8601(Timestamp t);

// Accepts YYYY-MM-DDTHH:MM:SS[.f{1,3}]Z, or a bare YYYY-MM-DD (midnight UTC).
// Throws ParseError(line 1) on malformed input.
Timestamp parse_iso8601(std::string_view text);

// "2016-06-10"
std::string format_date(Timestamp t);

Timestamp floor_hour(Timestamp t);
Timestamp floor_day(Timestamp t);

// 0 = Monday 00:00 UTC ... 167 = Sunday 23:00 UTC.
int hour_of_week(Timestamp t);

// Hour of day in [0, 24) after shifting by a fixed UTC offset.
double local_hour(Timestamp t, int utc_offset_minutes);

// ISO weekday of the local date, 1 = Monday ... 7 = Sunday.
int local_weekday(Timestamp t, int utc_offset_minutes);

}  // namespace qc
