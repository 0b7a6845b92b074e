#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qc/store/record.hpp"

namespace qc {

// Line-delimited archive encoding. One record per line, comma separated, in
// this fixed order:
//
//   node_id,ts,temperature_c,humidity_pct,pressure_hpa,lpo_ratio_pct,
//   dust_p001cf,noise_dbspl,lux_ch0,lux_ch1,flags
//
// ts is ISO-8601 UTC with milliseconds. Numbers use the shortest text that
// parses back to the same double. A missing channel is an empty field. flags
// is a ';'-joined list drawn from {clipped, contention_loss,
// missing_channel:<metric>} in that order (missing channels in metric order);
// empty when no flag is set.
inline constexpr std::string_view kRecordHeader =
    "node_id,ts,temperature_c,humidity_pct,pressure_hpa,lpo_ratio_pct,dust_p001cf,noise_dbspl,lux_ch0,lux_ch1,flags";

std::string encode_line(const SampleRecord& record);
std::string encode(std::span<const SampleRecord> records);

// line_number is reported in ParseError; the record is validated after
// parsing (ValidationError names the field).
SampleRecord decode_line(std::string_view line, std::size_t line_number);

// Blank lines are skipped. Line numbers in errors are 1-based.
std::vector<SampleRecord> decode(std::string_view bytes);

std::string format_number(double value);

}  // namespace qc
