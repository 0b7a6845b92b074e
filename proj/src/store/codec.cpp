#include "qc/store/codec.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "qc/error.hpp"

namespace qc {

namespace {

constexpr std::size_t kFieldCount = 11;
constexpr std::string_view kMissingPrefix = "missing_channel:";

void append_number(std::string& out, double value) {
  if (std::isnan(value)) return;
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ptr);
}

double parse_number(std::string_view field, std::size_t line, Metric metric) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(line, "bad number '" + std::string(field) + "' in " + std::string(to_string(metric)));
  }
  return value;
}

QualityFlags parse_flags(std::string_view field, std::size_t line) {
  QualityFlags flags;
  while (!field.empty()) {
    const auto cut = field.find(';');
    const auto token = field.substr(0, cut);
    if (token == "clipped") {
      flags.clipped = true;
    } else if (token == "contention_loss") {
      flags.contention_loss = true;
    } else if (token.starts_with(kMissingPrefix)) {
      const auto name = token.substr(kMissingPrefix.size());
      auto metric = metric_from_string(name);
      if (!metric) throw ParseError(line, "unknown channel in flag '" + std::string(token) + "'");
      flags.missing.insert(*metric);
    } else {
      throw ParseError(line, "unknown flag '" + std::string(token) + "'");
    }
    if (cut == std::string_view::npos) break;
    field.remove_prefix(cut + 1);
  }
  return flags;
}

}  // namespace

std::string format_number(double value) {
  std::string out;
  append_number(out, value);
  return out;
}

std::string encode_line(const SampleRecord& r) {
  std::string out;
  out.reserve(160);
  out += r.node_id;
  out += ',';
  out += format_iso8601(r.ts);
  for (auto m : kAllMetrics) {
    out += ',';
    if (!r.flags.missing.contains(m)) append_number(out, r.value(m));
  }
  out += ',';
  bool first = true;
  auto add_flag = [&](std::string_view text) {
    if (!first) out += ';';
    out += text;
    first = false;
  };
  if (r.flags.clipped) add_flag("clipped");
  if (r.flags.contention_loss) add_flag("contention_loss");
  for (auto m : r.flags.missing) {
    if (!first) out += ';';
    out += kMissingPrefix;
    out += to_string(m);
    first = false;
  }
  return out;
}

std::string encode(std::span<const SampleRecord> records) {
  std::string out;
  out.reserve(records.size() * 150);
  for (const auto& r : records) {
    out += encode_line(r);
    out += '\n';
  }
  return out;
}

SampleRecord decode_line(std::string_view line, std::size_t line_number) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::array<std::string_view, kFieldCount> fields;
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (count == kFieldCount) throw ParseError(line_number, "too many fields");
    fields[count++] = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count != kFieldCount) {
    throw ParseError(line_number, "expected " + std::to_string(kFieldCount) + " fields, got " + std::to_string(count));
  }

  SampleRecord r;
  r.node_id = std::string(fields[0]);
  try {
    r.ts = parse_iso8601(fields[1]);
  } catch (const ParseError& e) {
    throw ParseError(line_number, e.detail());
  }
  r.flags = parse_flags(fields[10], line_number);
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    const auto metric = kAllMetrics[i];
    const auto field = fields[2 + i];
    if (field.empty()) {
      if (!r.flags.missing.contains(metric)) {
        throw ParseError(line_number, "empty " + std::string(to_string(metric)) + " without missing_channel flag");
      }
      r.value(metric) = std::nan("");
    } else {
      r.value(metric) = parse_number(field, line_number, metric);
    }
  }
  validate(r);
  return r;
}

std::vector<SampleRecord> decode(std::string_view bytes) {
  std::vector<SampleRecord> records;
  std::size_t line_number = 0;
  while (!bytes.empty()) {
    ++line_number;
    const auto nl = bytes.find('\n');
    const auto line = bytes.substr(0, nl);
    if (!line.empty() && line != "\r") records.push_back(decode_line(line, line_number));
    if (nl == std::string_view::npos) break;
    bytes.remove_prefix(nl + 1);
  }
  return records;
}

}  // namespace qc
