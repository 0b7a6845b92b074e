#pragma once

#include "json.hpp"

#include "qc/store/record.hpp"

namespace qc {

// JSON form mirroring the line encoding: the same field names, ts as an
// ISO-8601 string, null for a missing channel, flags as an array of the same
// tokens.
nlohmann::json record_to_json(const SampleRecord& record);

// Throws ValidationError naming the offending field.
SampleRecord record_from_json(const nlohmann::json& j);

}  // namespace qc
