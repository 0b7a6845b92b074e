#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "qc/analytics/signature.hpp"

namespace qc {

enum class Scope { network_wide, localized };

std::string_view to_string(Scope s);

struct ScopedAnomaly {
  Metric metric = Metric::dust_p001cf;
  Timestamp start{};
  Timestamp end{};
  std::vector<std::string> nodes;  // sorted, distinct
  Scope scope = Scope::localized;
  std::vector<AnomalyEvent> events;
};

struct ScopeOptions {
  Millis overlap_window = kHour;
  double quorum = 0.75;
};

// Events of `metric` are linked when the gap between their intervals is at
// most overlap_window (overlapping intervals have a negative gap); each
// connected group becomes one ScopedAnomaly. A group is network_wide iff its
// distinct nodes number at least quorum * fleet.size().
std::vector<ScopedAnomaly> classify_scope(const std::map<std::string, std::vector<AnomalyEvent>>& events_by_node,
                                          Metric metric, std::span<const std::string> fleet,
                                          const ScopeOptions& options = {});

}  // namespace qc
