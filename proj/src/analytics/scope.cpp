#include "qc/analytics/scope.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "qc/error.hpp"

namespace qc {

std::string_view to_string(Scope s) { return s == Scope::network_wide ? "network_wide" : "localized"; }

std::vector<ScopedAnomaly> classify_scope(const std::map<std::string, std::vector<AnomalyEvent>>& events_by_node,
                                          Metric metric, std::span<const std::string> fleet,
                                          const ScopeOptions& options) {
  if (fleet.empty()) throw ValidationError("fleet", "fleet must name at least one node");
  if (!(options.quorum > 0.0 && options.quorum <= 1.0)) throw ValidationError("quorum", "must lie in (0, 1]");
  if (options.overlap_window.count() < 0) throw ValidationError("overlap_window", "must be >= 0");
  const std::set<std::string> members(fleet.begin(), fleet.end());

  std::vector<AnomalyEvent> events;
  for (const auto& [node, list] : events_by_node) {
    if (!members.contains(node)) throw ValidationError("fleet", "events from node '" + node + "' outside the fleet");
    for (const auto& e : list) {
      if (e.metric == metric) events.push_back(e);
    }
  }
  std::sort(events.begin(), events.end(), [](const AnomalyEvent& a, const AnomalyEvent& b) {
    return std::tie(a.start, a.end, a.node_id) < std::tie(b.start, b.end, b.node_id);
  });

  std::vector<ScopedAnomaly> out;
  for (const auto& e : events) {
    // Sorted by start, so linking to the running group reduces to comparing
    // against its latest end.
    if (out.empty() || e.start - out.back().end > options.overlap_window) {
      out.push_back(ScopedAnomaly{metric, e.start, e.end, {}, Scope::localized, {}});
    }
    auto& group = out.back();
    group.end = std::max(group.end, e.end);
    group.events.push_back(e);
  }
  const double needed = options.quorum * static_cast<double>(members.size());
  for (auto& group : out) {
    std::set<std::string> nodes;
    for (const auto& e : group.events) nodes.insert(e.node_id);
    group.nodes.assign(nodes.begin(), nodes.end());
    group.scope = static_cast<double>(group.nodes.size()) >= needed - 1e-9 ? Scope::network_wide : Scope::localized;
  }
  return out;
}

}  // namespace qc
