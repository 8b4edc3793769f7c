#include "drivestyle/centrality.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>

#include "drivestyle/errors.hpp"

namespace drivestyle {
namespace {
constexpr const char* kModule = "centrality";
}

std::string_view to_string(CentralityKind kind) {
  return kind == CentralityKind::kCloseness ? "closeness" : "degree";
}

CentralitySeries CentralitySeries::slice(const FrameWindow& w) const {
  CentralitySeries out{agent_id, kind, {}, w};
  for (const auto& s : values) {
    if (w.contains(s.frame)) out.values.push_back(s);
  }
  return out;
}

std::vector<double> shortest_path_costs(const InstantGraph& graph, std::size_t source) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(graph.size(), kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (const auto& [w, cost] : graph.neighbors(v)) {
      const double nd = d + cost;
      if (nd < dist[w]) {
        dist[w] = nd;
        queue.emplace(nd, w);
      }
    }
  }
  return dist;
}

double closeness(const InstantGraph& graph, std::string_view agent_id) {
  const auto index = graph.index_of(agent_id);
  if (!index) throw LookupError(kModule, "agent '" + std::string(agent_id) + "' not in graph");
  const auto dist = shortest_path_costs(graph, *index);
  std::size_t reached = 0;
  double total = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    if (j == *index || dist[j] == std::numeric_limits<double>::infinity()) continue;
    ++reached;
    total += dist[j];
  }
  if (reached == 0) return 0.0;
  return static_cast<double>(reached) / total;
}

SeriesMap compute_series(const TrajectoryTable& table, double mu, const FrameWindow& window,
                         std::size_t capacity) {
  if (window.last < window.first) throw ValidationError(kModule, "empty analysis window");
  const auto& frames = table.frames();
  auto it = frames.lower_bound(window.first);
  const auto end = frames.upper_bound(window.last);
  if (it == end) throw ValidationError(kModule, "analysis window contains no frames");

  SeriesMap out;
  CumulativeAdjacency state(capacity);
  for (; it != end; ++it) {
    const auto frame = it->first;
    const auto& agents = it->second;
    if (agents.empty()) continue;
    const auto graph = build_instant_graph(agents, mu);
    SpeedMap speeds;
    for (const auto& a : agents) speeds[a.agent_id] = a.speed();
    const auto counts = state.update(graph, speeds);

    for (const auto& a : agents) {
      auto [slot, inserted] = out.try_emplace(a.agent_id);
      auto& series = slot->second;
      if (inserted) {
        series.closeness = {a.agent_id, CentralityKind::kCloseness, {}, window};
        series.degree = {a.agent_id, CentralityKind::kDegree, {}, window};
      }
      series.closeness.values.push_back({frame, closeness(graph, a.agent_id)});
      const double prev = series.degree.values.empty() ? 0.0 : series.degree.values.back().value;
      series.degree.values.push_back({frame, degree_step(prev, counts.at(a.agent_id))});
    }
  }
  return out;
}

void write_series_csv(std::ostream& out, const SeriesMap& series) {
  out << "frame,agent_id,kind,value\n";
  for (const auto& [id, s] : series) {
    for (const auto* cs : {&s.closeness, &s.degree}) {
      for (const auto& sample : cs->values) {
        out << sample.frame << ',' << id << ',' << to_string(cs->kind) << ','
            << format_number(sample.value) << '\n';
      }
    }
  }
}

}  // namespace drivestyle
